#include "lresp/shadowing.hpp"

#include "lresp/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lresp {

namespace {

void check_window(std::size_t first, std::size_t count, std::size_t margin, std::size_t frame_end) {
  if (margin < 1) throw ConfigError("shadowing: margin must be >= 1");
  if (count <= 2 * margin) throw ConfigError("shadowing: window shorter than twice the margin");
  if (first + count > frame_end) throw ConfigError("shadowing: series exceeds frame range");
}

Vec unit_random(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
  return v / v.norm();
}

}  // namespace

AdjointShadow adjoint_shadow(const SystemDef& sys, const OrbitData& orbit, const TangentFrame& tangent,
                             const AdjointFrame& adjoint, const CovectorSeries& omega, std::size_t margin) {
  const std::size_t b = omega.first();
  const std::size_t e = omega.end();
  check_window(b, omega.count(), margin, tangent.steps());
  const int M = sys.dim;
  const int u = sys.udim;

  Vec coef(u);
  auto project_stable = [&](std::size_t m, Vec& eta) {
    coef.noalias() = tangent.Q[m].transpose() * eta;
    eta.noalias() -= adjoint.Et[m].transpose() * coef;
  };

  // Stable part, backward.
  Mat s(M, static_cast<Eigen::Index>(omega.count()));
  Vec cur = omega[e - 1];
  project_stable(e - 1, cur);
  s.col(static_cast<Eigen::Index>(e - 1 - b)) = cur;
  Vec pulled(M);
  for (std::size_t m = e - 1; m-- > b;) {
    sys.vjp(orbit[m], cur, pulled);
    cur.noalias() = omega[m] + pulled;
    project_stable(m, cur);
    s.col(static_cast<Eigen::Index>(m - b)) = cur;
  }

  // Unstable part, forward: c_{m+1} = R_m^{-T} (c_m + Q_m^T omega_m).
  const StepWindow interior = StepWindow{b, e}.shrink(margin);
  AdjointShadow out;
  out.nu = CovectorSeries(interior.begin, interior.size(), M, "nu");
  Vec c = Vec::Zero(u);
  for (std::size_t m = b; m < interior.end; ++m) {
    if (m >= interior.begin) {
      out.nu[m].noalias() = s.col(static_cast<Eigen::Index>(m - b)) - adjoint.Et[m].transpose() * c;
    }
    c.noalias() += tangent.Q[m].transpose() * omega[m];
    tangent.R[m].transpose().triangularView<Eigen::Lower>().solveInPlace(c);
  }

  double max_nu = 0.0;
  for (std::size_t m = interior.begin; m < interior.end; ++m) {
    max_nu = std::max(max_nu, out.nu[m].norm());
    if (m + 1 < interior.end) {
      sys.vjp(orbit[m], out.nu[m + 1], pulled);
      out.residual = std::max(out.residual, (out.nu[m] - pulled - omega[m]).norm());
      if (!std::isfinite(out.residual)) throw NumericalError("non-finite adjoint shadow", m);
    }
  }

  // Homogeneous decay over one margin, measured on the actual frames.
  Vec d = unit_random(M, 0x51ed270b);
  project_stable(e - 1, d);
  const double d0 = d.norm();
  for (std::size_t m = e - 1; m-- > e - 1 - margin;) {
    sys.vjp(orbit[m], d, pulled);
    d = pulled;
    project_stable(m, d);
  }
  Vec k = unit_random(u, 0x2545f491);
  for (std::size_t m = b; m < b + margin; ++m)
    k = tangent.R[m].transpose().triangularView<Eigen::Lower>().solve(k);
  out.tail_bound = std::max(d0 > 0.0 ? d.norm() / d0 : 0.0, k.norm()) * max_nu;
  return out;
}

ForwardShadow forward_shadow(const SystemDef& sys, const OrbitData& orbit, const TangentFrame& tangent,
                             const AdjointFrame& adjoint, const VectorSeries& Y, std::size_t margin) {
  const std::size_t b = Y.first();
  const std::size_t e = Y.end();
  check_window(b, Y.count(), margin, tangent.steps());
  const int M = sys.dim;
  const int u = sys.udim;

  Vec coef(u);
  auto project_stable = [&](std::size_t m, Vec& v) {
    coef.noalias() = adjoint.Et[m] * v;
    v.noalias() -= tangent.Q[m] * coef;
  };

  // Unstable coefficients, backward: c_m = R_m^{-1} (c_{m+1} - Et_{m+1} Y_{m+1}).
  Mat c(u, static_cast<Eigen::Index>(Y.count()));
  Vec cur = Vec::Zero(u);
  c.col(static_cast<Eigen::Index>(e - 1 - b)) = cur;
  for (std::size_t m = e - 1; m-- > b;) {
    cur.noalias() -= adjoint.Et[m + 1] * Y[m + 1];
    tangent.R[m].triangularView<Eigen::Upper>().solveInPlace(cur);
    c.col(static_cast<Eigen::Index>(m - b)) = cur;
  }

  // Stable part, forward.
  const StepWindow interior = StepWindow{b, e}.shrink(margin);
  ForwardShadow out;
  out.v = VectorSeries(interior.begin, interior.size(), M, "S(Y)");
  Vec s = Y[b];
  project_stable(b, s);
  Vec pushed(M);
  for (std::size_t m = b;; ++m) {
    if (m >= interior.begin) out.v[m] = s + tangent.Q[m] * c.col(static_cast<Eigen::Index>(m - b));
    if (m + 1 >= interior.end) break;
    sys.jvp(orbit[m], s, pushed);
    s.noalias() = pushed + Y[m + 1];
    project_stable(m + 1, s);
  }

  double max_v = 0.0;
  for (std::size_t m = interior.begin; m < interior.end; ++m) {
    max_v = std::max(max_v, out.v[m].norm());
    if (m + 1 < interior.end) {
      sys.jvp(orbit[m], out.v[m], pushed);
      out.residual = std::max(out.residual, (out.v[m + 1] - pushed - Y[m + 1]).norm());
      if (!std::isfinite(out.residual)) throw NumericalError("non-finite forward shadow", m);
    }
  }

  Vec d = unit_random(M, 0x51ed270b);
  project_stable(b, d);
  const double d0 = d.norm();
  for (std::size_t m = b; m < b + margin; ++m) {
    sys.jvp(orbit[m], d, pushed);
    d = pushed;
    project_stable(m + 1, d);
  }
  Vec k = unit_random(u, 0x2545f491);
  for (std::size_t m = e - 1; m-- > e - 1 - margin;) k = tangent.R[m].triangularView<Eigen::Upper>().solve(k);
  out.tail_bound = std::max(d0 > 0.0 ? d.norm() / d0 : 0.0, k.norm()) * max_v;
  return out;
}

}  // namespace lresp
