#include "lresp/divergence.hpp"

#include "lresp/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace lresp {

double div_v_X(const Perturbation& X, const OrbitData& orbit, const TangentFrame& tangent,
               const AdjointFrame& adjoint, std::size_t n) {
  auto x = orbit[n];
  auto Q = tangent.Q[n];
  auto Et = adjoint.Et[n];
  thread_local Vec dX;
  dX.resize(x.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < Q.cols(); ++i) {
    X.derivative(x, Q.col(i), dX);
    acc += Et.row(i).dot(dX);
  }
  return acc;
}

namespace {

struct FstarWork {
  Vec ej, h;
  Mat B;
  FstarWork(int M, int u) : ej(Vec::Zero(M)), h(M), B(u, u) {}
};

void div_v_fstar_into(const SystemDef& sys, const OrbitData& orbit, const TangentFrame& tangent,
                      const AdjointFrame& adjoint, std::size_t n, FstarWork& wk, Out omega) {
  const int u = sys.udim;
  auto x = orbit[n];
  auto Q = tangent.Q[n];
  auto Et1 = adjoint.Et[n + 1];
  auto R = tangent.R[n];
  for (int j = 0; j < sys.dim; ++j) {
    wk.ej.setZero();
    wk.ej[j] = 1.0;
    for (int i = 0; i < u; ++i) {
      sys.hvp(x, Q.col(i), wk.ej, wk.h);
      wk.B.col(i).noalias() = Et1 * wk.h;
    }
    R.triangularView<Eigen::Upper>().solveInPlace(wk.B);
    omega[j] = wk.B.trace();
  }
}

}  // namespace

Vec div_v_fstar(const SystemDef& sys, const OrbitData& orbit, const TangentFrame& tangent,
                const AdjointFrame& adjoint, std::size_t n) {
  FstarWork wk(sys.dim, sys.udim);
  Vec omega(sys.dim);
  div_v_fstar_into(sys, orbit, tangent, adjoint, n, wk, omega);
  return omega;
}

CovectorSeries div_v_fstar_series(const SystemDef& sys, const OrbitData& orbit, const TangentFrame& tangent,
                                  const AdjointFrame& adjoint, StepWindow window) {
  if (window.end > tangent.steps()) throw ConfigError("div_v_fstar_series: window exceeds frame range");
  CovectorSeries out(window.begin, window.size(), sys.dim, "div^v f_*");
  FstarWork wk(sys.dim, sys.udim);
  Vec omega(sys.dim);
  for (std::size_t n = window.begin; n < window.end; ++n) {
    div_v_fstar_into(sys, orbit, tangent, adjoint, n, wk, omega);
    out[n] = omega;
  }
  return out;
}

CovectorSeries dobs_series(const SystemDef& sys, const OrbitData& orbit, StepWindow window) {
  CovectorSeries out(window.begin, window.size(), sys.dim, "dPhi");
  Vec d(sys.dim);
  for (std::size_t n = window.begin; n < window.end; ++n) {
    sys.dobs(orbit[n], d);
    out[n] = d;
  }
  return out;
}

double brute_det(const Mat& m) {
  const auto k = static_cast<int>(m.rows());
  if (m.cols() != k) throw std::invalid_argument("brute_det: matrix not square");
  if (k == 0) return 1.0;
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  double det = 0.0;
  do {
    int inversions = 0;
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b)
        if (perm[static_cast<std::size_t>(a)] > perm[static_cast<std::size_t>(b)]) ++inversions;
    double term = (inversions % 2 == 0) ? 1.0 : -1.0;
    for (int r = 0; r < k; ++r) term *= m(r, perm[static_cast<std::size_t>(r)]);
    det += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return det;
}

namespace {

Mat random_mixing(int u, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 0.7);
  for (;;) {
    Mat S = Mat::Identity(u, u);
    for (int i = 0; i < u; ++i)
      for (int j = 0; j < u; ++j) S(i, j) += g(rng);
    if (std::abs(brute_det(S)) > 0.2) return S;
  }
}

// Length of the wedge of the columns: sqrt(det(B^T B)).
double wedge_norm(const Mat& B) { return std::sqrt(brute_det(B.transpose() * B)); }

// eps(w_1 ^ ... ^ w_u) for the co-cube spanned by rows of alpha, normalized
// so that it evaluates to 1 on the unit cube of span(basis).
double cocube(const Mat& alpha, const Mat& basis, const Mat& W) {
  return brute_det(alpha * W) * wedge_norm(basis) / brute_det(alpha * basis);
}

Mat replace_col(Mat B, int i, const Vec& v) {
  B.col(i) = v;
  return B;
}

}  // namespace

WedgeResult wedge_oracle(const SystemDef& sys, const Perturbation& X, const OrbitData& orbit,
                         const TangentFrame& tangent, const AdjointFrame& adjoint, std::size_t n, WedgeMode mode,
                         std::uint64_t seed) {
  const int M = sys.dim;
  const int u = sys.udim;
  if (M > 6 || u > 3) throw ConfigError("wedge_oracle: limited to M <= 6 and u <= 3");
  std::mt19937_64 rng(seed);

  Mat B = tangent.Q[n] * random_mixing(u, rng);
  Mat alpha = random_mixing(u, rng) * adjoint.A[n];
  auto x = orbit[n];
  WedgeResult res;

  if (mode == WedgeMode::DivX) {
    // eps nabla_e X = sum_i eps(b_1 ^ .. ^ nabla_{b_i} X ^ .. ^ b_u) / |b_1 ^ .. ^ b_u|
    const double nb = wedge_norm(B);
    double acc = 0.0;
    for (int i = 0; i < u; ++i) acc += cocube(alpha, B, replace_col(B, i, X.grad(x, B.col(i))));
    res.scalar = acc / nb;
    return res;
  }

  // eps_1 (nabla_e f_*) Y / |f_* e| with eps_1 the co-cube at f(x_n).
  if (n + 1 >= adjoint.A.size()) throw ConfigError("wedge_oracle: step out of range");
  Mat alpha1 = random_mixing(u, rng) * adjoint.A[n + 1];
  Mat P(M, u);
  for (int i = 0; i < u; ++i) P.col(i) = sys.push(x, B.col(i));
  const double nb = wedge_norm(B);
  const double jac = wedge_norm(P) / nb;  // |f_* e|
  res.covector = Vec::Zero(M);
  for (int j = 0; j < M; ++j) {
    Vec Y = Vec::Zero(M);
    Y[j] = 1.0;
    double acc = 0.0;
    for (int i = 0; i < u; ++i) acc += cocube(alpha1, P, replace_col(P, i, sys.hessian(x, B.col(i), Y)));
    res.covector[j] = acc / nb / jac;
  }
  return res;
}

}  // namespace lresp
