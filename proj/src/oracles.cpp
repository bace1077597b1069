#include "lresp/oracles.hpp"

#include "lresp/divergence.hpp"
#include "lresp/error.hpp"
#include "lresp/quadrature.hpp"
#include "lresp/response.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

namespace lresp {

namespace {

struct PairDifference {
  double value = 0.0;  // (avg+ - avg-) / (2 dgamma)
  Estimate batch;      // batch means of the per-step difference
};

PairDifference run_pair(const SystemDef& sys, const FdOptions& opt, double dg, std::uint64_t seed) {
  const int M = sys.dim;
  Vec x0(M);
  std::mt19937_64 rng(seed);
  sys.sample_initial(rng, x0);
  Vec xp = x0, xm = x0, y(M);
  // Common random numbers for the two parameter values.
  std::mt19937_64 rng_p(rng()), rng_m = rng_p;
  auto advance = [&] {
    sys.map(xp, dg, y);
    if (sys.refresh) sys.refresh(y, rng_p);
    xp.swap(y);
    sys.map(xm, -dg, y);
    if (sys.refresh) sys.refresh(y, rng_m);
    xm.swap(y);
  };
  for (std::size_t k = 0; k < opt.spinup; ++k) advance();
  BatchAccumulator acc(opt.steps);
  const double scale = 1.0 / (2.0 * dg);
  for (std::size_t n = 0; n < opt.steps; ++n) {
    acc.add((sys.obs(xp) - sys.obs(xm)) * scale);
    advance();
    if (!xp.allFinite() || !xm.allFinite()) throw NumericalError("fd_response: orbit diverged", n);
  }
  Estimate e = acc.estimate();
  return {e.mean, e};
}

Estimate fd_at(const SystemDef& sys, const FdOptions& opt, double dg) {
  const auto np = static_cast<std::size_t>(opt.pairs);
  std::vector<PairDifference> res(np);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (int i = next++; i < opt.pairs; i = next++) {
      try {
        res[static_cast<std::size_t>(i)] = run_pair(sys, opt, dg, replica_seed(opt.seed, i));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int nt = std::max(1, std::min(opt.threads, opt.pairs));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  if (np == 1) return res[0].batch;
  std::vector<double> vals;
  for (const auto& r : res) vals.push_back(r.value);
  return sample_mean(vals);
}

}  // namespace

FdResult fd_response(const SystemDef& sys, const FdOptions& opt) {
  if (!(opt.dgamma > 0.0)) throw ConfigError("fd_response: dgamma must be positive");
  if (opt.pairs < 1 || opt.steps < 2) throw ConfigError("fd_response: need pairs >= 1 and steps >= 2");
  FdResult out;
  out.value = fd_at(sys, opt, opt.dgamma);
  if (opt.richardson) {
    out.coarse = fd_at(sys, opt, 2.0 * opt.dgamma);
    out.extrapolated = (4.0 * out.value.mean - out.coarse->mean) / 3.0;
  }
  return out;
}

std::vector<EnsembleTerm> ensemble_response(const SystemDef& sys, const OrbitData& orbit, int horizon) {
  if (horizon < 0) throw ConfigError("ensemble_response: horizon must be >= 0");
  const auto H = static_cast<std::size_t>(horizon);
  const std::size_t N = orbit.steps();
  if (N <= H + 1) throw ConfigError("ensemble_response: orbit shorter than the horizon");
  const std::size_t count = N - H;
  const int M = sys.dim;

  std::vector<BatchAccumulator> acc(H + 1, BatchAccumulator(count));
  std::vector<double> sq(H + 1, 0.0);
  Vec v(M), w(M), d(M);
  for (std::size_t n = 0; n < count; ++n) {
    sys.perturbation.field(orbit[n], v);
    for (std::size_t m = 0; m <= H; ++m) {
      if (m > 0) {
        sys.jvp(orbit[n + m - 1], v, w);
        v.swap(w);
      }
      sys.dobs(orbit[n + m], d);
      const double t = d.dot(v);
      acc[m].add(t);
      sq[m] += t * t;
    }
  }
  std::vector<EnsembleTerm> out;
  double partial = 0.0;
  for (std::size_t m = 0; m <= H; ++m) {
    EnsembleTerm e;
    e.m = static_cast<int>(m);
    e.term = acc[m].estimate();
    e.magnitude = std::sqrt(sq[m] / static_cast<double>(count));
    partial += e.term.mean;
    e.partial = partial;
    out.push_back(e);
  }
  return out;
}

ScalarSeries expanded_divergence(const SystemDef& sys, const Perturbation& X, const OrbitData& orbit,
                                 const TangentFrame& tangent, const AdjointFrame& adjoint, const CovectorSeries& omega,
                                 int T) {
  if (T < 0) throw ConfigError("expanded_divergence: T must be >= 0");
  const auto t = static_cast<std::size_t>(T);
  if (omega.count() <= 2 * t + 1) throw ConfigError("expanded_divergence: window shorter than 2T");
  const std::size_t first = omega.first() + t;
  const std::size_t last = omega.end() - t - 1;  // needs omega at m + T
  const int M = sys.dim;

  ScalarSeries out;
  out.first = first;
  out.values.reserve(last - first);
  Vec Xm(M), s(M), w(M);
  for (std::size_t m = first; m < last; ++m) {
    X.field(orbit[m], Xm);
    double minus = div_v_X(X, orbit, tangent, adjoint, m);

    // Unstable part pulled back: f_*^{-k} Q_m c = Q_{m-k} R_{m-k}^{-1} ... R_{m-1}^{-1} c.
    Vec c = adjoint.Et[m] * Xm;
    for (std::size_t k = 1; k <= t; ++k) {
      c = tangent.R[m - k].triangularView<Eigen::Upper>().solve(c);
      minus -= omega[m - k].dot(tangent.Q[m - k] * c);
    }

    // Stable part pushed forward with re-projection.
    s = Xm - tangent.Q[m] * (adjoint.Et[m] * Xm);
    minus += omega[m].dot(s);
    for (std::size_t k = 1; k <= t; ++k) {
      sys.jvp(orbit[m + k - 1], s, w);
      s = w - tangent.Q[m + k] * (adjoint.Et[m + k] * w);
      minus += omega[m + k].dot(s);
    }
    out.values.push_back(-minus);
  }
  return out;
}

DecayResult decay_check(const SystemDef& sys, const OrbitData& orbit, const TangentFrame& tangent,
                        const AdjointFrame& adjoint, int n_probe, int max_length, std::uint64_t seed) {
  if (n_probe < 1 || max_length < 2) throw ConfigError("decay_check: need n_probe >= 1 and max_length >= 2");
  const StepWindow window = converged_window(tangent, adjoint);
  const auto L = static_cast<std::size_t>(max_length);
  if (window.size() <= L * static_cast<std::size_t>(n_probe))
    throw ConfigError("decay_check: orbit too short for the probes");
  const int M = sys.dim;
  const int u = sys.udim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;

  std::vector<double> log_sum(L + 1, 0.0);
  std::vector<int> finite(L + 1, 0);
  const std::size_t stride = window.size() / static_cast<std::size_t>(n_probe);
  Mat w(M, u);
  Vec col(M);
  for (int p = 0; p < n_probe; ++p) {
    const std::size_t n0 = window.begin + static_cast<std::size_t>(p) * stride;
    Mat C(M, u);
    for (int j = 0; j < u; ++j)
      for (int i = 0; i < M; ++i) C(i, j) = g(rng);
    C -= tangent.Q[n0] * (adjoint.Et[n0] * C);  // stable replaced columns
    const double base = (adjoint.Et[n0] * C).trace();
    const double scale = C.norm();
    for (std::size_t k = 0; k <= L; ++k) {
      if (k > 0) {
        const std::size_t n = n0 + k - 1;
        for (int j = 0; j < u; ++j) {
          sys.jvp(orbit[n], C.col(j), col);
          w.col(j) = col;
        }
        C = tangent.R[n].transpose().triangularView<Eigen::Lower>().solve(w.transpose()).transpose();
      }
      const double gap = std::abs((tangent.Q[n0 + k].transpose() * C).trace() - base) / scale;
      if (gap > 0.0) {
        log_sum[k] += std::log(gap);
        ++finite[k];
      }
    }
  }

  DecayResult out;
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k <= L; ++k) {
    out.lengths.push_back(static_cast<int>(k));
    const double gm = finite[k] == n_probe ? std::exp(log_sum[k] / n_probe) : 0.0;
    out.gap.push_back(gm);
    // Fit only where the gap is well above roundoff.
    if (k >= 1 && gm > 1e-13) {
      xs.push_back(static_cast<double>(k));
      ys.push_back(std::log(gm));
    }
  }
  out.slope = xs.size() >= 2 ? fit_line(xs, ys).slope : std::numeric_limits<double>::quiet_NaN();
  return out;
}

ScalingResult ulam_error_scaling(int a_dim, int m_dim, const std::vector<double>& widths,
                                 const std::function<double(CRef)>& obs) {
  if (m_dim < 1 || m_dim > 3 || a_dim < 0 || a_dim > m_dim)
    throw ConfigError("ulam_error_scaling: need 0 <= a <= M <= 3");
  const int trans = m_dim - a_dim;
  const auto [gx, gw] = gauss_legendre(8);
  const auto q = static_cast<int>(gx.size());

  // Integrate obs over a box with tensor Gauss-Legendre; half-widths per axis.
  auto box_mean = [&](const std::vector<double>& half) {
    int total = 1;
    for (int d = 0; d < m_dim; ++d) total *= (half[static_cast<std::size_t>(d)] > 0.0 ? q : 1);
    Vec x(m_dim);
    double acc = 0.0;
    for (int idx = 0; idx < total; ++idx) {
      int r = idx;
      double wt = 1.0;
      for (int d = 0; d < m_dim; ++d) {
        const double hw = half[static_cast<std::size_t>(d)];
        if (hw > 0.0) {
          const int k = r % q;
          r /= q;
          x[d] = hw * gx[static_cast<std::size_t>(k)];
          wt *= 0.5 * gw[static_cast<std::size_t>(k)];
        } else {
          x[d] = 0.0;
        }
      }
      acc += wt * obs(x);
    }
    return acc;
  };

  std::vector<double> exact_half(static_cast<std::size_t>(m_dim), 0.0);
  for (int d = trans; d < m_dim; ++d) exact_half[static_cast<std::size_t>(d)] = 0.5;
  const double reference = box_mean(exact_half);

  ScalingResult out;
  std::vector<double> lb, le;
  for (double b : widths) {
    std::vector<double> half = exact_half;
    for (int d = 0; d < trans; ++d) half[static_cast<std::size_t>(d)] = 0.5 * b;
    const double err = box_mean(half) - reference;
    out.rows.push_back({b, err});
    if (std::abs(err) > 0.0) {
      lb.push_back(std::log(b));
      le.push_back(std::log(std::abs(err)));
    }
  }
  out.slope = lb.size() >= 2 && lb.size() == widths.size() ? fit_line(lb, le).slope
                                                            : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace lresp
