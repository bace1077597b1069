#include "lresp/response.hpp"

#include "lresp/divergence.hpp"
#include "lresp/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace lresp {

namespace {

#if defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__)
#define LRESP_VECTOR_CLONES __attribute__((target_clones("avx2", "default")))
#else
#define LRESP_VECTOR_CLONES
#endif

constexpr std::size_t kLanes = 16;

// out[w] = sum_{i < count} dens[i] (hi[i + w] - lo[w - i]) for w < nw. Both arrays
// must stay readable kLanes - 1 entries past the last index used.
LRESP_VECTOR_CLONES
void window_sweep(const double* dens, const double* hi, const double* lo, std::size_t count, std::size_t nw,
                  double* out) {
#if defined(__GNUC__)
  using v4 = double __attribute__((vector_size(32)));
  using v4u = double __attribute__((vector_size(32), aligned(8), may_alias));
#define LOAD4(q) (*reinterpret_cast<const v4u*>(q))
  for (std::size_t w = 0; w < nw; w += kLanes) {
    v4 s0 = {}, s1 = {}, s2 = {}, s3 = {};
    for (std::size_t i = 0; i < count; ++i) {
      const double d = dens[i];
      const double* h = hi + i + w;
      const double* l = lo - i + w;
      s0 += (LOAD4(h) - LOAD4(l)) * d;
      s1 += (LOAD4(h + 4) - LOAD4(l + 4)) * d;
      s2 += (LOAD4(h + 8) - LOAD4(l + 8)) * d;
      s3 += (LOAD4(h + 12) - LOAD4(l + 12)) * d;
    }
    double s[kLanes];
    __builtin_memcpy(s, &s0, sizeof s0);
    __builtin_memcpy(s + 4, &s1, sizeof s1);
    __builtin_memcpy(s + 8, &s2, sizeof s2);
    __builtin_memcpy(s + 12, &s3, sizeof s3);
    for (std::size_t j = 0; j < kLanes && w + j < nw; ++j) out[w + j] = s[j];
  }
#undef LOAD4
#else
  for (std::size_t w = 0; w < nw; ++w) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += dens[i] * (hi[i + w] - lo[w - i]);
    out[w] = s;
  }
#endif
}

// fwd[k] = sum_{j < k} (phi_j - c) and rev[len - 1 - k] = fwd[k], len = phi.size() + 1,
// each padded with kLanes trailing zeros.
void running_sums(const std::vector<double>& phi, double c, std::vector<double>& fwd, std::vector<double>& rev) {
  const std::size_t len = phi.size() + 1;
  fwd.assign(len + kLanes, 0.0);
  rev.assign(len + kLanes, 0.0);
  for (std::size_t k = 0; k + 1 < len; ++k) fwd[k + 1] = fwd[k] + (phi[k] - c);
  for (std::size_t k = 0; k < len; ++k) rev[len - 1 - k] = fwd[k];
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <class F>
void parallel_for(int count, int threads, F&& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}


}  // namespace

std::uint64_t replica_seed(std::uint64_t seed, int replica) {
  return splitmix(seed ^ splitmix(static_cast<std::uint64_t>(replica) + 0x632be59bd9b4e019ULL));
}

OrbitPipeline prepare_pipeline(const SystemDef& sys, const ResponseOptions& opt, int replica) {
  OrbitPipeline p;
  const std::uint64_t seed = replica_seed(opt.seed, replica);
  p.orbit = generate_orbit(sys, {.spinup = opt.spinup, .steps = opt.steps, .seed = seed, .gamma = 0.0, .x_init = {}});

  FrameOptions fo;
  fo.seed = opt.frame_seed ? replica_seed(*opt.frame_seed, replica) : splitmix(seed);
  p.tangent = push_unstable(sys, p.orbit, fo);
  p.adjoint = pull_adjoint(sys, p.orbit, p.tangent, fo);
  p.window = converged_window(p.tangent, p.adjoint);
  if (p.window.size() <= 2 * opt.margin)
    throw ConfigError("orbit too short: converged window of " + std::to_string(p.window.size()) +
                      " steps does not exceed twice the margin");
  p.interior = p.window.shrink(opt.margin);

  p.nu_div = adjoint_shadow(sys, p.orbit, p.tangent, p.adjoint,
                            div_v_fstar_series(sys, p.orbit, p.tangent, p.adjoint, p.window), opt.margin);
  p.nu_obs = adjoint_shadow(sys, p.orbit, p.tangent, p.adjoint, dobs_series(sys, p.orbit, p.window), opt.margin);

  const std::size_t count = p.orbit.steps() + 1;
  p.phi.resize(count);
  double sum = 0.0;
  for (std::size_t n = 0; n < count; ++n) {
    p.phi[n] = sys.obs(p.orbit[n]);
    sum += p.phi[n];
  }
  p.phi_mean = sum / static_cast<double>(count);
  running_sums(p.phi, p.phi_mean, p.phi_sums, p.phi_sums_rev);
  return p;
}

double unstable_density_ratio(const Perturbation& X, const OrbitData& orbit, const TangentFrame& tangent,
                              const AdjointFrame& adjoint, const CovectorSeries& nu, std::size_t n) {
  Vec Xn = X.at(orbit[n]);
  return -(div_v_X(X, orbit, tangent, adjoint, n) + nu[n].dot(Xn));
}

double unstable_density_ratio(const Perturbation& X, const OrbitPipeline& p, std::size_t n) {
  return unstable_density_ratio(X, p.orbit, p.tangent, p.adjoint, p.nu_div.nu, n);
}

double phi_window(const OrbitPipeline& p, std::size_t n, int W, bool centered) {
  const double c = centered ? p.phi_mean : 0.0;
  const auto w = static_cast<std::size_t>(W);
  if (W < 0 || n < w || n + w >= p.phi.size()) throw ConfigError("phi_window: W too large for the orbit");
  double acc = 0.0;
  for (std::size_t k = n - w; k <= n + w; ++k) acc += p.phi[k] - c;
  return acc;
}

StepWindow sample_window(const OrbitPipeline& p, int w_max) {
  if (w_max < 0) throw ConfigError("W must be >= 0");
  const auto w = static_cast<std::size_t>(w_max);
  StepWindow s = p.interior;
  s.begin = std::max(s.begin, w);
  s.end = std::min(s.end, p.phi.size() - w);
  if (s.size() < 2) throw ConfigError("W too large for the window");
  return s;
}

PerturbationStats evaluate_perturbation(const Perturbation& X, const OrbitPipeline& p, int w_max, bool centered) {
  const StepWindow S = sample_window(p, w_max);
  const std::size_t count = S.size();
  // Streams: 0 = S.C., 1 = density ratio, 2 + W = U.C.(W).
  const auto nw = static_cast<std::size_t>(w_max + 1);
  MultiBatchAccumulator acc(count, nw + 2);

  // phi_W(x_n) = fwd[n + W + 1] - fwd[n - W] with the running sums of Phi - c.
  std::vector<double> own_fwd, own_rev;
  if (!centered) running_sums(p.phi, 0.0, own_fwd, own_rev);
  const std::vector<double>& fwd = centered ? p.phi_sums : own_fwd;
  const std::vector<double>& rev = centered ? p.phi_sums_rev : own_rev;
  const std::size_t len = p.phi.size() + 1;
  // Sample i is step n = S.begin + i: hi[i + w] = fwd[n + w + 1], lo[w - i] = fwd[n - w].
  const double* hi = fwd.data() + S.begin + 1;
  const double* lo = rev.data() + (len - 1 - S.begin);

  const int M = p.orbit.dim();
  const Eigen::Index u = p.tangent.Q.cols();
  Vec Xn(M), dX(M);
  std::vector<double> dens(std::max(acc.batch_size(), count - acc.batches() * acc.batch_size()));
  for (std::size_t k = 0; k <= acc.batches(); ++k) {
    const std::size_t a = k * acc.batch_size();
    const std::size_t b = k < acc.batches() ? a + acc.batch_size() : count;
    if (a == b) continue;
    double* row = acc.block_row(k);
    for (std::size_t i = a; i < b; ++i) {
      const std::size_t n = S.begin + i;
      const auto x = p.orbit[n];
      X.field(x, Xn);
      // Inline div^v X: sum_j Et_j . (nabla X) q_j.
      const auto Q = p.tangent.Q[n];
      const auto Et = p.adjoint.Et[n];
      double div = 0.0;
      for (Eigen::Index j = 0; j < u; ++j) {
        X.derivative(x, Q.col(j), dX);
        div += Et.row(j).dot(dX);
      }
      const double* nd = p.nu_div.nu.values().col(static_cast<Eigen::Index>(n - p.nu_div.nu.first())).data();
      const double* no = p.nu_obs.nu.values().col(static_cast<Eigen::Index>(n - p.nu_obs.nu.first())).data();
      double nx = 0.0;
      double ox = 0.0;
      for (int m = 0; m < M; ++m) {
        nx += nd[m] * Xn[m];
        ox += no[m] * Xn[m];
      }
      const double d = -(div + nx);
      dens[i - a] = d;
      row[0] += ox;
      row[1] += d;
    }
    window_sweep(dens.data(), hi + a, lo - a, b - a, nw, row + 2);
  }
  acc.mark_filled();

  PerturbationStats st;
  st.samples = S;
  st.sc = acc.estimate(0);
  st.density = acc.estimate(1);
  for (std::size_t w = 0; w < nw; ++w) {
    st.uc.push_back(acc.estimate(2 + w));
    st.total.push_back(acc.estimate_sum(0, 2 + w));
  }
  return st;
}

Estimate shadowing_contribution(const Perturbation& X, const OrbitPipeline& p) {
  return evaluate_perturbation(X, p, 0, true).sc;
}

std::vector<Estimate> unstable_contribution(const Perturbation& X, const OrbitPipeline& p, int w_max,
                                            bool centered) {
  return evaluate_perturbation(X, p, w_max, centered).uc;
}

std::optional<int> detect_plateau(const std::vector<Estimate>& uc) {
  for (std::size_t W = 0; W + 2 < uc.size(); ++W) {
    const double tol = uc[W].se;
    if (std::abs(uc[W + 1].mean - uc[W].mean) <= tol && std::abs(uc[W + 2].mean - uc[W + 1].mean) <= tol)
      return static_cast<int>(W);
  }
  return std::nullopt;
}

std::vector<ResponseReport> linear_response(const SystemDef& sys, const ResponseOptions& opt,
                                            const std::vector<Perturbation>& extra) {
  if (opt.replicas < 1) throw ConfigError("replicas must be >= 1");
  const int w_max = std::max(opt.w_max, opt.w.value_or(0));
  if (opt.w && *opt.w < 0) throw ConfigError("W must be >= 0");

  std::vector<Perturbation> fields = {sys.perturbation};
  fields.insert(fields.end(), extra.begin(), extra.end());
  const std::size_t nf = fields.size();
  const auto nr = static_cast<std::size_t>(opt.replicas);

  // stats[f][r]
  std::vector<std::vector<PerturbationStats>> stats(nf, std::vector<PerturbationStats>(nr));
  std::vector<std::vector<double>> lyap(nr);
  std::vector<double> resid(nr, 0.0), tail(nr, 0.0), cond(nr, 0.0);

  parallel_for(opt.replicas, opt.threads, [&](int r) {
    const auto ri = static_cast<std::size_t>(r);
    OrbitPipeline p = prepare_pipeline(sys, opt, r);
    for (std::size_t f = 0; f < nf; ++f) stats[f][ri] = evaluate_perturbation(fields[f], p, w_max, opt.centered);
    lyap[ri] = lyapunov_exponents(p.tangent);
    resid[ri] = std::max(p.nu_div.residual, p.nu_obs.residual);
    tail[ri] = std::max(p.nu_div.tail_bound, p.nu_obs.tail_bound);
    cond[ri] = p.adjoint.max_condition;
  });

  std::vector<ResponseReport> reports;
  for (std::size_t f = 0; f < nf; ++f) {
    ResponseReport rep;
    rep.system = sys.name;
    rep.params = sys.params;
    rep.perturbation = fields[f].name;
    rep.observable = sys.params.contains("obs") ? sys.params["obs"].get<std::string>() : std::string("default");

    auto combine = [&](auto pick) {
      std::vector<Estimate> es;
      for (std::size_t r = 0; r < nr; ++r) es.push_back(pick(stats[f][r]));
      return combine_replicas(es);
    };
    rep.sc = combine([](const PerturbationStats& s) { return s.sc; });
    std::vector<Estimate> uc_sweep;
    for (int W = 0; W <= w_max; ++W) {
      const auto wi = static_cast<std::size_t>(W);
      SweepRow row;
      row.W = W;
      row.uc = combine([wi](const PerturbationStats& s) { return s.uc[wi]; });
      row.total = combine([wi](const PerturbationStats& s) { return s.total[wi]; });
      rep.sweep.push_back(row);
      uc_sweep.push_back(row.uc);
    }
    auto plateau = detect_plateau(uc_sweep);
    rep.diagnostics.plateau = plateau.has_value();
    rep.W = opt.w ? *opt.w : plateau.value_or(w_max);
    rep.uc = rep.sweep[static_cast<std::size_t>(rep.W)].uc;
    rep.total = rep.sweep[static_cast<std::size_t>(rep.W)].total;

    auto& d = rep.diagnostics;
    d.density_mean = combine([](const PerturbationStats& s) { return s.density; });
    d.samples = stats[f][0].samples.size();
    d.replicas = opt.replicas;
    d.centered = opt.centered;
    d.adjoint_residual = *std::max_element(resid.begin(), resid.end());
    d.tail_bound = *std::max_element(tail.begin(), tail.end());
    d.max_condition = *std::max_element(cond.begin(), cond.end());
    d.lyapunov.assign(lyap[0].size(), 0.0);
    for (const auto& l : lyap)
      for (std::size_t i = 0; i < l.size(); ++i) d.lyapunov[i] += l[i] / static_cast<double>(nr);
    reports.push_back(std::move(rep));
  }
  return reports;
}

namespace {

struct TangentSeries {
  StepWindow samples;
  std::vector<double> values;  // -trace(Q_n^T C_n)
};

TangentSeries tangent_series(const SystemDef& sys, const Perturbation& X, const OrbitPipeline& p, int W,
                             bool centered, std::size_t margin) {
  const StepWindow S = sample_window(p, W);
  const int M = sys.dim;
  const int u = sys.udim;

  VectorSeries Y(S.begin, S.size(), M, "phi_W X");
  Vec Xn(M);
  for (std::size_t n = S.begin; n < S.end; ++n) {
    X.field(p.orbit[n], Xn);
    Y[n] = phi_window(p, n, W, centered) * Xn;
  }
  const ForwardShadow v = forward_shadow(sys, p.orbit, p.tangent, p.adjoint, Y, margin);

  // The recursion forgets its start at the stable rate; drop one margin.
  const std::size_t start = v.v.first();
  const std::size_t stop = v.v.end();
  if (stop <= start + margin + 2) throw ConfigError("tangent formula: window too short");

  TangentSeries out;
  out.samples = {start + margin, stop};
  out.values.reserve(out.samples.size());
  Mat C = Mat::Zero(M, u);
  Mat next(M, u);
  Vec col(M), h(M), tmp(M);
  for (std::size_t n = start; n + 1 < stop; ++n) {
    auto x = p.orbit[n];
    auto Q = p.tangent.Q[n];
    auto R = p.tangent.R[n];
    auto vn = v.v[n];
    Mat Cperp = C - Q * (Q.transpose() * C);
    Mat B(M, u);
    for (int i = 0; i < u; ++i) {
      sys.jvp(x, Cperp.col(i), col);
      sys.hvp(x, Q.col(i), vn, h);
      B.col(i) = col + h;
    }
    // next = B R^{-1}: solve R^T next^T = B^T.
    next = R.transpose().triangularView<Eigen::Lower>().solve(B.transpose()).transpose();
    auto x1 = p.orbit[n + 1];
    auto Q1 = p.tangent.Q[n + 1];
    const double phiw = phi_window(p, n + 1, W, centered);
    for (int i = 0; i < u; ++i) {
      X.derivative(x1, Q1.col(i), tmp);
      next.col(i) += phiw * tmp;
    }
    C = next;
    if (n + 1 >= out.samples.begin) out.values.push_back(-(Q1.transpose() * C).trace());
    if (!C.allFinite()) throw NumericalError("non-finite cube derivative", n + 1);
  }
  out.samples.end = out.samples.begin + out.values.size();
  return out;
}

}  // namespace

Estimate tangent_unstable_contribution(const SystemDef& sys, const Perturbation& X, const OrbitPipeline& p, int W,
                                       bool centered) {
  const std::size_t margin = p.interior.begin - p.window.begin;
  return batch_means(tangent_series(sys, X, p, W, centered, margin).values);
}

EquivalenceResult equivalence_check(const SystemDef& sys, const Perturbation& X, const OrbitPipeline& p, int W,
                                    bool centered) {
  const std::size_t margin = p.interior.begin - p.window.begin;
  const TangentSeries ts = tangent_series(sys, X, p, W, centered, margin);
  std::vector<double> adj(ts.values.size()), diff(ts.values.size());
  for (std::size_t n = ts.samples.begin; n < ts.samples.end; ++n) {
    const std::size_t i = n - ts.samples.begin;
    adj[i] = phi_window(p, n, W, centered) * unstable_density_ratio(X, p, n);
    diff[i] = ts.values[i] - adj[i];
  }
  EquivalenceResult res;
  res.tangent = batch_means(ts.values);
  res.adjoint = batch_means(adj);
  res.defect = std::abs(res.tangent.mean - res.adjoint.mean);
  res.combined_se = std::hypot(res.tangent.se, res.adjoint.se);
  res.paired_se = batch_means(diff).se;
  return res;
}

}  // namespace lresp
