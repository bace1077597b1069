#pragma once

#include "lresp/frames.hpp"
#include "lresp/orbit.hpp"
#include "lresp/series.hpp"
#include "lresp/shadowing.hpp"
#include "lresp/stats.hpp"
#include "lresp/systems.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lresp {

struct ResponseOptions {
  std::size_t steps = 100000;
  std::size_t spinup = 1000;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> frame_seed;  // default derived from seed
  int replicas = 1;
  std::size_t margin = kDefaultMargin;
  int w_max = 32;
  std::optional<int> w;                     // fixed W instead of plateau detection
  bool centered = true;                     // subtract the orbit mean of Phi inside phi_W
  int threads = 1;
};

// Everything along one orbit that does not depend on the perturbation.
struct OrbitPipeline {
  OrbitData orbit;
  TangentFrame tangent;
  AdjointFrame adjoint;
  StepWindow window;       // converged frames
  StepWindow interior;     // window shrunk by the shadowing margin
  AdjointShadow nu_div;    // S(div^v f_*)
  AdjointShadow nu_obs;    // S(dPhi)
  std::vector<double> phi; // Phi(x_n), n = 0..N
  double phi_mean = 0.0;
  // Running sums of Phi - phi_mean, forward and reversed, padded for the W sweep.
  std::vector<double> phi_sums;
  std::vector<double> phi_sums_rev;
};

// Seeds of replica r, derived deterministically from the base seed.
std::uint64_t replica_seed(std::uint64_t seed, int replica);

OrbitPipeline prepare_pipeline(const SystemDef& sys, const ResponseOptions& opt, int replica = 0);

// delta L^u sigma / sigma at x_n = -(div^v X + <nu_n, X(x_n)>).
double unstable_density_ratio(const Perturbation& X, const OrbitPipeline& p, std::size_t n);
double unstable_density_ratio(const Perturbation& X, const OrbitData& orbit, const TangentFrame& tangent,
                              const AdjointFrame& adjoint, const CovectorSeries& nu, std::size_t n);

// Per-orbit statistics of one perturbation, over the steps of `samples`.
struct PerturbationStats {
  Estimate sc;
  std::vector<Estimate> uc;     // index W = 0..w_max
  std::vector<Estimate> total;  // sc + uc(W), from the summed per-step series
  Estimate density;             // mean of delta L^u sigma / sigma
  StepWindow samples;
};

// phi_W(x_n) = sum_{|m| <= W} (Phi(x_{n+m}) - c), c = orbit mean or 0.
double phi_window(const OrbitPipeline& p, std::size_t n, int W, bool centered);

// Steps where the W sweep can be evaluated: interior steps n with n +- w_max on the orbit.
StepWindow sample_window(const OrbitPipeline& p, int w_max);

PerturbationStats evaluate_perturbation(const Perturbation& X, const OrbitPipeline& p, int w_max, bool centered);

// S.C. = rho(<S(dPhi), X>).
Estimate shadowing_contribution(const Perturbation& X, const OrbitPipeline& p);

// U.C.(W) for W = 0..w_max.
std::vector<Estimate> unstable_contribution(const Perturbation& X, const OrbitPipeline& p, int w_max,
                                            bool centered = true);

struct SweepRow {
  int W = 0;
  Estimate uc;
  Estimate total;
};

struct ResponseDiagnostics {
  std::vector<double> lyapunov;
  double adjoint_residual = 0.0;  // max over both shadows and all replicas
  double tail_bound = 0.0;
  double max_condition = 0.0;
  Estimate density_mean;
  std::size_t samples = 0;        // per replica
  int replicas = 0;
  bool centered = true;
  bool plateau = false;
};

struct ResponseReport {
  std::string system;
  nlohmann::json params;
  std::string perturbation;
  std::string observable;
  Estimate sc;
  Estimate uc;
  Estimate total;
  int W = 0;
  std::vector<SweepRow> sweep;
  ResponseDiagnostics diagnostics;
};

// Smallest W whose next two increments are within one standard error of U.C.(W);
// returns nullopt when the sweep never flattens.
std::optional<int> detect_plateau(const std::vector<Estimate>& uc);

// Full pipeline for the system's perturbation and any extra fields, which
// reuse the same frames and adjoint shadows.
std::vector<ResponseReport> linear_response(const SystemDef& sys, const ResponseOptions& opt,
                                            const std::vector<Perturbation>& extra = {});

// Appendix-style tangent evaluation of U.C. at a fixed W: carries the cube
// derivative as an M x u matrix C_n against the frame Q_n,
//   C_{n+1} = f_* (C_n - Q_n Q_n^T C_n) R_n^{-1} + H_n R_n^{-1} + phi_W(x_{n+1}) (nabla X) Q_{n+1},
// H_n = [hvp(x_n, q_i, v_n)], v = S(phi_W X); U.C. = -rho(trace(Q^T C)).
Estimate tangent_unstable_contribution(const SystemDef& sys, const Perturbation& X, const OrbitPipeline& p, int W,
                                       bool centered = true);

struct EquivalenceResult {
  Estimate tangent;
  Estimate adjoint;
  double defect = 0.0;
  double combined_se = 0.0;  // quadrature of the two errors
  double paired_se = 0.0;    // batch means of the per-step difference
};

EquivalenceResult equivalence_check(const SystemDef& sys, const Perturbation& X, const OrbitPipeline& p, int W,
                                    bool centered = true);

}  // namespace lresp
