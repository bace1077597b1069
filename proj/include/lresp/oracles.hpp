#pragma once

#include "lresp/frames.hpp"
#include "lresp/orbit.hpp"
#include "lresp/series.hpp"
#include "lresp/stats.hpp"
#include "lresp/systems.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace lresp {

// ---------------------------------------------------------------------------
// Central finite difference of long-run averages.

struct FdOptions {
  double dgamma = 1e-3;
  std::size_t steps = 100000;
  std::size_t spinup = 1000;
  int pairs = 8;
  std::uint64_t seed = 1;
  bool richardson = false;  // also evaluate at 2 dgamma
  int threads = 1;
};

struct FdResult {
  Estimate value;                     // at dgamma
  std::optional<Estimate> coarse;     // at 2 dgamma
  std::optional<double> extrapolated; // (4 D(h) - D(2h)) / 3
};

// Each pair starts both parameter values from the same seeded point. With one
// pair the error comes from batch means of the per-step difference.
FdResult fd_response(const SystemDef& sys, const FdOptions& opt);

// ---------------------------------------------------------------------------
// Truncated ensemble sum: term m = rho(dPhi(x_{n+m}) f_*^m X(x_n)).

struct EnsembleTerm {
  int m = 0;
  Estimate term;
  double magnitude = 0.0;  // rms of the integrand
  double partial = 0.0;    // sum of terms up to m
};

std::vector<EnsembleTerm> ensemble_response(const SystemDef& sys, const OrbitData& orbit, int horizon);

// ---------------------------------------------------------------------------
// Truncated-sum evaluation of delta L^u sigma / sigma:
//   -value = div^v X - sum_{k=1..T} omega_{m-k} f_*^{-k} X^u + sum_{k=0..T} omega_{m+k} f_*^k X^s.

struct ScalarSeries {
  std::size_t first = 0;
  std::vector<double> values;

  std::size_t end() const { return first + values.size(); }
  double at(std::size_t n) const { return values.at(n - first); }
};

ScalarSeries expanded_divergence(const SystemDef& sys, const Perturbation& X, const OrbitData& orbit,
                                 const TangentFrame& tangent, const AdjointFrame& adjoint, const CovectorSeries& omega,
                                 int T);

// ---------------------------------------------------------------------------
// Relative decay of pushed-forward cube derivatives with stable replaced columns.

struct DecayResult {
  std::vector<int> lengths;
  std::vector<double> gap;  // geometric mean over probes
  double slope = 0.0;       // fitted d log(gap) / dN
};

DecayResult decay_check(const SystemDef& sys, const OrbitData& orbit, const TangentFrame& tangent,
                        const AdjointFrame& adjoint, int n_probe, int max_length, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Zeroth-order element error on the measure uniform on {0}^{M-a} x T^a,
// T = [-1/2, 1/2], against cells of side b centred on the attractor.

struct ScalingRow {
  double b = 0.0;
  double error = 0.0;
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  double slope = 0.0;  // fit of log|E| against log b (nan if all errors vanish)
};

ScalingResult ulam_error_scaling(int a_dim, int m_dim, const std::vector<double>& widths,
                                 const std::function<double(CRef)>& obs);

}  // namespace lresp
