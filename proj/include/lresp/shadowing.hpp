#pragma once

#include "lresp/frames.hpp"
#include "lresp/orbit.hpp"
#include "lresp/series.hpp"
#include "lresp/systems.hpp"

namespace lresp {

constexpr std::size_t kDefaultMargin = 200;

struct AdjointShadow {
  CovectorSeries nu;          // on the input window shrunk by the margin
  double residual = 0.0;      // max |nu_m - f^* nu_{m+1} - omega_m| over the interior
  double tail_bound = 0.0;    // homogeneous decay over one margin times max |nu|
};

struct ForwardShadow {
  VectorSeries v;
  double residual = 0.0;      // max |v_{m+1} - f_* v_m - Y_{m+1}| over the interior
  double tail_bound = 0.0;
};

// nu = S(omega): the bounded solution of nu_m = f^* nu_{m+1} + omega_m, built
// as a stable part swept backward with re-projection and an unstable part
// carried forward as u coefficients on the dual co-basis.
AdjointShadow adjoint_shadow(const SystemDef& sys, const OrbitData& orbit, const TangentFrame& tangent,
                             const AdjointFrame& adjoint, const CovectorSeries& omega,
                             std::size_t margin = kDefaultMargin);

// v = S(Y): the bounded solution of v_{m+1} = f_* v_m + Y_{m+1}. Dual to
// adjoint_shadow under the orbit average: rho(omega . S(Y)) = rho(S(omega) . Y).
ForwardShadow forward_shadow(const SystemDef& sys, const OrbitData& orbit, const TangentFrame& tangent,
                             const AdjointFrame& adjoint, const VectorSeries& Y,
                             std::size_t margin = kDefaultMargin);

}  // namespace lresp
