#pragma once

#include "lresp/frames.hpp"
#include "lresp/orbit.hpp"
#include "lresp/series.hpp"
#include "lresp/systems.hpp"

#include <cstdint>

namespace lresp {

// Equivariant divergence eps nabla_e X at x_n: trace(Et_n G Q_n), G = nabla X.
double div_v_X(const Perturbation& X, const OrbitData& orbit, const TangentFrame& tangent,
               const AdjointFrame& adjoint, std::size_t n);

// The covector Y -> eps_1 (nabla_e f_*) Y / |f_* e| at x_n, assembled on the
// coordinate basis: omega(Y) = trace(R_n^{-1} Et_{n+1} H(Y)) with
// H(Y) = [hvp(x_n, q_i, Y)]_i. Needs n + 1 <= N.
Vec div_v_fstar(const SystemDef& sys, const OrbitData& orbit, const TangentFrame& tangent,
                const AdjointFrame& adjoint, std::size_t n);

CovectorSeries div_v_fstar_series(const SystemDef& sys, const OrbitData& orbit, const TangentFrame& tangent,
                                  const AdjointFrame& adjoint, StepWindow window);

// dPhi at each step of the window.
CovectorSeries dobs_series(const SystemDef& sys, const OrbitData& orbit, StepWindow window);

enum class WedgeMode { DivX, DivFstar };

struct WedgeResult {
  double scalar = 0.0;   // DivX
  Vec covector;          // DivFstar
};

// Independent evaluation of the same contractions by explicit determinant
// expansion over randomly sheared bases of span(Q_n) and of the adjoint
// row-space span(A_n). Limited to M <= 6, u <= 3.
WedgeResult wedge_oracle(const SystemDef& sys, const Perturbation& X, const OrbitData& orbit,
                         const TangentFrame& tangent, const AdjointFrame& adjoint, std::size_t n, WedgeMode mode,
                         std::uint64_t seed);

// Leibniz-expansion determinant (for small matrices).
double brute_det(const Mat& m);

}  // namespace lresp
