#pragma once

#include "lresp/orbit.hpp"
#include "lresp/series.hpp"
#include "lresp/systems.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace lresp {

// Unstable frame along an orbit: f_* Q_n = Q_{n+1} R_n with orthonormal Q_n
// and upper-triangular R_n with positive diagonal.
struct TangentFrame {
  MatrixSeries Q;             // M x u, steps 0..N
  MatrixSeries R;             // u x u, steps 0..N-1
  std::vector<double> logJ;   // log det R_n = log |f_* e| at x_n
  std::size_t warmup = 0;     // leading steps flagged unconverged

  std::size_t steps() const { return R.size(); }
};

// Adjoint-unstable co-frame: A_{n+1} Df(x_n) = Rt_n A_n with orthonormal rows,
// and the dual co-basis Et_n = (A_n Q_n)^{-1} A_n so that Et_n Q_n = I.
struct AdjointFrame {
  MatrixSeries A;             // u x M, steps 0..N
  MatrixSeries Rt;            // u x u, steps 0..N-1 (lower triangular)
  MatrixSeries Et;            // u x M, steps 0..N
  std::size_t warmdown = 0;   // trailing steps flagged unconverged
  double max_condition = 0.0; // max |(A_n Q_n)^{-1}|_2 over the converged window
};

struct FrameOptions {
  std::uint64_t seed = 0;
  std::optional<std::size_t> warmup;  // default max(100, 20 / lambda)
};

TangentFrame push_unstable(const SystemDef& sys, const OrbitData& orbit, const FrameOptions& opt = {});

AdjointFrame pull_adjoint(const SystemDef& sys, const OrbitData& orbit, const TangentFrame& tangent,
                          const FrameOptions& opt = {});

// Steps where both frames are converged: [warmup, N - warmdown].
StepWindow converged_window(const TangentFrame& tangent, const AdjointFrame& adjoint);

// Oblique splitting v = v_u + v_s with v_u = Q_n (Et_n v).
std::pair<Vec, Vec> project(const TangentFrame& tangent, const AdjointFrame& adjoint, std::size_t n, CRef v);

// Time averages of log diag R over the converged part of the forward frame.
std::vector<double> lyapunov_exponents(const TangentFrame& tangent);

// Largest principal angle between the column spans of two M x u bases.
double subspace_distance(const Mat& a, const Mat& b);

// Thin QR with the sign convention diag(R) > 0.
std::pair<Mat, Mat> positive_qr(const Mat& v);

}  // namespace lresp
