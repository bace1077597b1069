#include "lresp/frames.hpp"

#include "lresp/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lresp {

namespace {

constexpr double kRankFloor = 1e-13;
constexpr double kMaxCondition = 1e8;
constexpr std::size_t kMinWarmup = 100;

Mat random_gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = g(rng);
  return m;
}

// max(100, 20 / lambda) with lambda the slowest average log growth.
std::size_t default_warmup(const std::vector<double>& mean_logs) {
  double lam = *std::min_element(mean_logs.begin(), mean_logs.end());
  if (!(lam > 0.0)) return kMinWarmup;
  return std::max(kMinWarmup, static_cast<std::size_t>(std::ceil(20.0 / lam)));
}

}  // namespace

std::pair<Mat, Mat> positive_qr(const Mat& v) {
  const Eigen::Index m = v.rows();
  const Eigen::Index k = v.cols();
  if (k == 1) {
    const double r = v.norm();
    return {v / r, Mat::Constant(1, 1, r)};
  }
  Eigen::HouseholderQR<Mat> qr(v);
  Mat Q = qr.householderQ() * Mat::Identity(m, k);
  Mat R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < k; ++i) {
    if (R(i, i) < 0.0) {
      R.row(i) *= -1.0;
      Q.col(i) *= -1.0;
    }
  }
  return {Q, R};
}

TangentFrame push_unstable(const SystemDef& sys, const OrbitData& orbit, const FrameOptions& opt) {
  const int M = sys.dim;
  const int u = sys.udim;
  const std::size_t N = orbit.steps();
  if (N < 1) throw ConfigError("push_unstable: orbit too short");

  TangentFrame tf;
  tf.Q = MatrixSeries(M, u, N + 1);
  tf.R = MatrixSeries(u, u, N);
  tf.logJ.assign(N, 0.0);

  tf.Q[0] = positive_qr(random_gaussian(M, u, opt.seed)).first;
  std::vector<double> sum_logs(static_cast<std::size_t>(u), 0.0);
  Mat V(M, u);
  for (std::size_t n = 0; n < N; ++n) {
    auto x = orbit[n];
    auto Qn = tf.Q[n];
    for (int i = 0; i < u; ++i) {
      auto col = V.col(i);
      sys.jvp(x, Qn.col(i), col);
    }
    auto [Q, R] = positive_qr(V);
    double lj = 0.0;
    for (int i = 0; i < u; ++i) {
      if (!(R(i, i) > kRankFloor)) throw NumericalError("rank collapse in forward QR (udim too large?)", n);
      double l = std::log(R(i, i));
      lj += l;
      sum_logs[static_cast<std::size_t>(i)] += l;
    }
    tf.Q[n + 1] = Q;
    tf.R[n] = R;
    tf.logJ[n] = lj;
  }
  for (auto& s : sum_logs) s /= static_cast<double>(N);
  tf.warmup = opt.warmup ? *opt.warmup : default_warmup(sum_logs);
  return tf;
}

AdjointFrame pull_adjoint(const SystemDef& sys, const OrbitData& orbit, const TangentFrame& tangent,
                          const FrameOptions& opt) {
  const int M = sys.dim;
  const int u = sys.udim;
  const std::size_t N = orbit.steps();
  if (tangent.Q.size() != N + 1) throw ConfigError("pull_adjoint: frame does not match orbit");

  AdjointFrame af;
  af.A = MatrixSeries(u, M, N + 1);
  af.Rt = MatrixSeries(u, u, N);
  af.Et = MatrixSeries(u, M, N + 1);

  af.A[N] = positive_qr(random_gaussian(M, u, opt.seed ^ 0x9e3779b97f4a7c15ULL)).first.transpose();
  std::vector<double> sum_logs(static_cast<std::size_t>(u), 0.0);
  Mat Bt(M, u);
  Vec row(M);
  for (std::size_t k = N; k-- > 0;) {
    auto x = orbit[k];
    auto Anext = af.A[k + 1];
    for (int i = 0; i < u; ++i) {
      row = Anext.row(i).transpose();
      auto col = Bt.col(i);
      sys.vjp(x, row, col);
    }
    auto [Q, R] = positive_qr(Bt);
    for (int i = 0; i < u; ++i) {
      if (!(R(i, i) > kRankFloor)) throw NumericalError("rank collapse in adjoint QR", k);
      sum_logs[static_cast<std::size_t>(i)] += std::log(R(i, i));
    }
    af.A[k] = Q.transpose();
    af.Rt[k] = R.transpose();
  }
  for (auto& s : sum_logs) s /= static_cast<double>(N);
  af.warmdown = opt.warmup ? *opt.warmup : default_warmup(sum_logs);

  const StepWindow window = converged_window(tangent, af);
  for (std::size_t n = 0; n <= N; ++n) {
    Mat AQ = af.A[n] * tangent.Q[n];
    if (u == 1) {
      // Scalar case: AQ is the cosine of the angle between the frames.
      if (window.contains(n)) {
        const double cond = 1.0 / std::abs(AQ(0, 0));
        af.max_condition = std::max(af.max_condition, cond);
        if (!(cond <= kMaxCondition))
          throw NumericalError("stable and unstable subspaces nearly tangent (|(A Q)^{-1}| > 1e8)", n);
      }
      af.Et[n] = af.A[n] / AQ(0, 0);
      continue;
    }
    if (window.contains(n)) {
      Eigen::JacobiSVD<Mat> svd(AQ);
      const auto& s = svd.singularValues();
      // A and Q have orthonormal rows/columns, so 1 / sigma_min bounds the oblique projector.
      double cond = s(s.size() - 1) > 0.0 ? 1.0 / s(s.size() - 1) : INFINITY;
      af.max_condition = std::max(af.max_condition, cond);
      if (!(cond <= kMaxCondition))
        throw NumericalError("stable and unstable subspaces nearly tangent (|(A Q)^{-1}| > 1e8)", n);
    }
    af.Et[n] = AQ.partialPivLu().solve(Mat(af.A[n]));
  }
  return af;
}

StepWindow converged_window(const TangentFrame& tangent, const AdjointFrame& adjoint) {
  const std::size_t N = tangent.steps();
  if (tangent.warmup + adjoint.warmdown >= N) return {0, 0};
  return {tangent.warmup, N - adjoint.warmdown};
}

std::pair<Vec, Vec> project(const TangentFrame& tangent, const AdjointFrame& adjoint, std::size_t n, CRef v) {
  Vec vu = tangent.Q[n] * (adjoint.Et[n] * v);
  Vec vs = v - vu;
  return {vu, vs};
}

std::vector<double> lyapunov_exponents(const TangentFrame& tangent) {
  const std::size_t N = tangent.steps();
  const auto u = static_cast<std::size_t>(tangent.R.rows());
  std::vector<double> out(u, 0.0);
  const std::size_t start = std::min(tangent.warmup, N > 0 ? N - 1 : 0);
  for (std::size_t n = start; n < N; ++n) {
    auto R = tangent.R[n];
    for (std::size_t i = 0; i < u; ++i) out[i] += std::log(R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
  }
  for (auto& o : out) o /= static_cast<double>(N - start);
  return out;
}

double subspace_distance(const Mat& a, const Mat& b) {
  Mat qa = positive_qr(a).first;
  Mat qb = positive_qr(b).first;
  Mat resid = qb - qa * (qa.transpose() * qb);
  Eigen::JacobiSVD<Mat> svd(resid);
  return svd.singularValues()(0);
}

}  // namespace lresp
