#include "lresp/error.hpp"
#include "lresp/frames.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace lresp {
namespace {

const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

Vec unstable_eigenvector() {
  Vec v(2);
  v << kGolden, 1.0;
  return v.normalized();
}

Vec stable_eigenvector() {
  Vec v(2);
  v << 1.0, -kGolden;
  return v.normalized();
}

TEST(Frames, CatMapFrameIsTheEigenvector) {
  auto sys = make_builtin("catmap", {{"kappa", 0.0}});
  auto f = testing::make_frames(sys, 2000, 1);
  const Vec e = unstable_eigenvector();
  const Vec s = stable_eigenvector();
  for (std::size_t n = f.window.begin; n < f.window.end; n += 37) {
    EXPECT_LT((Vec(f.tangent.Q[n].col(0)) - e).norm(), 1e-12);
    // A is symmetric, so the left unstable eigenvector is e as well.
    EXPECT_LT(std::abs(std::abs(f.adjoint.A[n].row(0).dot(e)) - 1.0), 1e-12);
    EXPECT_NEAR((f.adjoint.Et[n] * f.tangent.Q[n])(0, 0), 1.0, 1e-14);
    EXPECT_LT(std::abs((f.adjoint.Et[n] * s)(0)), 1e-8);
  }
}

TEST(Frames, ScalarCase) {
  auto sys = make_builtin("sawtooth", {{"a", 0.1}});
  auto f = testing::make_frames(sys, 500, 2);
  for (std::size_t n = 0; n < 500; ++n) {
    const double fp = 2.0 + 2.0 * M_PI * 0.1 * std::cos(2.0 * M_PI * f.orbit[n][0]);
    EXPECT_DOUBLE_EQ(f.tangent.Q[n](0, 0), 1.0);
    EXPECT_NEAR(f.tangent.R[n](0, 0), fp, 1e-14);
    EXPECT_NEAR(f.tangent.logJ[n], std::log(fp), 1e-14);
    EXPECT_DOUBLE_EQ(f.adjoint.A[n](0, 0), 1.0);
    EXPECT_DOUBLE_EQ(f.adjoint.Et[n](0, 0), 1.0);
  }
}

TEST(Frames, Projection) {
  auto sys = make_builtin("catmap", {{"kappa", 0.0}});
  auto f = testing::make_frames(sys, 1000, 3);
  const std::size_t n = f.window.begin + 10;
  Vec q = f.tangent.Q[n].col(0);
  auto [qu, qs] = project(f.tangent, f.adjoint, n, 2.5 * q);
  EXPECT_LT((qu - 2.5 * q).norm(), 1e-14);
  EXPECT_LT(qs.norm(), 1e-14);
  auto [su, ss] = project(f.tangent, f.adjoint, n, stable_eigenvector());
  EXPECT_LT(su.norm(), 1e-8);
  EXPECT_LT((ss - stable_eigenvector()).norm(), 1e-8);
}

TEST(Frames, ProjectionCommutesWithPushforward) {
  for (const auto& c : testing::nonlinear_builtins()) {
    SCOPED_TRACE(c.name);
    auto sys = make_builtin(c.name, c.params);
    auto f = testing::make_frames(sys, 3000, 4);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (std::size_t n = f.window.begin; n + 1 < f.window.end; n += 11) {
      Vec v(sys.dim);
      for (int i = 0; i < sys.dim; ++i) v[i] = g(rng);
      auto [vu, vs] = project(f.tangent, f.adjoint, n, v);
      Vec pushed_then = project(f.tangent, f.adjoint, n + 1, sys.push(f.orbit[n], v)).first;
      Vec then_pushed = sys.push(f.orbit[n], vu);
      worst = std::max(worst, (pushed_then - then_pushed).norm() / std::max(1.0, v.norm()));
    }
    EXPECT_LT(worst, 1e-6);
  }
}

TEST(Frames, FrameIsEquivariantAndSeedIndependent) {
  for (const auto& c : testing::nonlinear_builtins()) {
    SCOPED_TRACE(c.name);
    auto sys = make_builtin(c.name, c.params);
    auto a = testing::make_frames(sys, 3000, 5, 11);
    auto b = testing::make_frames(sys, 3000, 5, 99);
    const std::size_t lo = std::max(a.window.begin, b.window.begin);
    const std::size_t hi = std::min(a.window.end, b.window.end);
    ASSERT_LT(lo + 10, hi);
    double equi = 0.0;
    double seed_q = 0.0;
    double seed_a = 0.0;
    for (std::size_t n = lo; n + 1 < hi; n += 7) {
      Mat pushed(sys.dim, sys.udim);
      for (int i = 0; i < sys.udim; ++i) pushed.col(i) = sys.push(a.orbit[n], a.tangent.Q[n].col(i));
      equi = std::max(equi, subspace_distance(pushed, a.tangent.Q[n + 1]));
      seed_q = std::max(seed_q, subspace_distance(a.tangent.Q[n], b.tangent.Q[n]));
      seed_a = std::max(seed_a, subspace_distance(a.adjoint.A[n].transpose(), b.adjoint.A[n].transpose()));
    }
    EXPECT_LT(equi, 1e-9);
    EXPECT_LT(seed_q, 1e-8);
    EXPECT_LT(seed_a, 1e-8);
  }
}

TEST(Frames, DualCobasisIdentity) {
  // Et_{n+1} Df(x_n) = R_n Et_n on the converged window.
  auto sys = make_builtin("coupledcat", {{"k", 3}, {"coupling", 0.05}, {"kappa", 0.03}});
  auto f = testing::make_frames(sys, 2000, 6);
  double worst = 0.0;
  for (std::size_t n = f.window.begin; n + 1 < f.window.end; n += 13) {
    Mat lhs = f.adjoint.Et[n + 1] * sys.jacobian(f.orbit[n]);
    Mat rhs = f.tangent.R[n] * f.adjoint.Et[n];
    worst = std::max(worst, (lhs - rhs).norm() / rhs.norm());
    EXPECT_LT((f.adjoint.Et[n] * f.tangent.Q[n] - Mat::Identity(3, 3)).norm(), 1e-12);
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Frames, LyapunovExponents) {
  auto cat = make_builtin("catmap", {{"kappa", 0.0}});
  auto f = testing::make_frames(cat, 100000, 7);
  EXPECT_NEAR(lyapunov_exponents(f.tangent)[0], std::log((3.0 + std::sqrt(5.0)) / 2.0), 1e-3);

  auto dbl = make_builtin("sawtooth", {{"a", 0.0}});
  auto g = testing::make_frames(dbl, 1000, 7);
  EXPECT_NEAR(lyapunov_exponents(g.tangent)[0], std::log(2.0), 1e-14);

  auto two = make_builtin("coupledcat", {{"k", 2}, {"coupling", 0.0}, {"kappa", 0.0}});
  auto h = testing::make_frames(two, 20000, 7);
  auto ly = lyapunov_exponents(h.tangent);
  ASSERT_EQ(ly.size(), 2u);
  EXPECT_NEAR(ly[0], std::log((3.0 + std::sqrt(5.0)) / 2.0), 1e-3);
  EXPECT_NEAR(ly[1], std::log((3.0 + std::sqrt(5.0)) / 2.0), 1e-3);
  double mean_logj = 0.0;
  for (std::size_t n = h.window.begin; n < h.window.end; ++n) mean_logj += h.tangent.logJ[n];
  mean_logj /= static_cast<double>(h.window.size());
  EXPECT_NEAR(mean_logj, 2.0 * std::log((3.0 + std::sqrt(5.0)) / 2.0), 1e-3);
}

TEST(Frames, PositiveQr) {
  Mat v(3, 2);
  v << 1, 2, -3, 4, 5, -6;
  auto [q, r] = positive_qr(v);
  EXPECT_LT((q * r - v).norm(), 1e-13);
  EXPECT_LT((q.transpose() * q - Mat::Identity(2, 2)).norm(), 1e-14);
  EXPECT_GT(r(0, 0), 0.0);
  EXPECT_GT(r(1, 1), 0.0);
  EXPECT_EQ(r(1, 0), 0.0);
}

TEST(Frames, RankCollapseAborts) {
  auto sys = make_builtin("catmap", {{"kappa", 0.0}});
  sys.jvp = [](CRef, CRef v, Out y) {
    y[0] = v[0];
    y[1] = v[0];
  };
  sys.udim = 2;
  auto o = generate_orbit(sys, {.spinup = 10, .steps = 200, .seed = 1, .gamma = 0.0, .x_init = {}});
  EXPECT_THROW(push_unstable(sys, o), NumericalError);
}

}  // namespace
}  // namespace lresp
