#include "lresp/divergence.hpp"
#include "lresp/error.hpp"
#include "lresp/shadowing.hpp"
#include "lresp/stats.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace lresp {
namespace {

VectorSeries field_series(const SystemDef& sys, const testing::Frames& f) {
  VectorSeries Y(f.window.begin, f.window.size(), sys.dim, "X");
  Vec x(sys.dim);
  for (std::size_t n = f.window.begin; n < f.window.end; ++n) {
    sys.perturbation.field(f.orbit[n], x);
    Y[n] = x;
  }
  return Y;
}

TEST(Shadowing, ZeroInputGivesZero) {
  auto sys = make_builtin("solenoid");
  auto f = testing::make_frames(sys, 1500, 1);
  CovectorSeries omega(f.window.begin, f.window.size(), sys.dim);
  VectorSeries Y(f.window.begin, f.window.size(), sys.dim);
  auto nu = adjoint_shadow(sys, f.orbit, f.tangent, f.adjoint, omega);
  auto v = forward_shadow(sys, f.orbit, f.tangent, f.adjoint, Y);
  EXPECT_EQ(nu.nu.values().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(v.v.values().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Shadowing, CatMapConstantInputsSumGeometricSeries) {
  // With A symmetric both bounded solutions are (I - A)^{-1} applied to the constant input.
  auto sys = make_builtin("catmap", {{"kappa", 0.0}});
  auto f = testing::make_frames(sys, 1500, 2);
  Mat A(2, 2);
  A << 2, 1, 1, 1;
  Vec c(2);
  c << 0.7, -1.3;
  const Vec expected = (Mat::Identity(2, 2) - A).inverse() * c;

  CovectorSeries omega(f.window.begin, f.window.size(), 2);
  VectorSeries Y(f.window.begin, f.window.size(), 2);
  for (std::size_t n = f.window.begin; n < f.window.end; ++n) {
    omega[n] = c;
    Y[n] = c;
  }
  auto nu = adjoint_shadow(sys, f.orbit, f.tangent, f.adjoint, omega);
  auto v = forward_shadow(sys, f.orbit, f.tangent, f.adjoint, Y);
  for (std::size_t n = nu.nu.first(); n < nu.nu.end(); n += 13) {
    EXPECT_LT((Vec(nu.nu[n]) - expected).norm(), 1e-10);
    EXPECT_LT((Vec(v.v[n]) - expected).norm(), 1e-10);
  }
}

TEST(Shadowing, DefiningEquationsHoldOnBuiltins) {
  for (const auto& c : testing::nonlinear_builtins()) {
    SCOPED_TRACE(c.name);
    auto sys = make_builtin(c.name, c.params);
    auto f = testing::make_frames(sys, 4000, 3);
    auto omega = div_v_fstar_series(sys, f.orbit, f.tangent, f.adjoint, f.window);
    auto nu = adjoint_shadow(sys, f.orbit, f.tangent, f.adjoint, omega);
    auto v = forward_shadow(sys, f.orbit, f.tangent, f.adjoint, field_series(sys, f));
    EXPECT_LT(nu.residual, 1e-8);
    EXPECT_LT(v.residual, 1e-8);
    EXPECT_LT(nu.tail_bound, 1e-12);
    EXPECT_LT(v.tail_bound, 1e-12);
    EXPECT_EQ(nu.nu.first(), f.window.begin + kDefaultMargin);
    EXPECT_EQ(nu.nu.end(), f.window.end - kDefaultMargin);
  }
}

TEST(Shadowing, ForwardAndAdjointAreDual) {
  for (const auto& c : testing::nonlinear_builtins()) {
    SCOPED_TRACE(c.name);
    auto sys = make_builtin(c.name, c.params);
    auto f = testing::make_frames(sys, 20000, 4);
    auto omega = dobs_series(sys, f.orbit, f.window);
    auto Y = field_series(sys, f);
    auto nu = adjoint_shadow(sys, f.orbit, f.tangent, f.adjoint, omega);
    auto v = forward_shadow(sys, f.orbit, f.tangent, f.adjoint, Y);
    std::vector<double> lhs, rhs;
    for (std::size_t n = nu.nu.first(); n < nu.nu.end(); ++n) {
      lhs.push_back(omega[n].dot(v.v[n]));
      rhs.push_back(nu.nu[n].dot(Y[n]));
    }
    auto a = batch_means(lhs);
    auto b = batch_means(rhs);
    EXPECT_LT(std::abs(a.mean - b.mean), 3.0 * std::hypot(a.se, b.se));
  }
}

TEST(Shadowing, RejectsShortWindows) {
  auto sys = make_builtin("sawtooth");
  auto f = testing::make_frames(sys, 1000, 5);
  CovectorSeries omega(f.window.begin, 300, 1);
  EXPECT_THROW(adjoint_shadow(sys, f.orbit, f.tangent, f.adjoint, omega, 150), ConfigError);
  EXPECT_THROW(adjoint_shadow(sys, f.orbit, f.tangent, f.adjoint, omega, 0), ConfigError);
  EXPECT_NO_THROW(adjoint_shadow(sys, f.orbit, f.tangent, f.adjoint, omega, 100));
}

}  // namespace
}  // namespace lresp
