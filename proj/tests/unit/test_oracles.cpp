#include "lresp/divergence.hpp"
#include "lresp/error.hpp"
#include "lresp/oracles.hpp"
#include "lresp/response.hpp"
#include "lresp/shadowing.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace lresp {
namespace {

const double kLambdaU = (3.0 + std::sqrt(5.0)) / 2.0;

TEST(FiniteDifference, ParameterFreeMapGivesExactZero) {
  auto sys = make_builtin("solenoid", {{"pert", "zero"}});
  FdOptions o;
  o.steps = 2000;
  o.pairs = 2;
  o.richardson = true;
  auto r = fd_response(sys, o);
  EXPECT_EQ(r.value.mean, 0.0);
  ASSERT_TRUE(r.coarse && r.extrapolated);
  EXPECT_EQ(*r.extrapolated, 0.0);
}

TEST(FiniteDifference, DoublingMapShiftGivesZero) {
  auto sys = make_builtin("sawtooth", {{"a", 0.0}});
  FdOptions o;
  o.dgamma = 0.02;
  o.steps = 200000;
  o.pairs = 4;
  auto r = fd_response(sys, o);
  EXPECT_GT(r.value.se, 0.0);
  EXPECT_LT(std::abs(r.value.mean), 3.0 * r.value.se);
}

TEST(FiniteDifference, SinglePairUsesBatchMeans) {
  auto sys = make_builtin("sawtooth", {{"a", 0.1}});
  FdOptions o;
  o.dgamma = 0.05;
  o.steps = 50000;
  o.pairs = 1;
  auto r = fd_response(sys, o);
  EXPECT_GT(r.value.se, 0.0);
  EXPECT_TRUE(std::isfinite(r.value.mean));
}

TEST(FiniteDifference, Errors) {
  auto sys = make_builtin("sawtooth");
  FdOptions o;
  o.dgamma = 0.0;
  EXPECT_THROW(fd_response(sys, o), ConfigError);
  o.dgamma = 0.01;
  o.steps = 100;
  sys.map = [](CRef x, double g, Out y) { y[0] = g > 0.0 ? std::numeric_limits<double>::quiet_NaN() : x[0]; };
  EXPECT_THROW(fd_response(sys, o), NumericalError);
}

TEST(Ensemble, ZeroFieldGivesZeroTerms) {
  auto sys = make_builtin("catmap", {{"pert", "zero"}});
  auto o = generate_orbit(sys, {.spinup = 10, .steps = 1000, .seed = 1, .gamma = 0.0, .x_init = {}});
  for (const auto& t : ensemble_response(sys, o, 5)) EXPECT_EQ(t.term.mean, 0.0);
}

TEST(Ensemble, CatMapTermsGrowAtTheUnstableRate) {
  auto sys = make_builtin("catmap", {{"kappa", 0.0}, {"pert", "dilate"}});
  auto o = generate_orbit(sys, {.spinup = 100, .steps = 20000, .seed = 2, .gamma = 0.0, .x_init = {}});
  auto terms = ensemble_response(sys, o, 10);
  ASSERT_EQ(terms.size(), 11u);
  for (int m = 6; m < 10; ++m) EXPECT_NEAR(terms[m + 1].magnitude / terms[m].magnitude, kLambdaU, 0.01 * kLambdaU);
  EXPECT_EQ(terms[3].partial, terms[0].term.mean + terms[1].term.mean + terms[2].term.mean + terms[3].term.mean);
}

TEST(Ensemble, DoublingMapTermsVanish) {
  auto sys = make_builtin("sawtooth", {{"a", 0.0}});
  auto o = generate_orbit(sys, {.spinup = 100, .steps = 100000, .seed = 3, .gamma = 0.0, .x_init = {}});
  auto terms = ensemble_response(sys, o, 4);
  EXPECT_LT(std::abs(terms[0].term.mean), 3.0 * terms[0].term.se);
}

TEST(Expanded, MatchesShadowedDensityRatio) {
  for (const auto& c : {testing::Case{"sawtooth", {{"a", 0.1}}}, testing::Case{"solenoid", {}},
                        testing::Case{"catmap", {{"kappa", 0.0}, {"pert", "dilate"}}}}) {
    SCOPED_TRACE(c.name);
    auto sys = make_builtin(c.name, c.params);
    auto f = testing::make_frames(sys, 3000, 4);
    auto omega = div_v_fstar_series(sys, f.orbit, f.tangent, f.adjoint, f.window);
    auto nu = adjoint_shadow(sys, f.orbit, f.tangent, f.adjoint, omega);
    auto ex = expanded_divergence(sys, sys.perturbation, f.orbit, f.tangent, f.adjoint, omega, 30);
    double worst = 0.0;
    for (std::size_t n = nu.nu.first(); n < nu.nu.end(); ++n) {
      const double ref = unstable_density_ratio(sys.perturbation, f.orbit, f.tangent, f.adjoint, nu.nu, n);
      worst = std::max(worst, std::abs(ex.at(n) - ref));
    }
    EXPECT_LT(worst, 1e-7);
  }
}

TEST(Expanded, AffineCatMapIsTruncationIndependent) {
  auto sys = make_builtin("catmap", {{"kappa", 0.0}, {"pert", "dilate"}});
  auto f = testing::make_frames(sys, 1000, 5);
  auto omega = div_v_fstar_series(sys, f.orbit, f.tangent, f.adjoint, f.window);
  auto a = expanded_divergence(sys, sys.perturbation, f.orbit, f.tangent, f.adjoint, omega, 2);
  auto b = expanded_divergence(sys, sys.perturbation, f.orbit, f.tangent, f.adjoint, omega, 30);
  for (std::size_t n = b.first; n < b.end(); n += 7) {
    const double div = div_v_X(sys.perturbation, f.orbit, f.tangent, f.adjoint, n);
    EXPECT_EQ(a.at(n), -div);
    EXPECT_EQ(b.at(n), -div);
  }
  auto zero = make_builtin("catmap", {{"kappa", 0.1}, {"pert", "zero"}});
  auto z = expanded_divergence(zero, zero.perturbation, f.orbit, f.tangent, f.adjoint, omega, 5);
  for (double v : z.values) EXPECT_EQ(v, 0.0);
}

TEST(Decay, ScalarCaseHasNoGap) {
  auto sys = make_builtin("sawtooth", {{"a", 0.1}});
  auto f = testing::make_frames(sys, 3000, 6);
  auto d = decay_check(sys, f.orbit, f.tangent, f.adjoint, 20, 8, 1);
  for (double g : d.gap) EXPECT_EQ(g, 0.0);
  EXPECT_TRUE(std::isnan(d.slope));
}

TEST(Decay, CatMapSlopeIsTwiceTheStableExponent) {
  auto sys = make_builtin("catmap", {{"kappa", 0.05}});
  auto f = testing::make_frames(sys, 5000, 7);
  auto d = decay_check(sys, f.orbit, f.tangent, f.adjoint, 50, 12, 2);
  const double target = 2.0 * std::log((3.0 - std::sqrt(5.0)) / 2.0);
  EXPECT_NEAR(d.slope, target, 0.2 * std::abs(target));
}

TEST(Scaling, QuadraticErrorIsExact) {
  std::vector<double> widths = {0.4, 0.2, 0.1, 0.05};
  auto sq = [](CRef x) { return x.squaredNorm(); };
  auto r = ulam_error_scaling(1, 2, widths, sq);
  for (const auto& row : r.rows) EXPECT_NEAR(row.error, row.b * row.b / 12.0, 1e-15);
  EXPECT_NEAR(r.slope, 2.0, 1e-9);
  auto r3 = ulam_error_scaling(1, 3, widths, sq);
  for (const auto& row : r3.rows) EXPECT_NEAR(row.error, 2.0 * row.b * row.b / 12.0, 1e-15);
}

TEST(Scaling, DegenerateCasesVanish) {
  std::vector<double> widths = {0.4, 0.2, 0.1};
  auto linear = ulam_error_scaling(1, 2, widths, [](CRef x) { return 3.0 * x[0] - x[1]; });
  for (const auto& row : linear.rows) EXPECT_NEAR(row.error, 0.0, 1e-15);
  auto full = ulam_error_scaling(2, 2, widths, [](CRef x) { return x.squaredNorm(); });
  for (const auto& row : full.rows) EXPECT_EQ(row.error, 0.0);
  EXPECT_THROW(ulam_error_scaling(3, 2, widths, [](CRef) { return 0.0; }), ConfigError);
}

}  // namespace
}  // namespace lresp
