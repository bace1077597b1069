#include "lresp/error.hpp"
#include "lresp/orbit.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

namespace lresp {
namespace {

TEST(Orbit, FixedPointStaysPut) {
  auto sys = make_builtin("sawtooth", {{"a", 0.0}});
  Vec x0 = Vec::Zero(1);
  auto o = generate_orbit(sys, {.spinup = 10, .steps = 100, .seed = 1, .gamma = 0.0, .x_init = x0});
  EXPECT_EQ(o.points.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Orbit, ReplayIsBitwiseIdentical) {
  auto sys = make_builtin("sawtooth", {{"a", 0.1}});
  auto a = generate_orbit(sys, {.spinup = 100, .steps = 5000, .seed = 42, .gamma = 0.0, .x_init = {}});
  auto b = generate_orbit(sys, {.spinup = 100, .steps = 5000, .seed = 42, .gamma = 0.0, .x_init = {}});
  EXPECT_EQ(a.points, b.points);
  auto c = generate_orbit(sys, {.spinup = 100, .steps = 5000, .seed = 43, .gamma = 0.0, .x_init = {}});
  EXPECT_NE(a.points, c.points);
}

TEST(Orbit, CatMapAverageIsLebesgue) {
  auto sys = make_builtin("catmap", {{"kappa", 0.0}});
  const std::size_t N = 100000;
  auto o = generate_orbit(sys, {.spinup = 1000, .steps = N, .seed = 5, .gamma = 0.0, .x_init = {}});
  auto e = empirical_average(o, sys.obs);
  EXPECT_LT(std::abs(e.mean), 3.0 / std::sqrt(static_cast<double>(N)));
  EXPECT_LT(std::abs(e.mean), 3.0 * e.se);
}

TEST(Orbit, DoublingMapAverageIsOneHalf) {
  auto sys = make_builtin("sawtooth", {{"a", 0.0}});
  auto o = generate_orbit(sys, {.spinup = 1000, .steps = 100000, .seed = 6, .gamma = 0.0, .x_init = {}});
  auto e = empirical_average(o, [](CRef x) { return x[0]; });
  EXPECT_LT(std::abs(e.mean - 0.5), 3.0 * e.se);
  // The orbit must not collapse onto the fixed point in floating point.
  EXPECT_GT(o.points.row(0).tail(100).maxCoeff(), 0.0);
}

TEST(Orbit, ConstantAverage) {
  auto sys = make_builtin("catmap");
  auto o = generate_orbit(sys, {.spinup = 0, .steps = 100, .seed = 1, .gamma = 0.0, .x_init = {}});
  auto e = empirical_average(o, [](CRef) { return 3.0; });
  EXPECT_DOUBLE_EQ(e.mean, 3.0);
  EXPECT_DOUBLE_EQ(e.se, 0.0);
}

TEST(Orbit, DivergenceReportsStep) {
  auto sys = make_builtin("sawtooth");
  sys.map = [](CRef x, double, Out y) { y[0] = x[0] > 10.0 ? std::numeric_limits<double>::infinity() : 4.0 * x[0] + 1.0; };
  Vec x0 = Vec::Zero(1);
  try {
    generate_orbit(sys, {.spinup = 0, .steps = 100, .seed = 1, .gamma = 0.0, .x_init = x0});
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    ASSERT_TRUE(e.step().has_value());
    EXPECT_EQ(*e.step(), 4u);
  }
}

TEST(Orbit, BinaryRoundTrip) {
  auto sys = make_builtin("solenoid");
  auto o = generate_orbit(sys, {.spinup = 10, .steps = 257, .seed = 3, .gamma = 0.01, .x_init = {}});
  std::stringstream ss;
  write_orbit(ss, o);
  EXPECT_EQ(ss.str().size(), 4 + 4 + 4 + 8 + 8 + 8 + 8 + 258u * 3u * 8u);
  auto back = read_orbit(ss);
  EXPECT_EQ(back.points, o.points);
  EXPECT_EQ(back.spinup, 10u);
  EXPECT_EQ(back.seed, 3u);
  EXPECT_EQ(back.gamma, 0.01);
}

TEST(Orbit, RejectsBadInput) {
  auto sys = make_builtin("sawtooth");
  EXPECT_THROW(generate_orbit(sys, {.spinup = 0, .steps = 0, .seed = 1, .gamma = 0.0, .x_init = {}}), ConfigError);
  std::stringstream bad("XXXX");
  EXPECT_THROW(read_orbit(bad), std::runtime_error);
}

}  // namespace
}  // namespace lresp
