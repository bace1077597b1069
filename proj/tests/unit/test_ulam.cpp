#include "lresp/error.hpp"
#include "lresp/ulam.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace lresp {
namespace {

constexpr double kTwoPi = 2.0 * M_PI;

TEST(Ulam, RowsAreStochastic) {
  for (int n : {64, 100, 1000}) {
    auto P = ulam_build([](double x) { return 2.0 * x + 0.1 * std::sin(kTwoPi * x); }, n);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(P.row(i).sum(), 1.0, 1e-13);
  }
}

TEST(Ulam, DoublingMapDensityIsUniform) {
  auto P = ulam_build([](double x) { return 2.0 * x; }, 256);
  auto d = ulam_density(P);
  EXPECT_LT((d.density.array() - 1.0).abs().maxCoeff(), 1e-10);
}

TEST(Ulam, RotationInvariantResponseVanishes) {
  // A constant shift of the doubling map is conjugate to itself.
  auto sys = make_builtin("sawtooth", {{"a", 0.0}});
  EXPECT_NEAR(ulam_response(sys, {.n_bins = 512, .n_terms = 40, .dgamma = 0.0}), 0.0, 1e-6);
}

TEST(Ulam, RejectsOrientationReversal) {
  EXPECT_THROW(ulam_build([](double x) { return -2.0 * x; }, 32), NumericalError);
  auto cat = make_builtin("catmap");
  EXPECT_ANY_THROW(ulam_response(cat, {}));
}

TEST(Ulam, Lemma1) {
  std::vector<int> bins = {128, 256, 512, 1024};
  // Constant density: bin masses transport exactly, only the gamma difference quotient is left.
  auto flat = lemma1_check([](double) { return 1.0; }, [](double x) { return std::sin(kTwoPi * x); }, bins);
  for (const auto& r : flat) EXPECT_LT(r.defect, 1e-6);
  auto rows = lemma1_check([](double x) { return 1.0 + 0.5 * std::sin(kTwoPi * x); }, [](double) { return 1.0; }, bins);
  ASSERT_EQ(rows.size(), bins.size());
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].defect, rows[i - 1].defect / 3.0);
  auto zero = lemma1_check([](double) { return 1.0; }, [](double) { return 0.0; }, bins);
  for (const auto& r : zero) EXPECT_LT(r.defect, 1e-8);
}

}  // namespace
}  // namespace lresp
