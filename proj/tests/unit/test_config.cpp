#include "lresp/config.hpp"
#include "lresp/error.hpp"

#include <gtest/gtest.h>

namespace lresp {
namespace {

using nlohmann::json;

TEST(Config, MinimalConfigFillsDefaults) {
  auto cfg = parse_config(json{{"system", "sawtooth"}});
  EXPECT_EQ(cfg.system, "sawtooth");
  EXPECT_EQ(cfg.run.steps, ResponseOptions{}.steps);
  auto full = config_to_json(cfg);
  auto again = parse_config(full);
  EXPECT_EQ(config_to_json(again), full);
}

TEST(Config, RoundTripsNonDefaults) {
  json j = {{"system", "catmap"},
            {"params", {{"kappa", 0.05}, {"pert", "dilate"}}},
            {"steps", 5000},
            {"seed", 9},
            {"replicas", 2},
            {"w", 4},
            {"extra_perturbations", {"mixed"}}};
  auto cfg = parse_config(j);
  EXPECT_EQ(cfg.run.steps, 5000u);
  EXPECT_EQ(cfg.run.replicas, 2);
  EXPECT_EQ(cfg.run.w, 4);
  auto sys = build_system(cfg);
  EXPECT_EQ(sys.perturbation.name, "dilate");
  auto extra = build_extra_perturbations(cfg);
  ASSERT_EQ(extra.size(), 1u);
  EXPECT_EQ(extra[0].name, "mixed");
  EXPECT_EQ(config_to_json(parse_config(config_to_json(cfg))), config_to_json(cfg));
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config(json::object()), ConfigError);
  EXPECT_THROW(parse_config(json{{"system", "sawtooth"}, {"bogus", 1}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"system", "sawtooth"}, {"stepz", 1}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"system", "sawtooth"}, {"steps", "many"}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"system", 3}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"system", "nosuch"}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"system", "sawtooth"}, {"validate", {{"fd", {{"pairz", 2}}}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"system", "sawtooth"}, {"replicas", 0}}), ConfigError);
  try {
    parse_config(json{{"system", "sawtooth"}, {"stepz", 1}});
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("stepz"), std::string::npos);
  }
}

TEST(Config, ZeroPerturbation) {
  auto cfg = parse_config(json{{"system", "solenoid"}, {"zero_perturbation", true}});
  auto sys = build_system(cfg);
  Vec x = Vec::Constant(3, 0.2);
  x[2] = 0.3;
  EXPECT_EQ(sys.perturbation.at(x).norm(), 0.0);
}

}  // namespace
}  // namespace lresp
