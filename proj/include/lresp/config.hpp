#pragma once

#include "lresp/oracles.hpp"
#include "lresp/response.hpp"
#include "lresp/ulam.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lresp {

constexpr int kConfigVersion = 1;

struct ValidateConfig {
  FdOptions fd;
  int ulam_bins = 2048;
  int ulam_terms = 60;
  int ensemble_horizon = 8;
  std::optional<int> equivalence_w;  // default: the run's W or 8
  int decay_probes = 50;
  int decay_length = 12;
  int expanded_T = 30;
};

struct SweepConfig {
  std::string axis = "W";  // W, N, bins, dgamma
  std::vector<double> values;
};

struct RunConfig {
  int version = kConfigVersion;
  std::string system;
  nlohmann::json params = nlohmann::json::object();
  ResponseOptions run;
  bool zero_perturbation = false;
  std::vector<std::string> extra_perturbations;  // values of the system's "pert" parameter
  ValidateConfig validate;
  SweepConfig sweep;
};

// Parses and checks a configuration; unknown keys, wrong types and missing
// "system" throw ConfigError naming the key.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// The configuration with every default filled in.
nlohmann::json config_to_json(const RunConfig& cfg);

// The configured system, with X = 0 when zero_perturbation is set.
SystemDef build_system(const RunConfig& cfg);
std::vector<Perturbation> build_extra_perturbations(const RunConfig& cfg);

}  // namespace lresp
