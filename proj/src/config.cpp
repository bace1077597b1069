#include "lresp/config.hpp"

#include "lresp/error.hpp"

#include <fstream>
#include <set>

namespace lresp {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
void read(const json& obj, const std::string& key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0)) throw ConfigError("");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("");
    }
    out = v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' in " + where + " has the wrong type");
  }
}

}  // namespace

RunConfig parse_config(const json& j) {
  reject_unknown(j,
                 {"version", "system", "params", "steps", "spinup", "seed", "frame_seed", "replicas", "margin",
                  "w_max", "w", "centered", "threads", "zero_perturbation", "extra_perturbations", "validate",
                  "sweep"},
                 "config");
  RunConfig cfg;
  read(j, "version", cfg.version, "config");
  if (cfg.version != kConfigVersion)
    throw ConfigError("unsupported config version " + std::to_string(cfg.version));
  if (!j.contains("system")) throw ConfigError("missing required key 'system'");
  read(j, "system", cfg.system, "config");
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw ConfigError("key 'params' must be an object");
    cfg.params = j["params"];
  }

  auto& r = cfg.run;
  read(j, "steps", r.steps, "config");
  read(j, "spinup", r.spinup, "config");
  read(j, "seed", r.seed, "config");
  if (j.contains("frame_seed")) {
    std::uint64_t fs = 0;
    read(j, "frame_seed", fs, "config");
    r.frame_seed = fs;
  }
  read(j, "replicas", r.replicas, "config");
  read(j, "margin", r.margin, "config");
  read(j, "w_max", r.w_max, "config");
  if (j.contains("w")) {
    int w = 0;
    read(j, "w", w, "config");
    r.w = w;
  }
  read(j, "centered", r.centered, "config");
  read(j, "threads", r.threads, "config");
  read(j, "zero_perturbation", cfg.zero_perturbation, "config");
  if (j.contains("extra_perturbations")) {
    const auto& e = j["extra_perturbations"];
    if (!e.is_array()) throw ConfigError("key 'extra_perturbations' must be an array of strings");
    for (const auto& s : e) {
      if (!s.is_string()) throw ConfigError("key 'extra_perturbations' must be an array of strings");
      cfg.extra_perturbations.push_back(s.get<std::string>());
    }
  }
  if (r.steps < 1) throw ConfigError("key 'steps' must be >= 1");
  if (r.replicas < 1) throw ConfigError("key 'replicas' must be >= 1");
  if (r.w_max < 0) throw ConfigError("key 'w_max' must be >= 0");
  if (r.w && *r.w < 0) throw ConfigError("key 'w' must be >= 0");
  if (r.threads < 1) throw ConfigError("key 'threads' must be >= 1");

  if (j.contains("validate")) {
    const json& v = j["validate"];
    reject_unknown(v, {"fd", "ulam", "ensemble", "equivalence", "decay", "expanded"}, "validate");
    auto& vc = cfg.validate;
    if (v.contains("fd")) {
      reject_unknown(v["fd"], {"dgamma", "steps", "spinup", "pairs", "richardson"}, "validate.fd");
      read(v["fd"], "dgamma", vc.fd.dgamma, "validate.fd");
      read(v["fd"], "steps", vc.fd.steps, "validate.fd");
      read(v["fd"], "spinup", vc.fd.spinup, "validate.fd");
      read(v["fd"], "pairs", vc.fd.pairs, "validate.fd");
      read(v["fd"], "richardson", vc.fd.richardson, "validate.fd");
    }
    if (v.contains("ulam")) {
      reject_unknown(v["ulam"], {"bins", "terms"}, "validate.ulam");
      read(v["ulam"], "bins", vc.ulam_bins, "validate.ulam");
      read(v["ulam"], "terms", vc.ulam_terms, "validate.ulam");
    }
    if (v.contains("ensemble")) {
      reject_unknown(v["ensemble"], {"horizon"}, "validate.ensemble");
      read(v["ensemble"], "horizon", vc.ensemble_horizon, "validate.ensemble");
    }
    if (v.contains("equivalence")) {
      reject_unknown(v["equivalence"], {"w"}, "validate.equivalence");
      int w = 0;
      if (v["equivalence"].contains("w")) {
        read(v["equivalence"], "w", w, "validate.equivalence");
        vc.equivalence_w = w;
      }
    }
    if (v.contains("decay")) {
      reject_unknown(v["decay"], {"probes", "max_length"}, "validate.decay");
      read(v["decay"], "probes", vc.decay_probes, "validate.decay");
      read(v["decay"], "max_length", vc.decay_length, "validate.decay");
    }
    if (v.contains("expanded")) {
      reject_unknown(v["expanded"], {"T"}, "validate.expanded");
      read(v["expanded"], "T", vc.expanded_T, "validate.expanded");
    }
  }

  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    reject_unknown(s, {"axis", "values"}, "sweep");
    read(s, "axis", cfg.sweep.axis, "sweep");
    if (s.contains("values")) {
      if (!s["values"].is_array()) throw ConfigError("key 'values' in sweep must be an array of numbers");
      for (const auto& x : s["values"]) {
        if (!x.is_number()) throw ConfigError("key 'values' in sweep must be an array of numbers");
        cfg.sweep.values.push_back(x.get<double>());
      }
    }
    const auto& ax = cfg.sweep.axis;
    if (ax != "W" && ax != "N" && ax != "bins" && ax != "dgamma")
      throw ConfigError("sweep axis must be one of W, N, bins, dgamma");
  }

  // Resolve the system early so bad parameters surface as schema errors.
  build_system(cfg);
  build_extra_perturbations(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

json config_to_json(const RunConfig& cfg) {
  const auto& r = cfg.run;
  json j;
  j["version"] = cfg.version;
  j["system"] = cfg.system;
  j["params"] = build_system(cfg).params;
  j["steps"] = r.steps;
  j["spinup"] = r.spinup;
  j["seed"] = r.seed;
  if (r.frame_seed) j["frame_seed"] = *r.frame_seed;
  j["replicas"] = r.replicas;
  j["margin"] = r.margin;
  j["w_max"] = r.w_max;
  if (r.w) j["w"] = *r.w;
  j["centered"] = r.centered;
  j["zero_perturbation"] = cfg.zero_perturbation;
  j["extra_perturbations"] = cfg.extra_perturbations;
  const auto& v = cfg.validate;
  j["validate"] = {{"fd",
                    {{"dgamma", v.fd.dgamma},
                     {"steps", v.fd.steps},
                     {"spinup", v.fd.spinup},
                     {"pairs", v.fd.pairs},
                     {"richardson", v.fd.richardson}}},
                   {"ulam", {{"bins", v.ulam_bins}, {"terms", v.ulam_terms}}},
                   {"ensemble", {{"horizon", v.ensemble_horizon}}},
                   {"decay", {{"probes", v.decay_probes}, {"max_length", v.decay_length}}},
                   {"expanded", {{"T", v.expanded_T}}}};
  if (v.equivalence_w) j["validate"]["equivalence"] = {{"w", *v.equivalence_w}};
  j["sweep"] = {{"axis", cfg.sweep.axis}, {"values", cfg.sweep.values}};
  return j;
}

SystemDef build_system(const RunConfig& cfg) {
  SystemDef sys = make_builtin(cfg.system, cfg.params);
  if (cfg.zero_perturbation) sys.perturbation = Perturbation::zero(sys.dim);
  return sys;
}

std::vector<Perturbation> build_extra_perturbations(const RunConfig& cfg) {
  std::vector<Perturbation> out;
  for (const auto& name : cfg.extra_perturbations) {
    json p = cfg.params;
    p["pert"] = name;
    out.push_back(make_builtin(cfg.system, p).perturbation);
  }
  return out;
}

}  // namespace lresp
