// Command-line front end: lresp {run,validate,sweep,systems}.
#include "lresp/config.hpp"
#include "lresp/divergence.hpp"
#include "lresp/error.hpp"
#include "lresp/oracles.hpp"
#include "lresp/report_io.hpp"
#include "lresp/response.hpp"
#include "lresp/ulam.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>

using namespace lresp;
using nlohmann::json;

namespace {

constexpr int kExitFailedCheck = 1;
constexpr int kExitSchema = 2;
constexpr int kExitNumerical = 3;

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string format = "json";
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("lresp");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("RESPONSE_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

RunConfig load(const Flags& f) {
  if (f.config.empty()) throw ConfigError("--config is required");
  RunConfig cfg = load_config(f.config);
  if (f.seed) cfg.run.seed = *f.seed;
  if (f.threads) {
    if (*f.threads < 1) throw ConfigError("--threads must be >= 1");
    cfg.run.threads = *f.threads;
  }
  cfg.validate.fd.seed = cfg.run.seed;
  cfg.validate.fd.threads = cfg.run.threads;
  return cfg;
}

void emit(const Flags& f, const std::string& text) {
  if (f.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(f.out, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + f.out + "'");
  os << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

int cmd_run(const Flags& f) {
  const RunConfig cfg = load(f);
  const SystemDef sys = build_system(cfg);
  spdlog::info("run: {} N={} replicas={}", sys.name, cfg.run.steps, cfg.run.replicas);
  auto reports = linear_response(sys, cfg.run, build_extra_perturbations(cfg));
  if (f.format == "csv") {
    emit(f, sweep_csv(reports[0]));
    return 0;
  }
  json j = to_json(reports[0]);
  if (reports.size() > 1) {
    json extra = json::array();
    for (std::size_t i = 1; i < reports.size(); ++i) extra.push_back(to_json(reports[i]));
    j["additional"] = extra;
  }
  emit(f, dump(j));
  return 0;
}

struct Check {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double threshold = 0.0;
  bool informational = false;

  double defect() const { return std::abs(value - reference); }
  bool pass() const { return informational || defect() <= threshold; }
};

int cmd_validate(const Flags& f) {
  const RunConfig cfg = load(f);
  const SystemDef sys = build_system(cfg);
  const auto& vc = cfg.validate;
  std::vector<Check> checks;

  spdlog::info("validate: fast pipeline");
  const ResponseReport rep = linear_response(sys, cfg.run)[0];
  const Estimate fast = rep.total;
  checks.push_back({"zero_mean_density", rep.diagnostics.density_mean.mean, 0.0,
                    3.0 * rep.diagnostics.density_mean.se});
  checks.push_back({"adjoint_residual", rep.diagnostics.adjoint_residual, 0.0, 1e-8});

  spdlog::info("validate: finite differences");
  const FdResult fd = fd_response(sys, vc.fd);
  checks.push_back({"fast_vs_fd", fast.mean, fd.value.mean, 3.0 * std::hypot(fast.se, fd.value.se)});

  if (sys.dim == 1) {
    spdlog::info("validate: Ulam");
    const double fine = ulam_response(sys, {vc.ulam_bins, vc.ulam_terms, 0.0});
    const double coarse = ulam_response(sys, {vc.ulam_bins / 2, vc.ulam_terms, 0.0});
    const double grid = std::abs(fine - coarse);
    checks.push_back({"fast_vs_ulam", fast.mean, fine, std::max(grid, 3.0 * fast.se)});
    checks.push_back({"fd_vs_ulam", fd.value.mean, fine, std::max(grid, 3.0 * fd.value.se)});
  }

  spdlog::info("validate: single-orbit checks");
  const OrbitPipeline p = prepare_pipeline(sys, cfg.run, 0);
  const int w_eq = vc.equivalence_w.value_or(rep.W);
  const EquivalenceResult eq = equivalence_check(sys, sys.perturbation, p, w_eq, cfg.run.centered);
  checks.push_back({"tangent_vs_adjoint_uc", eq.tangent.mean, eq.adjoint.mean, 3.0 * eq.combined_se});

  const ScalarSeries ex =
      expanded_divergence(sys, sys.perturbation, p.orbit, p.tangent, p.adjoint,
                          div_v_fstar_series(sys, p.orbit, p.tangent, p.adjoint, p.window), vc.expanded_T);
  double worst = 0.0;
  for (std::size_t n = std::max(ex.first, p.interior.begin); n < std::min(ex.end(), p.interior.end); ++n)
    worst = std::max(worst, std::abs(ex.at(n) - unstable_density_ratio(sys.perturbation, p, n)));
  checks.push_back({"expanded_vs_shadowing_pointwise", worst, 0.0, 1e-7});

  const auto terms = ensemble_response(sys, p.orbit, vc.ensemble_horizon);
  for (const auto& t : terms) {
    Check c{"ensemble_term_" + std::to_string(t.m), t.term.mean, 0.0, 0.0, true};
    checks.push_back(c);
  }
  if (terms.size() >= 2) {
    Check c{"ensemble_growth_ratio", terms.back().magnitude / terms[terms.size() - 2].magnitude,
            std::exp(rep.diagnostics.lyapunov[0]), 0.0, true};
    checks.push_back(c);
  }

  if (sys.udim < sys.dim) {
    const DecayResult dc = decay_check(sys, p.orbit, p.tangent, p.adjoint, vc.decay_probes, vc.decay_length,
                                       cfg.run.seed);
    if (sys.name == "catmap") {
      const double ref = 2.0 * std::log((3.0 - std::sqrt(5.0)) / 2.0);
      checks.push_back({"decay_slope", dc.slope, ref, 0.2 * std::abs(ref)});
    } else {
      checks.push_back({"decay_slope", dc.slope, 0.0, 0.0, true});
    }
  }

  bool all = true;
  for (const auto& c : checks) all = all && c.pass();
  if (f.format == "csv") {
    std::string text = "name,value,reference,defect,threshold,pass\n";
    for (const auto& c : checks) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%.10g,%s\n", c.name.c_str(), c.value, c.reference,
                    c.defect(), c.threshold, c.informational ? "info" : (c.pass() ? "true" : "false"));
      text += buf;
    }
    emit(f, text);
  } else {
    json arr = json::array();
    for (const auto& c : checks) {
      json e = {{"name", c.name}, {"value", c.value}, {"reference", c.reference}, {"defect", c.defect()}};
      if (c.informational) {
        e["pass"] = nullptr;
      } else {
        e["threshold"] = c.threshold;
        e["pass"] = c.pass();
      }
      arr.push_back(e);
    }
    emit(f, dump({{"report_version", kReportVersion}, {"system", sys.name}, {"checks", arr}, {"all_pass", all}}));
  }
  return all ? 0 : kExitFailedCheck;
}

int cmd_sweep(const Flags& f) {
  RunConfig cfg = load(f);
  const SystemDef sys = build_system(cfg);
  const std::string& axis = cfg.sweep.axis;
  std::vector<double> values = cfg.sweep.values;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  json summary = json::object();

  if (axis == "W") {
    if (!values.empty()) cfg.run.w_max = static_cast<int>(*std::max_element(values.begin(), values.end()));
    const ResponseReport rep = linear_response(sys, cfg.run)[0];
    header = {"W", "uc", "uc_se", "total", "total_se"};
    for (const auto& r : rep.sweep) {
      if (!values.empty() && std::find(values.begin(), values.end(), r.W) == values.end()) continue;
      rows.push_back({static_cast<double>(r.W), r.uc.mean, r.uc.se, r.total.mean, r.total.se});
    }
    summary["plateau_W"] = rep.diagnostics.plateau ? json(rep.W) : json(nullptr);
  } else if (axis == "N") {
    if (values.empty()) values = {1e3, 1e4, 1e5};
    header = {"N", "total", "total_se", "sc", "uc"};
    std::vector<double> lx, ly;
    for (double v : values) {
      ResponseOptions o = cfg.run;
      o.steps = static_cast<std::size_t>(v);
      const ResponseReport rep = linear_response(sys, o)[0];
      rows.push_back({v, rep.total.mean, rep.total.se, rep.sc.mean, rep.uc.mean});
      if (rep.total.se > 0.0) {
        lx.push_back(std::log(v));
        ly.push_back(std::log(rep.total.se));
      }
    }
    summary["se_exponent"] = lx.size() >= 2 ? json(fit_line(lx, ly).slope) : json(nullptr);
  } else if (axis == "bins") {
    if (values.empty()) values = {64, 128, 256, 512, 1024};
    header = {"bins", "b", "ulam_response", "scaling_error"};
    std::vector<double> widths;
    for (double v : values) widths.push_back(1.0 / v);
    const ScalingResult sc = ulam_error_scaling(1, 2, widths, [](CRef x) { return x.squaredNorm(); });
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double ur = sys.dim == 1
                            ? ulam_response(sys, {static_cast<int>(values[i]), cfg.validate.ulam_terms, 0.0})
                            : std::numeric_limits<double>::quiet_NaN();
      rows.push_back({values[i], widths[i], ur, sc.rows[i].error});
    }
    summary["scaling_slope"] = sc.slope;
  } else {
    if (values.empty()) values = {1e-3, 2e-3, 4e-3};
    header = {"dgamma", "fd", "fd_se"};
    for (double v : values) {
      FdOptions o = cfg.validate.fd;
      o.dgamma = v;
      const FdResult r = fd_response(sys, o);
      rows.push_back({v, r.value.mean, r.value.se});
    }
  }

  if (f.format == "csv") {
    emit(f, csv_table(header, rows));
  } else {
    json arr = json::array();
    for (const auto& r : rows) {
      json e;
      for (std::size_t i = 0; i < header.size(); ++i) e[header[i]] = std::isnan(r[i]) ? json(nullptr) : json(r[i]);
      arr.push_back(e);
    }
    emit(f, dump({{"report_version", kReportVersion}, {"axis", axis}, {"rows", arr}, {"summary", summary}}));
  }
  return 0;
}

int cmd_systems(const Flags& f) {
  emit(f, dump(builtin_manifest()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear response of hyperbolic maps sampled along one orbit"};
  app.require_subcommand(1);
  Flags flags;
  std::uint64_t seed = 0;
  int threads = 1;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", flags.config, "JSON configuration file");
    if (needs_config) c->required();
    sub->add_option("--out", flags.out, "write output here instead of stdout");
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--threads", threads, "worker threads for replicas and sweep cells");
    sub->add_option("--format", flags.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  };
  auto* run = app.add_subcommand("run", "compute the linear response");
  auto* validate = app.add_subcommand("validate", "compare against the independent oracles");
  auto* sweep = app.add_subcommand("sweep", "convergence study over one axis");
  auto* systems = app.add_subcommand("systems", "print the registry of built-in systems");
  add_common(run, true);
  add_common(validate, true);
  add_common(sweep, true);
  systems->add_option("--out", flags.out, "write output here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitSchema;
  }

  setup_logging();
  for (auto* sub : {run, validate, sweep}) {
    if (sub->count("--seed") > 0) flags.seed = seed;
    if (sub->count("--threads") > 0) flags.threads = threads;
  }

  try {
    if (*run) return cmd_run(flags);
    if (*validate) return cmd_validate(flags);
    if (*sweep) return cmd_sweep(flags);
    return cmd_systems(flags);
  } catch (const ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    std::cerr << "error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const NumericalError& e) {
    spdlog::error("numerical failure: {}", e.what());
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
