#include "lresp/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace lresp {

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

nlohmann::json to_json(const Estimate& e) { return {{"mean", e.mean}, {"se", e.se}}; }

nlohmann::json to_json(const ResponseReport& r) {
  nlohmann::json j;
  j["report_version"] = kReportVersion;
  j["system"] = r.system;
  j["params"] = r.params;
  j["perturbation"] = r.perturbation;
  j["observable"] = r.observable;
  j["SC"] = to_json(r.sc);
  j["UC"] = to_json(r.uc);
  j["total"] = to_json(r.total);
  j["W"] = r.W;
  nlohmann::json sweep = nlohmann::json::array();
  for (const auto& row : r.sweep) sweep.push_back({{"W", row.W}, {"UC", to_json(row.uc)}, {"total", to_json(row.total)}});
  j["sweep"] = sweep;
  const auto& d = r.diagnostics;
  j["diagnostics"] = {{"lyapunov", d.lyapunov},
                      {"adjoint_residual", d.adjoint_residual},
                      {"tail_bound", d.tail_bound},
                      {"max_condition", d.max_condition},
                      {"density_mean", to_json(d.density_mean)},
                      {"samples_per_replica", d.samples},
                      {"replicas", d.replicas},
                      {"centered", d.centered},
                      {"plateau_found", d.plateau}};
  return j;
}

std::string sweep_csv(const ResponseReport& r) {
  std::vector<std::vector<double>> rows;
  for (const auto& row : r.sweep)
    rows.push_back({static_cast<double>(row.W), row.uc.mean, row.uc.se, row.total.mean, row.total.se});
  return csv_table({"W", "uc", "uc_se", "total", "total_se"}, rows);
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt(row[i]);
    os << '\n';
  }
  return os.str();
}

}  // namespace lresp
