#pragma once

#include "lresp/response.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace lresp {

constexpr int kReportVersion = 1;

nlohmann::json to_json(const Estimate& e);
nlohmann::json to_json(const ResponseReport& r);

// Columns: W,uc,uc_se,total,total_se
std::string sweep_csv(const ResponseReport& r);

// Simple table writer: header row then one row per entry, fixed precision.
std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

}  // namespace lresp
