#pragma once

#include <string>

#include "json.hpp"
#include "kerrcat/config.hpp"

namespace kerrcat {

// Execute one CLI subcommand: parse + validate the config, run the requested
// computation, write artifacts under out_dir, and return the JSON report
// (also written to out_dir/report.json).  seed/threads override the config
// when non-negative.
nlohmann::json run_command(const std::string& subcommand, const std::string& config_json,
                           const std::string& out_dir, long long seed_override = -1,
                           int threads_override = -1);

}  // namespace kerrcat
