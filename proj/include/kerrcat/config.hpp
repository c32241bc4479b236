#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "kerrcat/dynamics.hpp"
#include "kerrcat/snail.hpp"

namespace kerrcat {

// Declarative run configuration.  Parsing is strict: unknown keys anywhere in
// the document are rejected with a JSON-pointer-style location.
struct RunConfig {
    // device block
    SnailDevice device;
    bool device_explicit = false;                    // EC/EL given directly
    std::optional<std::string> calibration_curve_csv;
    std::optional<std::pair<double, double>> anchor;  // (phi_ext radians, omega_s_ghz)

    // simulation block
    int resonator_dim = 40;
    double dt_ns = 1.0;
    int shots = 0;  // 0 = expectation values
    std::optional<int> threads;

    // protocol block: name plus free-form parameters validated per command
    std::string protocol_name;
    nlohmann::json protocol_params;

    // output block
    bool plots = true;

    unsigned long long seed = 0;
};

RunConfig parse_config(const std::string& json_text);

// Strictly read a JSON object, rejecting keys outside `allowed`.
void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where);

// Parse a channels array [{"kind": "photon_loss", "rate_per_us": 0.2}, ...].
std::vector<CollapseChannel> parse_channels(const nlohmann::json& arr, const std::string& where);

}  // namespace kerrcat
