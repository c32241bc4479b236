#include "kerrcat/config.hpp"

#include <set>

namespace kerrcat {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double require_number(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj.at(key).is_number()) {
        throw SimError(ErrorKind::ConfigError, where + "/" + key + " must be a number");
    }
    return obj.at(key).get<double>();
}

}  // namespace

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    if (!obj.is_object()) {
        throw SimError(ErrorKind::ConfigError, where + " must be a JSON object");
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!ok.count(key)) {
            throw SimError(ErrorKind::ConfigError, "unknown key " + where + "/" + key);
        }
    }
}

std::vector<CollapseChannel> parse_channels(const json& arr, const std::string& where) {
    if (!arr.is_array()) {
        throw SimError(ErrorKind::ConfigError, where + " must be an array");
    }
    std::vector<CollapseChannel> out;
    for (size_t i = 0; i < arr.size(); ++i) {
        const json& c = arr[i];
        std::string loc = where + "/" + std::to_string(i);
        reject_unknown_keys(c, {"kind", "rate_per_us"}, loc);
        if (!c.contains("kind") || !c.at("kind").is_string()) {
            throw SimError(ErrorKind::ConfigError, loc + "/kind must be a string");
        }
        CollapseChannel ch;
        std::string kind = c.at("kind").get<std::string>();
        if (kind == "photon_loss") {
            ch.kind = ChannelKind::photon_loss;
        } else if (kind == "qubit_decay") {
            ch.kind = ChannelKind::qubit_decay;
        } else if (kind == "qubit_dephasing") {
            ch.kind = ChannelKind::qubit_dephasing;
        } else {
            throw SimError(ErrorKind::ConfigError, loc + "/kind: unknown channel " + kind);
        }
        ch.rate_per_us = require_number(c, "rate_per_us", loc);
        if (ch.rate_per_us < 0.0) {
            throw SimError(ErrorKind::ConfigError, loc + "/rate_per_us must be >= 0");
        }
        out.push_back(ch);
    }
    return out;
}

RunConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SimError(ErrorKind::ConfigError, std::string("config parse error: ") + e.what());
    }
    reject_unknown_keys(doc, {"device", "simulation", "protocol", "output", "seed"}, "");

    RunConfig cfg;

    if (!doc.contains("device")) {
        throw SimError(ErrorKind::ConfigError, "missing /device block");
    }
    const json& dev = doc.at("device");
    reject_unknown_keys(dev,
                        {"beta", "ej_ghz", "ec_ghz", "el_ghz", "calibration_curve_csv", "anchor",
                         "chi_mhz", "chi_table", "kq_mhz", "omega_q_ghz"},
                        "/device");
    cfg.device.beta = require_number(dev, "beta", "/device");
    cfg.device.ej_ghz = require_number(dev, "ej_ghz", "/device");
    if (dev.contains("kq_mhz")) cfg.device.kq_mhz = require_number(dev, "kq_mhz", "/device");
    if (dev.contains("omega_q_ghz")) {
        cfg.device.omega_q_ghz = require_number(dev, "omega_q_ghz", "/device");
    }
    if (dev.contains("chi_mhz") && dev.contains("chi_table")) {
        throw SimError(ErrorKind::ConfigError, "/device: give chi_mhz or chi_table, not both");
    }
    if (dev.contains("chi_mhz")) {
        cfg.device.chi = ChiTable::constant(require_number(dev, "chi_mhz", "/device"));
    } else if (dev.contains("chi_table")) {
        const json& tab = dev.at("chi_table");
        if (!tab.is_array() || tab.empty()) {
            throw SimError(ErrorKind::ConfigError, "/device/chi_table must be a nonempty array");
        }
        ChiTable table;
        for (const auto& row : tab) {
            if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number()) {
                throw SimError(ErrorKind::ConfigError,
                               "/device/chi_table rows must be [flux_over_2pi, chi_mhz]");
            }
            table.points.emplace_back(row[0].get<double>(), row[1].get<double>());
        }
        table.validate();
        cfg.device.chi = table;
    }
    if (dev.contains("ec_ghz") || dev.contains("el_ghz")) {
        cfg.device.ec_ghz = require_number(dev, "ec_ghz", "/device");
        cfg.device.el_ghz = require_number(dev, "el_ghz", "/device");
        cfg.device_explicit = true;
    }
    if (dev.contains("calibration_curve_csv")) {
        if (!dev.at("calibration_curve_csv").is_string()) {
            throw SimError(ErrorKind::ConfigError, "/device/calibration_curve_csv must be a string");
        }
        cfg.calibration_curve_csv = dev.at("calibration_curve_csv").get<std::string>();
    }
    if (dev.contains("anchor")) {
        const json& a = dev.at("anchor");
        reject_unknown_keys(a, {"phi_ext_over_2pi", "omega_s_ghz"}, "/device/anchor");
        cfg.anchor = {require_number(a, "phi_ext_over_2pi", "/device/anchor") * kTwoPi,
                      require_number(a, "omega_s_ghz", "/device/anchor")};
    }
    if (!cfg.device_explicit && !cfg.anchor) {
        throw SimError(ErrorKind::ConfigError,
                       "/device: give ec_ghz+el_ghz or an anchor block for calibration");
    }

    if (doc.contains("simulation")) {
        const json& sim = doc.at("simulation");
        reject_unknown_keys(sim, {"resonator_dim", "dt_ns", "shots", "threads"}, "/simulation");
        if (sim.contains("resonator_dim")) {
            cfg.resonator_dim = int(require_number(sim, "resonator_dim", "/simulation"));
        }
        if (sim.contains("dt_ns")) cfg.dt_ns = require_number(sim, "dt_ns", "/simulation");
        if (sim.contains("shots")) cfg.shots = int(require_number(sim, "shots", "/simulation"));
        if (sim.contains("threads")) cfg.threads = int(require_number(sim, "threads", "/simulation"));
        if (cfg.resonator_dim < 2 || cfg.dt_ns <= 0.0 || cfg.shots < 0) {
            throw SimError(ErrorKind::ConfigError, "/simulation values out of range");
        }
    }

    if (!doc.contains("protocol")) {
        throw SimError(ErrorKind::ConfigError, "missing /protocol block");
    }
    const json& proto = doc.at("protocol");
    if (!proto.is_object() || !proto.contains("name") || !proto.at("name").is_string()) {
        throw SimError(ErrorKind::ConfigError, "/protocol must be an object with a string name");
    }
    cfg.protocol_name = proto.at("name").get<std::string>();
    cfg.protocol_params = proto;
    cfg.protocol_params.erase("name");

    if (doc.contains("output")) {
        const json& outp = doc.at("output");
        reject_unknown_keys(outp, {"plots"}, "/output");
        if (outp.contains("plots")) {
            if (!outp.at("plots").is_boolean()) {
                throw SimError(ErrorKind::ConfigError, "/output/plots must be a boolean");
            }
            cfg.plots = outp.at("plots").get<bool>();
        }
    }

    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_unsigned()) {
            throw SimError(ErrorKind::ConfigError, "/seed must be a non-negative integer");
        }
        cfg.seed = doc.at("seed").get<unsigned long long>();
    }
    return cfg;
}

}  // namespace kerrcat
