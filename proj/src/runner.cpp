#include "kerrcat/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "kerrcat/io.hpp"
#include "kerrcat/protocols.hpp"
#include "kerrcat/tomography.hpp"

namespace kerrcat {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct RunContext {
    RunConfig cfg;
    std::filesystem::path out;
    int threads = 1;
    std::mt19937_64 rng;
};

double param_number(const json& p, const char* key, std::optional<double> fallback,
                    const std::string& where) {
    if (!p.contains(key)) {
        if (fallback) return *fallback;
        throw SimError(ErrorKind::ConfigError, where + "/" + key + " is required");
    }
    if (!p.at(key).is_number()) {
        throw SimError(ErrorKind::ConfigError, where + "/" + key + " must be a number");
    }
    return p.at(key).get<double>();
}

std::string param_string(const json& p, const char* key, const std::string& fallback) {
    if (!p.contains(key)) return fallback;
    if (!p.at(key).is_string()) {
        throw SimError(ErrorKind::ConfigError, std::string("/protocol/") + key + " must be a string");
    }
    return p.at(key).get<std::string>();
}

SnailDevice resolve_device(const RunConfig& cfg) {
    if (cfg.device_explicit) {
        SnailDevice d = cfg.device;
        d.validate();
        return d;
    }
    return calibrate_anchored(cfg.device, cfg.anchor->first, cfg.anchor->second);
}

// Expectation value optionally resampled through a binomial shot counter.
double maybe_sample(double expectation, double lo, double hi, int shots, std::mt19937_64& rng) {
    if (shots <= 0) return expectation;
    double p = (expectation - lo) / (hi - lo);
    p = std::clamp(p, 0.0, 1.0);
    std::binomial_distribution<long long> dist(shots, p);
    return lo + (hi - lo) * double(dist(rng)) / double(shots);
}

// Analytic m-component cat reference in the Fock basis: coherent amplitudes
// with the phases e^{i pi n^2 / m}.
QuantumState analytic_cat(Complex alpha, int m, const HilbertLayout& layout) {
    QuantumState coh = coherent_state(alpha, layout);
    VectorC psi = coh.vector();
    for (int n = 0; n < layout.resonator_dim; ++n) {
        psi(n) *= std::exp(Complex(0.0, 3.1415926535897932384626433832795 * n * n / double(m)));
    }
    psi.normalize();
    return QuantumState::pure(layout, psi);
}

struct PreparedState {
    QuantumState state;
    json info;
    double abs_alpha = 0.0;
};

// Shared builder for the `cat` and `wigner` commands.
PreparedState prepare_state(RunContext& ctx, const json& p) {
    const std::string kind = param_string(p, "kind", "kerr");
    PreparedState out{fock_state(0, HilbertLayout{ctx.cfg.resonator_dim, 1}), json::object(), 0.0};
    Complex alpha(param_number(p, "alpha_re", std::nullopt, "/protocol"),
                  param_number(p, "alpha_im", 0.0, "/protocol"));
    out.abs_alpha = std::abs(alpha);
    if (kind == "kerr") {
        double k = param_number(p, "k_mhz", 5.21, "/protocol");
        int m = int(param_number(p, "m", 2.0, "/protocol"));
        HilbertLayout lay{ctx.cfg.resonator_dim, 1};
        out.state = generate_kerr_cat(alpha, k, m, lay);
        out.info["kind"] = "kerr";
        out.info["m"] = m;
        out.info["k_mhz"] = k;
        out.info["tau_ns"] = (1e3 / k) / m;
        out.info["fidelity_vs_analytic"] = fidelity_trace(out.state, analytic_cat(alpha, m, lay));
    } else if (kind == "odd_even") {
        double chi = param_number(p, "chi_mhz", 4.35, "/protocol");
        std::string branch = param_string(p, "branch", "odd");
        if (branch != "odd" && branch != "even") {
            throw SimError(ErrorKind::ConfigError, "/protocol/branch must be odd or even");
        }
        HilbertLayout lay{ctx.cfg.resonator_dim, 2};
        out.state = generate_odd_even_cat(alpha, chi, branch == "odd" ? CatBranch::odd : CatBranch::even, lay);
        out.info["kind"] = "odd_even";
        out.info["branch"] = branch;
        out.info["chi_mhz"] = chi;
    } else {
        throw SimError(ErrorKind::ConfigError, "/protocol/kind must be kerr or odd_even");
    }
    // optional open-system storage stage
    if (p.contains("channels") || p.contains("storage_dt_ns")) {
        double dt = param_number(p, "storage_dt_ns", 0.0, "/protocol");
        std::vector<CollapseChannel> channels;
        if (p.contains("channels")) channels = parse_channels(p.at("channels"), "/protocol/channels");
        double k_res = param_number(p, "k_residual_mhz", 0.0, "/protocol");
        if (dt > 0.0) {
            out.state = preserve_state(out.state, {dt}, channels, k_res, ctx.cfg.dt_ns).front();
            out.info["storage_dt_ns"] = dt;
        }
    }
    double parity = out.state.expectation(parity_operator(out.state.layout()));
    out.info["parity"] = parity;
    if (ctx.cfg.shots > 0) {
        out.info["parity_sampled"] = maybe_sample(parity, -1.0, 1.0, ctx.cfg.shots, ctx.rng);
        out.info["shots"] = ctx.cfg.shots;
    }
    return out;
}

void write_state_csv(const std::filesystem::path& path, const QuantumState& state) {
    std::ofstream f(path);
    if (!f) {
        throw SimError(ErrorKind::ConfigError, "cannot open for writing: " + path.string());
    }
    if (state.is_pure()) {
        f << "index,re,im\n";
        const VectorC& psi = state.vector();
        for (int i = 0; i < psi.size(); ++i) {
            f << i << ',' << format_double(psi(i).real()) << ',' << format_double(psi(i).imag())
              << '\n';
        }
    } else {
        f << "row,col,re,im\n";
        MatrixC rho = state.density_matrix();
        for (int i = 0; i < rho.rows(); ++i) {
            for (int j = 0; j < rho.cols(); ++j) {
                f << i << ',' << j << ',' << format_double(rho(i, j).real()) << ','
                  << format_double(rho(i, j).imag()) << '\n';
            }
        }
    }
}

WignerGrid compute_wigner(RunContext& ctx, const json& wp, const QuantumState& state,
                          double abs_alpha, std::string* method_out) {
    reject_unknown_keys(wp, {"half_extent", "n", "method", "ramsey_ideal", "chi_mhz",
                             "sinc_lobe_width_ns", "pulse_duration_ns"},
                        "/protocol/wigner");
    double half = param_number(wp, "half_extent", abs_alpha + 3.0, "/protocol/wigner");
    int n = int(param_number(wp, "n", 101.0, "/protocol/wigner"));
    std::string method = param_string(wp, "method", "exact");
    WignerGridSpec spec = WignerGridSpec::centered(half, n);
    QuantumState res = (state.layout().qubit_levels == 2) ? partial_trace_qubit(state) : state;
    *method_out = method;
    if (method == "exact") {
        return wigner_exact(res, spec, ctx.threads);
    }
    if (method == "ramsey") {
        double chi = param_number(wp, "chi_mhz", 4.35, "/protocol/wigner");
        RamseyPulses pulses;
        if (wp.contains("ramsey_ideal")) {
            if (!wp.at("ramsey_ideal").is_boolean()) {
                throw SimError(ErrorKind::ConfigError, "/protocol/wigner/ramsey_ideal must be a boolean");
            }
            pulses.ideal = wp.at("ramsey_ideal").get<bool>();
        }
        if (!pulses.ideal) {
            pulses.pi2_pulse.shape = PulseShape::sinc;
            pulses.pi2_pulse.amplitude_mhz = 1.0;
            pulses.pi2_pulse.duration_ns =
                param_number(wp, "pulse_duration_ns", 200.0, "/protocol/wigner");
            pulses.pi2_pulse.sinc_lobe_width_ns =
                param_number(wp, "sinc_lobe_width_ns", 20.0, "/protocol/wigner");
        }
        return wigner_ramsey(res, chi, pulses, spec, ctx.threads);
    }
    throw SimError(ErrorKind::ConfigError, "/protocol/wigner/method must be exact or ramsey");
}

// ---------------------------------------------------------------------------

json cmd_flux_sweep(RunContext& ctx) {
    const json& p = ctx.cfg.protocol_params;
    reject_unknown_keys(p, {"phi_lo_over_2pi", "phi_hi_over_2pi", "n_points"}, "/protocol");
    double lo = param_number(p, "phi_lo_over_2pi", 0.0, "/protocol") * kTwoPi;
    double hi = param_number(p, "phi_hi_over_2pi", 0.5, "/protocol") * kTwoPi;
    int n = int(param_number(p, "n_points", 201.0, "/protocol"));
    if (!(hi > lo) || n < 2) {
        throw SimError(ErrorKind::ConfigError, "flux sweep needs an increasing range and n >= 2");
    }
    SnailDevice dev = resolve_device(ctx.cfg);
    std::vector<FluxPoint> sweep = flux_sweep(dev, lo, hi, n);
    write_flux_sweep_csv((ctx.out / "flux_sweep.csv").string(), sweep);

    json rep;
    rep["device"] = {{"beta", dev.beta}, {"ej_ghz", dev.ej_ghz}, {"ec_ghz", dev.ec_ghz},
                     {"el_ghz", dev.el_ghz}};
    double k_min = sweep.front().k_mhz, k_max = k_min;
    double w_min = sweep.front().omega_s_ghz, w_max = w_min;
    for (const auto& fp : sweep) {
        k_min = std::min(k_min, fp.k_mhz);
        k_max = std::max(k_max, fp.k_mhz);
        w_min = std::min(w_min, fp.omega_s_ghz);
        w_max = std::max(w_max, fp.omega_s_ghz);
    }
    rep["k_mhz_min"] = k_min;
    rep["k_mhz_max"] = k_max;
    rep["omega_s_ghz_min"] = w_min;
    rep["omega_s_ghz_max"] = w_max;
    rep["kqs_mhz_at_lo"] = sweep.front().kqs_mhz;

    // mark the Kerr-free root when the sweep brackets one
    for (size_t i = 1; i < sweep.size(); ++i) {
        if (sweep[i - 1].k_mhz * sweep[i].k_mhz <= 0.0 && sweep[i - 1].k_mhz != sweep[i].k_mhz) {
            double root = kerr_free_flux(dev, sweep[i - 1].phi_ext, sweep[i].phi_ext);
            rep["kerr_free_flux_over_2pi"] = root / kTwoPi;
            rep["k_mhz_at_root"] = mode_parameters(root, dev).k_mhz;
            break;
        }
    }

    if (ctx.cfg.plots) {
        LineSeries k_series, w_series;
        for (const auto& fp : sweep) {
            k_series.x.push_back(fp.phi_ext / kTwoPi);
            k_series.y.push_back(fp.k_mhz);
            w_series.x.push_back(fp.phi_ext / kTwoPi);
            w_series.y.push_back(fp.omega_s_ghz);
        }
        write_line_plot_png((ctx.out / "kerr_vs_flux.png").string(), {k_series});
        w_series.r = 214; w_series.g = 39; w_series.b = 40;
        write_line_plot_png((ctx.out / "omega_vs_flux.png").string(), {w_series});
    }
    return rep;
}

json cmd_cat(RunContext& ctx) {
    const json& p = ctx.cfg.protocol_params;
    reject_unknown_keys(p, {"kind", "alpha_re", "alpha_im", "k_mhz", "m", "branch", "chi_mhz",
                            "channels", "storage_dt_ns", "k_residual_mhz", "wigner"},
                        "/protocol");
    PreparedState prep = prepare_state(ctx, p);
    write_state_csv(ctx.out / "state.csv", prep.state);

    json rep = prep.info;
    json wp = p.contains("wigner") ? p.at("wigner") : json::object();
    std::string method;
    WignerGrid grid = compute_wigner(ctx, wp, prep.state, prep.abs_alpha, &method);
    write_wigner_csv((ctx.out / "wigner.csv").string(), (ctx.out / "wigner.json").string(), grid);
    if (ctx.cfg.plots) {
        write_wigner_heatmap_png((ctx.out / "wigner.png").string(), grid);
    }
    rep["wigner_method"] = method;
    rep["wigner_integral"] = wigner_integral(grid);
    rep["wigner_min"] = grid.values.minCoeff();
    rep["wigner_max"] = grid.values.maxCoeff();
    return rep;
}

json cmd_measure_kerr(RunContext& ctx) {
    const json& p = ctx.cfg.protocol_params;
    reject_unknown_keys(p, {"route", "k_mhz_list", "nbar_list", "pulse_duration_ns"}, "/protocol");
    std::string route = param_string(p, "route", "both");
    if (route != "single_tone" && route != "two_tone" && route != "both") {
        throw SimError(ErrorKind::ConfigError, "/protocol/route must be single_tone, two_tone or both");
    }
    if (!p.contains("k_mhz_list") || !p.at("k_mhz_list").is_array() || p.at("k_mhz_list").empty()) {
        throw SimError(ErrorKind::ConfigError, "/protocol/k_mhz_list must be a nonempty array");
    }
    std::vector<double> nbars{0.1, 0.2, 0.3, 0.4, 0.5};
    if (p.contains("nbar_list")) {
        nbars.clear();
        for (const auto& v : p.at("nbar_list")) nbars.push_back(v.get<double>());
    }
    PulseEnvelope drive;
    drive.shape = PulseShape::square;
    drive.duration_ns = param_number(p, "pulse_duration_ns", 500.0, "/protocol");
    drive.amplitude_mhz = 1.0;

    HilbertLayout lay{ctx.cfg.resonator_dim, 1};
    json table = json::array();
    for (const auto& kv : p.at("k_mhz_list")) {
        double k = kv.get<double>();
        FluxPoint fp;
        fp.k_mhz = k;
        json row;
        row["k_mhz_programmed"] = k;
        if (route != "two_tone") {
            std::vector<double> amps;
            for (double nb : nbars) amps.push_back(single_tone_amp_for_nbar(nb, drive));
            SingleToneResult st = single_tone_kerr(fp, drive, amps, lay);
            row["single_tone_k_mhz"] = st.k_mhz_measured;
            row["single_tone_r_squared"] = st.r_squared;
        }
        if (route != "single_tone") {
            TwoToneResult tt = two_tone_kerr(fp, lay);
            row["two_tone_k_mhz"] = tt.k_mhz_measured;
            row["f01_mhz"] = tt.f01_mhz;
            row["f12_mhz"] = tt.f12_mhz;
            row["rabi_period_ratio"] = tt.rabi01.period_ns / tt.rabi12.period_ns;
        }
        table.push_back(row);
    }
    json rep;
    rep["route"] = route;
    rep["results"] = table;
    return rep;
}

json cmd_preserve(RunContext& ctx) {
    const json& p = ctx.cfg.protocol_params;
    reject_unknown_keys(p, {"alpha_re", "alpha_im", "k_gen_mhz", "m", "k_residual_mhz",
                            "dt_list_ns", "channels", "calibrate_targets"},
                        "/protocol");
    Complex alpha(param_number(p, "alpha_re", std::nullopt, "/protocol"),
                  param_number(p, "alpha_im", 0.0, "/protocol"));
    double k_gen = param_number(p, "k_gen_mhz", 5.21, "/protocol");
    int m = int(param_number(p, "m", 2.0, "/protocol"));
    double k_res = param_number(p, "k_residual_mhz", 0.0, "/protocol");
    if (!p.contains("dt_list_ns") || !p.at("dt_list_ns").is_array() || p.at("dt_list_ns").empty()) {
        throw SimError(ErrorKind::ConfigError, "/protocol/dt_list_ns must be a nonempty array");
    }
    std::vector<double> dts;
    for (const auto& v : p.at("dt_list_ns")) dts.push_back(v.get<double>());

    HilbertLayout lay{ctx.cfg.resonator_dim, 1};
    QuantumState cat = generate_kerr_cat(alpha, k_gen, m, lay);

    std::vector<CollapseChannel> channels;
    if (p.contains("channels")) channels = parse_channels(p.at("channels"), "/protocol/channels");

    double contrast = 1.0;
    json rep;
    if (p.contains("calibrate_targets")) {
        std::vector<std::pair<double, double>> targets;
        for (const auto& row : p.at("calibrate_targets")) {
            if (!row.is_array() || row.size() != 2) {
                throw SimError(ErrorKind::ConfigError,
                               "/protocol/calibrate_targets rows must be [dt_ns, fidelity]");
            }
            targets.emplace_back(row[0].get<double>(), row[1].get<double>());
        }
        DecoherenceFit fit = calibrate_decoherence(targets, alpha, lay, ctx.cfg.dt_ns);
        channels.push_back({ChannelKind::photon_loss, fit.kappa_per_us});
        contrast = fit.contrast;
        rep["calibration"] = {{"kappa_per_us", fit.kappa_per_us}, {"contrast", fit.contrast},
                              {"rms_residual", fit.rms_residual}};
    }

    std::vector<QuantumState> snaps = preserve_state(cat, dts, channels, k_res, ctx.cfg.dt_ns);
    json series = json::array();
    std::ofstream csv(ctx.out / "fidelity_vs_time.csv");
    csv << "dt_ns,fidelity\n";
    LineSeries plot;
    for (size_t i = 0; i < dts.size(); ++i) {
        double f = contrast * fidelity_trace(snaps[i], cat);
        series.push_back({{"dt_ns", dts[i]}, {"fidelity", f}});
        csv << format_double(dts[i]) << ',' << format_double(f) << '\n';
        plot.x.push_back(dts[i]);
        plot.y.push_back(f);
    }
    if (ctx.cfg.plots) {
        write_line_plot_png((ctx.out / "fidelity_vs_time.png").string(), {plot});
    }
    rep["k_residual_mhz"] = k_res;
    rep["fidelities"] = series;
    return rep;
}

json cmd_calibrate(RunContext& ctx) {
    const json& p = ctx.cfg.protocol_params;
    reject_unknown_keys(p, {}, "/protocol");
    json rep;
    if (ctx.cfg.calibration_curve_csv) {
        auto curve = read_frequency_curve_csv(*ctx.cfg.calibration_curve_csv);
        SnailDevice init = ctx.cfg.device;
        if (!ctx.cfg.device_explicit) {
            init.ec_ghz = 0.05;
            init.el_ghz = 500.0;
        }
        CalibrationResult res = calibrate(curve, ctx.cfg.anchor, init);
        rep["rms_residual_ghz"] = res.rms_residual_ghz;
        rep["iterations"] = res.iterations;
        rep["device"] = {{"beta", res.device.beta}, {"ej_ghz", res.device.ej_ghz},
                         {"ec_ghz", res.device.ec_ghz}, {"el_ghz", res.device.el_ghz}};
    } else if (ctx.cfg.anchor) {
        SnailDevice dev = calibrate_anchored(ctx.cfg.device, ctx.cfg.anchor->first,
                                             ctx.cfg.anchor->second);
        rep["device"] = {{"beta", dev.beta}, {"ej_ghz", dev.ej_ghz},
                         {"ec_ghz", dev.ec_ghz}, {"el_ghz", dev.el_ghz}};
        rep["k_mhz_at_anchor"] = mode_parameters(ctx.cfg.anchor->first, dev).k_mhz;
    } else {
        throw SimError(ErrorKind::ConfigError,
                       "calibrate needs a calibration_curve_csv or an anchor block");
    }
    std::ofstream dev_out(ctx.out / "calibrated_device.json");
    dev_out << rep["device"].dump(2) << '\n';
    return rep;
}

json cmd_wigner(RunContext& ctx) {
    const json& p = ctx.cfg.protocol_params;
    reject_unknown_keys(p, {"kind", "alpha_re", "alpha_im", "k_mhz", "m", "branch", "chi_mhz",
                            "channels", "storage_dt_ns", "k_residual_mhz", "wigner",
                            "sequence_json"},
                        "/protocol");
    QuantumState state = fock_state(0, HilbertLayout{ctx.cfg.resonator_dim, 1});
    json rep;
    double abs_alpha = 0.0;
    if (p.contains("sequence_json")) {
        std::ifstream f(p.at("sequence_json").get<std::string>());
        if (!f) {
            throw SimError(ErrorKind::ConfigError, "cannot open sequence file");
        }
        std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        SequenceResult res = run_sequence(sequence_from_json(text));
        state = res.state;
        if (res.parity) rep["sequence_parity"] = *res.parity;
        if (res.p_ground) rep["sequence_p_ground"] = *res.p_ground;
        Ladder lad = make_ladder(state.layout());
        abs_alpha = std::sqrt(std::max(0.0, state.expectation(lad.number)));
    } else {
        PreparedState prep = prepare_state(ctx, p);
        state = prep.state;
        abs_alpha = prep.abs_alpha;
        rep = prep.info;
    }
    json wp = p.contains("wigner") ? p.at("wigner") : json::object();
    std::string method;
    WignerGrid grid = compute_wigner(ctx, wp, state, abs_alpha, &method);
    write_wigner_csv((ctx.out / "wigner.csv").string(), (ctx.out / "wigner.json").string(), grid);
    if (ctx.cfg.plots) {
        write_wigner_heatmap_png((ctx.out / "wigner.png").string(), grid);
    }
    rep["wigner_method"] = method;
    rep["wigner_integral"] = wigner_integral(grid);
    rep["wigner_min"] = grid.values.minCoeff();
    rep["wigner_max"] = grid.values.maxCoeff();
    return rep;
}

json cmd_fidelity(RunContext& ctx) {
    const json& p = ctx.cfg.protocol_params;
    reject_unknown_keys(p, {"a_csv", "a_sidecar", "b_csv", "b_sidecar"}, "/protocol");
    for (const char* key : {"a_csv", "a_sidecar", "b_csv", "b_sidecar"}) {
        if (!p.contains(key) || !p.at(key).is_string()) {
            throw SimError(ErrorKind::ConfigError, std::string("/protocol/") + key + " is required");
        }
    }
    WignerGrid a = read_wigner_csv(p.at("a_csv").get<std::string>(),
                                   p.at("a_sidecar").get<std::string>());
    WignerGrid b = read_wigner_csv(p.at("b_csv").get<std::string>(),
                                   p.at("b_sidecar").get<std::string>());
    json rep;
    rep["fidelity"] = fidelity_wigner(a, b);
    return rep;
}

}  // namespace

json run_command(const std::string& subcommand, const std::string& config_json,
                 const std::string& out_dir, long long seed_override, int threads_override) {
    RunContext ctx;
    ctx.cfg = parse_config(config_json);
    if (seed_override >= 0) ctx.cfg.seed = (unsigned long long)(seed_override);
    ctx.threads = threads_override > 0 ? threads_override : ctx.cfg.threads.value_or(1);
    ctx.rng.seed(ctx.cfg.seed);
    ctx.out = out_dir;
    std::error_code ec;
    std::filesystem::create_directories(ctx.out, ec);
    if (ec) {
        throw SimError(ErrorKind::ConfigError, "cannot create output directory " + out_dir);
    }

    // the protocol name in the config must match the invoked subcommand (or
    // be omitted via matching name)
    if (ctx.cfg.protocol_name != subcommand) {
        throw SimError(ErrorKind::ConfigError, "config protocol name '" + ctx.cfg.protocol_name +
                                                   "' does not match subcommand '" + subcommand + "'");
    }

    json rep;
    if (subcommand == "flux-sweep") {
        rep = cmd_flux_sweep(ctx);
    } else if (subcommand == "cat") {
        rep = cmd_cat(ctx);
    } else if (subcommand == "measure-kerr") {
        rep = cmd_measure_kerr(ctx);
    } else if (subcommand == "preserve") {
        rep = cmd_preserve(ctx);
    } else if (subcommand == "calibrate") {
        rep = cmd_calibrate(ctx);
    } else if (subcommand == "wigner") {
        rep = cmd_wigner(ctx);
    } else if (subcommand == "fidelity") {
        rep = cmd_fidelity(ctx);
    } else {
        throw SimError(ErrorKind::ConfigError, "unknown subcommand: " + subcommand);
    }
    rep["command"] = subcommand;
    rep["seed"] = ctx.cfg.seed;
    rep["status"] = "ok";

    std::ofstream f(ctx.out / "report.json");
    if (!f) {
        throw SimError(ErrorKind::ConfigError, "cannot write report.json");
    }
    f << rep.dump(2) << '\n';
    return rep;
}

}  // namespace kerrcat
