#include "kerrcat/protocols.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "kerrcat/numerics.hpp"

namespace kerrcat {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

Eigen::Matrix2cd qubit_rotation_matrix(char axis, double angle) {
    double c = std::cos(0.5 * angle), s = std::sin(0.5 * angle);
    Eigen::Matrix2cd r;
    switch (axis) {
        case 'x':
            r << Complex(c, 0), Complex(0, -s), Complex(0, -s), Complex(c, 0);
            break;
        case 'y':
            r << Complex(c, 0), Complex(-s, 0), Complex(s, 0), Complex(c, 0);
            break;
        case 'z':
            r << std::exp(Complex(0, -0.5 * angle)), Complex(0, 0), Complex(0, 0),
                std::exp(Complex(0, 0.5 * angle));
            break;
        default:
            throw SimError(ErrorKind::ConfigError, "rotation axis must be x, y or z");
    }
    return r;
}

}  // namespace

void PulseSequence::validate() const {
    layout.validate();
    for (const auto& step : steps) {
        if (const auto* fw = std::get_if<FluxWindowStep>(&step)) {
            if (fw->tau_ns < 0.0) {
                throw SimError(ErrorKind::ConfigError, "flux window duration must be >= 0");
            }
        } else if (const auto* w = std::get_if<WaitStep>(&step)) {
            if (w->tau_ns < 0.0) {
                throw SimError(ErrorKind::ConfigError, "wait duration must be >= 0");
            }
        } else if (const auto* qr = std::get_if<QubitRotationStep>(&step)) {
            if (layout.qubit_levels != 2) {
                throw SimError(ErrorKind::LayoutMismatch,
                               "qubit rotation in a resonator-only sequence");
            }
            if (qr->max_photon && (*qr->max_photon < 1 || *qr->max_photon > layout.resonator_dim)) {
                throw SimError(ErrorKind::ConfigError,
                               "conditional window must reference Fock indices inside the truncation");
            }
        } else if (std::holds_alternative<MeasureQubitStep>(step) && layout.qubit_levels != 2) {
            throw SimError(ErrorKind::LayoutMismatch, "qubit measurement without a qubit");
        }
    }
}

SequenceResult run_sequence(const PulseSequence& seq) {
    seq.validate();
    const HilbertLayout& lay = seq.layout;
    const int d = lay.resonator_dim;
    VectorC psi = VectorC::Zero(lay.dim());
    psi(0) = 1.0;  // |g, 0>

    std::optional<double> parity_reading;
    std::optional<double> p_ground;

    for (const auto& step : seq.steps) {
        if (const auto* ds = std::get_if<DisplaceStep>(&step)) {
            psi = displacement(ds->alpha, lay).m * psi;
        } else if (const auto* fw = std::get_if<FluxWindowStep>(&step)) {
            psi = kerr_cat_propagator(fw->k_mhz, fw->tau_ns, lay).m * psi;
        } else if (const auto* qr = std::get_if<QubitRotationStep>(&step)) {
            Eigen::Matrix2cd r = qubit_rotation_matrix(qr->axis, qr->angle_rad);
            int n_max = qr->max_photon.value_or(d);
            VectorC out = psi;
            for (int n = 0; n < n_max; ++n) {
                Complex g = psi(n), e = psi(d + n);
                out(n) = r(0, 0) * g + r(0, 1) * e;
                out(d + n) = r(1, 0) * g + r(1, 1) * e;
            }
            psi = out;
        } else if (const auto* w = std::get_if<WaitStep>(&step)) {
            if (w->chi_mhz != 0.0 && lay.qubit_levels == 2) {
                // dispersive wait: excited branch of Fock sector n advances
                // by e^{+i chi n tau}
                double chi_ang = mhz_to_angular(w->chi_mhz);
                for (int n = 0; n < d; ++n) {
                    psi(d + n) *= std::exp(Complex(0.0, chi_ang * double(n) * w->tau_ns));
                }
            }
            // chi = 0: free wait, identity in the rotating frame
        } else if (std::holds_alternative<MeasureQubitStep>(step)) {
            double pg = psi.head(d).squaredNorm();
            if (pg < 1e-12) {
                throw SimError(ErrorKind::MinimizationFailed,
                               "ground-state projection has vanishing probability");
            }
            p_ground = pg;
            psi.tail(d).setZero();
            psi /= std::sqrt(pg);
        } else if (std::holds_alternative<MeasureParityStep>(step)) {
            double par = 0.0;
            for (int q = 0; q < lay.qubit_levels; ++q) {
                for (int n = 0; n < d; ++n) {
                    par += ((n % 2 == 0) ? 1.0 : -1.0) * std::norm(psi(q * d + n));
                }
            }
            parity_reading = par;
        }
    }
    SequenceResult out{QuantumState::pure(lay, psi), parity_reading, p_ground};
    return out;
}

QuantumState generate_kerr_cat(Complex alpha, double k_mhz, int m, const HilbertLayout& layout) {
    layout.validate();
    if (m < 1) {
        throw SimError(ErrorKind::ConfigError, "cat component count m must be >= 1");
    }
    if (k_mhz == 0.0) {
        throw SimError(ErrorKind::ConfigError, "Kerr coefficient must be nonzero for cat generation");
    }
    double tau_ns = (1e3 / k_mhz) / double(m);  // (2 pi / K_angular) / m
    OperatorMatrix d_op = displacement(alpha, layout);
    OperatorMatrix u = kerr_cat_propagator(k_mhz, tau_ns, layout);
    VectorC psi = VectorC::Zero(layout.dim());
    psi(0) = 1.0;
    psi = u.m * (d_op.m * psi);
    psi.normalize();
    return QuantumState::pure(layout, psi);
}

QuantumState generate_odd_even_cat(Complex alpha, double chi_mhz, CatBranch branch,
                                   const HilbertLayout& layout,
                                   std::optional<int> conditional_max_photon) {
    layout.validate();
    if (layout.qubit_levels != 2) {
        throw SimError(ErrorKind::LayoutMismatch, "odd/even cat protocol needs the ancilla");
    }
    if (chi_mhz <= 0.0) {
        throw SimError(ErrorKind::ConfigError, "dispersive shift must be positive");
    }
    double aa = std::abs(alpha);
    if (min_dim_for_displacement(2.0 * aa) > layout.resonator_dim) {
        throw SimError(ErrorKind::TruncationTooSmall,
                       "protocol reaches displacement 2|alpha|; enlarge resonator_dim");
    }
    if (4.0 * aa * aa >= double(layout.resonator_dim)) {
        throw SimError(ErrorKind::ConditionWindowTooWide,
                       "conditional window 4|alpha|^2 exceeds the truncation");
    }
    int window = conditional_max_photon.value_or(1);  // empty-resonator-selective pulse

    double chi_ang = mhz_to_angular(chi_mhz);
    double tau_ns = (branch == CatBranch::odd) ? kPi / chi_ang : 3.0 * kPi / chi_ang;

    PulseSequence seq;
    seq.layout = layout;
    seq.steps = {
        QubitRotationStep{'y', 0.5 * kPi, std::nullopt},
        DisplaceStep{alpha},
        WaitStep{tau_ns, chi_mhz},
        // the dispersive frame carries an extra -chi/2 on the excited branch:
        // fold it in as a z rotation so the wait phases are chi (n - 1/2) tau
        QubitRotationStep{'z', -0.5 * chi_ang * tau_ns, std::nullopt},
        DisplaceStep{alpha},
        QubitRotationStep{'x', kPi, window},
        DisplaceStep{-alpha},
        MeasureQubitStep{},
    };
    SequenceResult res = run_sequence(seq);

    // extract the resonator factor (the ancilla is in |g> after projection)
    int d = layout.resonator_dim;
    VectorC red = res.state.vector().head(d);
    red.normalize();
    return QuantumState::pure(HilbertLayout{d, 1}, red);
}

std::vector<QuantumState> preserve_state(const QuantumState& state,
                                         const std::vector<double>& dt_list_ns,
                                         const std::vector<CollapseChannel>& channels,
                                         double k_residual_mhz, double rk4_dt_ns) {
    if (dt_list_ns.empty()) {
        throw SimError(ErrorKind::ConfigError, "preservation needs a nonempty time list");
    }
    std::vector<QuantumState> out;
    out.reserve(dt_list_ns.size());
    if (channels.empty()) {
        // closed system: diagonal Kerr evolution, continuing the generation
        // phase convention e^{+i (K/2) n^2 t}
        for (double dt : dt_list_ns) {
            OperatorMatrix u = kerr_cat_propagator(k_residual_mhz, dt, state.layout());
            if (state.is_pure()) {
                out.push_back(QuantumState::pure(state.layout(), u.m * state.vector()));
            } else {
                MatrixC rho = u.m * state.density_matrix() * u.m.adjoint();
                out.push_back(QuantumState::density(state.layout(), rho));
            }
        }
        return out;
    }
    RotatingFrameHamiltonian hp;
    hp.layout = state.layout();
    hp.kerr_mhz = -k_residual_mhz;  // e^{-iHt} then matches e^{+i(K/2)n^2 t}
    OperatorMatrix h = assemble_hamiltonian(hp);
    for (double dt : dt_list_ns) {
        out.push_back(evolve_lindblad(h, channels, state, dt, rk4_dt_ns));
    }
    return out;
}

namespace {

// Real roots of a x^3 + b x^2 + c x + d (a may be 0).
std::vector<double> cubic_real_roots(double a, double b, double c, double d) {
    std::vector<double> roots;
    if (std::abs(a) < 1e-300) {
        if (std::abs(b) < 1e-300) {
            if (std::abs(c) > 1e-300) roots.push_back(-d / c);
            return roots;
        }
        double disc = c * c - 4.0 * b * d;
        if (disc >= 0.0) {
            double s = std::sqrt(disc);
            roots.push_back((-c + s) / (2.0 * b));
            roots.push_back((-c - s) / (2.0 * b));
        }
        return roots;
    }
    // depressed cubic t^3 + p t + q with x = t - b/(3a)
    double bn = b / a, cn = c / a, dn = d / a;
    double shift = bn / 3.0;
    double p = cn - bn * bn / 3.0;
    double q = 2.0 * bn * bn * bn / 27.0 - bn * cn / 3.0 + dn;
    double disc = q * q / 4.0 + p * p * p / 27.0;
    if (disc > 0.0) {
        double s = std::sqrt(disc);
        double u = std::cbrt(-q / 2.0 + s);
        double v = std::cbrt(-q / 2.0 - s);
        roots.push_back(u + v - shift);
    } else if (disc == 0.0) {
        double u = std::cbrt(-q / 2.0);
        roots.push_back(2.0 * u - shift);
        roots.push_back(-u - shift);
    } else {
        double r = std::sqrt(-p * p * p / 27.0);
        double phi = std::acos(std::clamp(-q / (2.0 * r), -1.0, 1.0));
        double m = 2.0 * std::sqrt(-p / 3.0);
        for (int k = 0; k < 3; ++k) {
            roots.push_back(m * std::cos((phi + 2.0 * kPi * k) / 3.0) - shift);
        }
    }
    return roots;
}

// Steady-state photon number of the driven Kerr resonator at detuning
// delta = f_res - f_drive (all quantities in MHz):
//   x ((delta + K x)^2 + (kappa/2)^2) = eps^2.
// Throws when the response is bistable (three physical branches).
double duffing_response(double delta, double k, double kappa, double eps) {
    double a = k * k;
    double b = 2.0 * delta * k;
    double c = delta * delta + kappa * kappa / 4.0;
    double d = -eps * eps;
    std::vector<double> roots = cubic_real_roots(a, b, c, d);
    std::vector<double> pos;
    for (double r : roots) {
        if (r > 1e-15) pos.push_back(r);
    }
    if (pos.empty()) {
        throw SimError(ErrorKind::FitDiverged, "steady-state solve found no physical branch");
    }
    if (pos.size() > 1) {
        // distinct branches within numerical tolerance => bistability
        std::sort(pos.begin(), pos.end());
        if (pos.back() - pos.front() > 1e-9 * std::max(1.0, pos.back())) {
            throw SimError(ErrorKind::ShiftExceedsLinewidth,
                           "driven response is bistable: Kerr shift exceeds the drive linewidth");
        }
    }
    return pos.front();
}

}  // namespace

double single_tone_amp_for_nbar(double nbar, const PulseEnvelope& drive) {
    drive.validate();
    double kappa = 1e3 / drive.duration_ns;  // Fourier linewidth in MHz
    return 0.5 * kappa * std::sqrt(nbar);
}

SingleToneResult single_tone_kerr(const FluxPoint& dev_point, const PulseEnvelope& drive,
                                  const std::vector<double>& amp_list_mhz,
                                  const HilbertLayout& layout) {
    layout.validate();
    drive.validate();
    if (amp_list_mhz.size() < 2) {
        throw SimError(ErrorKind::ConfigError, "single-tone needs at least 2 drive amplitudes");
    }
    double k = dev_point.k_mhz;
    double kappa = 1e3 / drive.duration_ns;  // MHz

    // scan window covering the bare line and the largest expected dip shift
    double nbar_max = 0.0;
    for (double eps : amp_list_mhz) {
        nbar_max = std::max(nbar_max, (2.0 * eps / kappa) * (2.0 * eps / kappa));
    }
    double shift_max = k * nbar_max;
    double f_lo = std::min(0.0, shift_max) - 3.0 * kappa;
    double f_hi = std::max(0.0, shift_max) + 3.0 * kappa;
    const int n_scan = 801;

    SingleToneResult out;
    for (double eps : amp_list_mhz) {
        // dip of the vacuum probe = max of the steady-state photon number;
        // f is the drive offset from the bare resonator, delta = -f
        int best = 0;
        std::vector<double> xs(n_scan);
        for (int i = 0; i < n_scan; ++i) {
            double f = f_lo + (f_hi - f_lo) * i / double(n_scan - 1);
            xs[i] = duffing_response(-f, k, kappa, eps);
            if (xs[i] > xs[best]) best = i;
        }
        double df = (f_hi - f_lo) / double(n_scan - 1);
        double f_best = f_lo + best * df;
        double f_star = f_best;
        if (best > 0 && best < n_scan - 1) {
            f_star = parabolic_vertex(f_best, df, xs[best - 1], xs[best], xs[best + 1]);
        }
        double nbar = duffing_response(-f_star, k, kappa, eps);
        out.center_mhz.push_back(f_star);
        out.nbar.push_back(nbar);
    }
    LinearFit fit = linear_regression(out.nbar, out.center_mhz);
    out.k_mhz_measured = fit.slope;
    out.r_squared = fit.r_squared;
    return out;
}

TwoToneResult two_tone_kerr(const FluxPoint& dev_point, const HilbertLayout& layout) {
    layout.validate();
    if (layout.qubit_levels != 1 || layout.resonator_dim < 4) {
        throw SimError(ErrorKind::ConfigError,
                       "two-tone spectroscopy expects a resonator-only layout with D >= 4");
    }
    double k = dev_point.k_mhz;
    const double t_pulse = 2000.0;              // ns; Fourier linewidth 0.5 MHz
    const double eps01 = 1e3 / (4.0 * t_pulse);  // pi pulse on the 0<->1 line
    const double eps12 = eps01 / std::sqrt(2.0);
    const double linewidth = 1e3 / t_pulse;

    auto population_after = [&](double f_mhz, double eps_mhz, int start, int target,
                                double t_ns) {
        RotatingFrameHamiltonian hp;
        hp.layout = layout;
        hp.detuning_res_mhz = -f_mhz;
        hp.kerr_mhz = k;
        hp.drive_amp_mhz = eps_mhz;
        OperatorMatrix h = assemble_hamiltonian(hp);
        MatrixC u = matrix_exponential(Complex(0.0, -t_ns) * h.m);
        return std::norm(u(target, start));
    };

    auto locate_peak = [&](double eps_mhz, int start, int target) {
        double span = 2.0 * std::abs(k) + 4.0;
        double f_lo = -span, f_hi = span;
        const double step = 0.1;
        int n = int((f_hi - f_lo) / step) + 1;
        std::vector<double> p(n);
        int best = 0;
        for (int i = 0; i < n; ++i) {
            p[i] = population_after(f_lo + i * step, eps_mhz, start, target, t_pulse);
            if (p[i] > p[best]) best = i;
        }
        if (p[best] < 0.5) {
            throw SimError(ErrorKind::PeaksUnresolved, "transition peak below 0.5 population");
        }
        double f_best = f_lo + best * step;
        if (best == 0 || best == n - 1) return f_best;
        return parabolic_vertex(f_best, step, p[best - 1], p[best], p[best + 1]);
    };

    TwoToneResult out;
    out.f01_mhz = locate_peak(eps01, 0, 1);
    out.f12_mhz = locate_peak(eps12, 1, 2);
    out.k_mhz_measured = out.f12_mhz - out.f01_mhz;
    if (std::abs(out.k_mhz_measured) < 0.8 * linewidth) {
        throw SimError(ErrorKind::PeaksUnresolved,
                       "transition peaks closer than the drive linewidth");
    }

    // Rabi traces at equal drive amplitude, on resonance per manifold
    auto trace = [&](double f_mhz, int start, int target) {
        RabiTrace tr;
        const int n_t = 201;
        int best = 1;
        for (int i = 0; i < n_t; ++i) {
            double t = 2.0 * t_pulse * i / double(n_t - 1);
            tr.t_ns.push_back(t);
            tr.population.push_back(population_after(f_mhz, eps01, start, target, t));
        }
        for (int i = 1; i + 1 < n_t; ++i) {
            if (tr.population[i] > tr.population[best]) best = i;
        }
        double dt = tr.t_ns[1] - tr.t_ns[0];
        double t_peak = parabolic_vertex(tr.t_ns[best], dt, tr.population[best - 1],
                                         tr.population[best], tr.population[best + 1]);
        tr.period_ns = 2.0 * t_peak;
        return tr;
    };
    out.rabi01 = trace(out.f01_mhz, 0, 1);
    out.rabi12 = trace(out.f12_mhz, 1, 2);
    return out;
}

void SpectroscopyResult::validate() const {
    if (freq_mhz.size() != p_excited.size() || freq_mhz.empty()) {
        throw SimError(ErrorKind::ConfigError, "spectrum arrays must be nonempty and matched");
    }
    for (double p : p_excited) {
        if (p < -1e-9 || p > 1.0 + 1e-9) {
            throw SimError(ErrorKind::ConfigError, "excitation probabilities must lie in [0, 1]");
        }
    }
}

namespace {

double lorentzian(double f, double center, double width_mhz) {
    double hw = 0.5 * width_mhz;
    double d = f - center;
    return hw * hw / (d * d + hw * hw);
}

std::vector<double> poisson_weights(double nbar, int n_max) {
    std::vector<double> w(n_max);
    double p = std::exp(-nbar);
    for (int n = 0; n < n_max; ++n) {
        w[n] = p;
        p *= nbar / double(n + 1);
    }
    return w;
}

}  // namespace

SpectroscopyResult make_qubit_spectrum(double nbar, double chi_mhz, double linewidth_mhz,
                                       double f_lo_mhz, double f_hi_mhz, int n_points) {
    if (nbar < 0.0 || chi_mhz <= 0.0 || linewidth_mhz <= 0.0 || n_points < 2) {
        throw SimError(ErrorKind::ConfigError, "invalid spectrum synthesis parameters");
    }
    int n_max = std::max(15, int(nbar + 8.0 * std::sqrt(nbar + 1.0)));
    std::vector<double> w = poisson_weights(nbar, n_max);
    SpectroscopyResult out;
    out.peak_width_mhz = linewidth_mhz;
    for (int n = 0; n < n_max; ++n) {
        out.peak_centers_mhz.push_back(-n * chi_mhz);
        out.peak_weights.push_back(w[n]);
    }
    for (int i = 0; i < n_points; ++i) {
        double f = f_lo_mhz + (f_hi_mhz - f_lo_mhz) * i / double(n_points - 1);
        double p = 0.0;
        for (int n = 0; n < n_max; ++n) {
            p += w[n] * lorentzian(f, -n * chi_mhz, linewidth_mhz);
        }
        out.freq_mhz.push_back(f);
        out.p_excited.push_back(std::min(p, 1.0));
    }
    out.validate();
    return out;
}

PhotonCalibration calibrate_photon_number(const std::vector<SpectroscopyResult>& spectra,
                                          const std::vector<double>& amps,
                                          double chi_mhz, double linewidth_mhz) {
    if (spectra.size() != amps.size() || spectra.empty()) {
        throw SimError(ErrorKind::ConfigError, "need one spectrum per drive amplitude");
    }
    if (chi_mhz < 2.0 * linewidth_mhz) {
        throw SimError(ErrorKind::PeaksUnresolved,
                       "peak spacing chi must exceed twice the linewidth");
    }
    const int n_max = 20;
    PhotonCalibration out;
    std::vector<double> sqrt_nbar;
    for (const auto& spec : spectra) {
        spec.validate();
        const int m = int(spec.freq_mhz.size());
        // linear least squares for the comb weights at known centers -n*chi
        Eigen::MatrixXd a(m, n_max);
        Eigen::VectorXd y(m);
        for (int i = 0; i < m; ++i) {
            y(i) = spec.p_excited[i];
            for (int n = 0; n < n_max; ++n) {
                a(i, n) = lorentzian(spec.freq_mhz[i], -n * chi_mhz, linewidth_mhz);
            }
        }
        Eigen::VectorXd w = a.colPivHouseholderQr().solve(y);
        double total = 0.0;
        for (int n = 0; n < n_max; ++n) {
            w(n) = std::max(w(n), 0.0);
            total += w(n);
        }
        if (total <= 0.0) {
            throw SimError(ErrorKind::PoissonFitPoor, "spectrum decomposition found no weight");
        }
        w /= total;
        // 1D fit of the Poisson parameter to the normalized weights
        auto cost = [&](double nbar) {
            std::vector<double> pw = poisson_weights(nbar, n_max);
            double c = 0.0;
            for (int n = 0; n < n_max; ++n) {
                double r = w(n) - pw[n];
                c += r * r;
            }
            return c;
        };
        double best_nbar = 0.0, best_cost = cost(1e-9);
        for (double nb = 0.25; nb <= 12.0; nb += 0.25) {
            double c = cost(nb);
            if (c < best_cost) {
                best_cost = c;
                best_nbar = nb;
            }
        }
        double lo = std::max(best_nbar - 0.25, 1e-9), hi = best_nbar + 0.25;
        double nbar = brent_minimize(cost, lo, hi, 1e-10);
        double resid = std::sqrt(cost(nbar));
        out.worst_fit_residual = std::max(out.worst_fit_residual, resid);
        if (resid > 0.05) {
            throw SimError(ErrorKind::PoissonFitPoor,
                           "Poisson fit residual " + std::to_string(resid) + " exceeds 0.05");
        }
        out.nbar.push_back(nbar);
        sqrt_nbar.push_back(std::sqrt(nbar));
    }
    out.g = regression_through_origin(amps, sqrt_nbar);
    return out;
}

double photon_scale_from_wigner(const std::vector<std::pair<double, Complex>>& amp_center_pairs) {
    if (amp_center_pairs.empty()) {
        throw SimError(ErrorKind::ConfigError, "Wigner calibration needs at least one sample");
    }
    std::vector<double> v, a;
    for (const auto& [amp, center] : amp_center_pairs) {
        v.push_back(amp);
        a.push_back(std::abs(center));
    }
    return regression_through_origin(v, a);
}

DecoherenceFit calibrate_decoherence(const std::vector<std::pair<double, double>>& targets,
                                     Complex alpha, const HilbertLayout& layout,
                                     double rk4_dt_ns) {
    if (targets.size() < 2) {
        throw SimError(ErrorKind::ConfigError, "decoherence calibration needs >= 2 target points");
    }
    HilbertLayout lay{layout.resonator_dim, 1};
    QuantumState cat = generate_kerr_cat(alpha, 1.0, 2, lay);  // (|a> - i|-a>)/norm

    std::vector<std::pair<double, double>> sorted = targets;
    std::sort(sorted.begin(), sorted.end());

    RotatingFrameHamiltonian hp;
    hp.layout = lay;
    OperatorMatrix h0 = assemble_hamiltonian(hp);  // storage at the Kerr-free point

    auto model_fidelities = [&](double kappa) {
        std::vector<double> f;
        std::vector<CollapseChannel> ch{{ChannelKind::photon_loss, kappa}};
        QuantumState rho = QuantumState::density(lay, cat.density_matrix());
        double t_prev = 0.0;
        for (const auto& [t, target] : sorted) {
            (void)target;
            if (t > t_prev) {
                rho = evolve_lindblad(h0, ch, rho, t - t_prev, rk4_dt_ns, false);
                t_prev = t;
            }
            f.push_back(fidelity_trace(rho, cat));
        }
        return f;
    };

    auto cost_with_contrast = [&](double kappa, double* contrast_out) {
        std::vector<double> f = model_fidelities(kappa);
        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < f.size(); ++i) {
            num += f[i] * sorted[i].second;
            den += f[i] * f[i];
        }
        double c = (den > 0.0) ? num / den : 1.0;
        double cost = 0.0;
        for (size_t i = 0; i < f.size(); ++i) {
            double r = c * f[i] - sorted[i].second;
            cost += r * r;
        }
        if (contrast_out) *contrast_out = c;
        return cost;
    };

    // coarse logarithmic scan then local refinement
    double best_kappa = 1e-4, best_cost = cost_with_contrast(1e-4, nullptr);
    for (double kappa = 2e-4; kappa <= 2.0; kappa *= 1.6) {
        double c = cost_with_contrast(kappa, nullptr);
        if (c < best_cost) {
            best_cost = c;
            best_kappa = kappa;
        }
    }
    double lo = best_kappa / 1.6, hi = best_kappa * 1.6;
    double kappa = brent_minimize([&](double x) { return cost_with_contrast(x, nullptr); },
                                  lo, hi, 1e-6);
    DecoherenceFit out;
    double final_cost = cost_with_contrast(kappa, &out.contrast);
    out.kappa_per_us = kappa;
    out.rms_residual = std::sqrt(final_cost / double(sorted.size()));
    if (!std::isfinite(out.rms_residual)) {
        throw SimError(ErrorKind::FitDiverged, "decoherence fit produced a non-finite residual");
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON (de)serialization of pulse sequences

using nlohmann::json;

std::string sequence_to_json(const PulseSequence& seq) {
    json steps = json::array();
    for (const auto& step : seq.steps) {
        json j;
        if (const auto* ds = std::get_if<DisplaceStep>(&step)) {
            j = {{"type", "displace"}, {"alpha_re", ds->alpha.real()}, {"alpha_im", ds->alpha.imag()}};
        } else if (const auto* fw = std::get_if<FluxWindowStep>(&step)) {
            j = {{"type", "flux_window"}, {"k_mhz", fw->k_mhz}, {"tau_ns", fw->tau_ns}};
        } else if (const auto* qr = std::get_if<QubitRotationStep>(&step)) {
            j = {{"type", "qubit_rotation"}, {"axis", std::string(1, qr->axis)},
                 {"angle_rad", qr->angle_rad}};
            if (qr->max_photon) j["max_photon"] = *qr->max_photon;
        } else if (const auto* w = std::get_if<WaitStep>(&step)) {
            j = {{"type", "wait"}, {"tau_ns", w->tau_ns}, {"chi_mhz", w->chi_mhz}};
        } else if (std::holds_alternative<MeasureQubitStep>(step)) {
            j = {{"type", "measure_qubit"}};
        } else {
            j = {{"type", "measure_parity"}};
        }
        steps.push_back(j);
    }
    json doc = {{"layout", {{"resonator_dim", seq.layout.resonator_dim},
                            {"qubit_levels", seq.layout.qubit_levels}}},
                {"steps", steps}};
    return doc.dump(2);
}

PulseSequence sequence_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw SimError(ErrorKind::ConfigError, std::string("sequence JSON parse error: ") + e.what());
    }
    PulseSequence seq;
    try {
        seq.layout.resonator_dim = doc.at("layout").at("resonator_dim").get<int>();
        seq.layout.qubit_levels = doc.at("layout").at("qubit_levels").get<int>();
        for (const auto& j : doc.at("steps")) {
            std::string type = j.at("type").get<std::string>();
            if (type == "displace") {
                seq.steps.push_back(DisplaceStep{Complex(j.at("alpha_re").get<double>(),
                                                         j.at("alpha_im").get<double>())});
            } else if (type == "flux_window") {
                seq.steps.push_back(
                    FluxWindowStep{j.at("k_mhz").get<double>(), j.at("tau_ns").get<double>()});
            } else if (type == "qubit_rotation") {
                QubitRotationStep qr;
                std::string axis = j.at("axis").get<std::string>();
                if (axis.size() != 1) {
                    throw SimError(ErrorKind::ConfigError, "rotation axis must be one character");
                }
                qr.axis = axis[0];
                qr.angle_rad = j.at("angle_rad").get<double>();
                if (j.contains("max_photon")) qr.max_photon = j.at("max_photon").get<int>();
                seq.steps.push_back(qr);
            } else if (type == "wait") {
                seq.steps.push_back(
                    WaitStep{j.at("tau_ns").get<double>(), j.at("chi_mhz").get<double>()});
            } else if (type == "measure_qubit") {
                seq.steps.push_back(MeasureQubitStep{});
            } else if (type == "measure_parity") {
                seq.steps.push_back(MeasureParityStep{});
            } else {
                throw SimError(ErrorKind::ConfigError, "unknown sequence step type: " + type);
            }
        }
    } catch (const json::exception& e) {
        throw SimError(ErrorKind::ConfigError, std::string("sequence JSON schema error: ") + e.what());
    }
    seq.validate();
    return seq;
}

}  // namespace kerrcat
