// Acceptance harness: each criterion prints one timed PASS/FAIL line.
// Run with no arguments for all criteria, or with a single number 1..8.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "kerrcat/io.hpp"
#include "kerrcat/numerics.hpp"
#include "kerrcat/protocols.hpp"
#include "kerrcat/tomography.hpp"
#include "snail_oracle.hpp"

using namespace kerrcat;

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kTwoPi = 2.0 * kPi;

struct Check {
    bool ok = true;
    std::string first_failure;

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            first_failure = what;
        }
    }
    void expect_near(double got, double want, double tol, const std::string& what) {
        expect(std::abs(got - want) <= tol,
               what + " (got " + format_double(got) + ", want " + format_double(want) +
                   " +- " + format_double(tol) + ")");
    }
};

SnailDevice anchored_device() {
    SnailDevice base;
    base.beta = 0.095;
    base.ej_ghz = 830.0;
    base.chi = ChiTable::constant(4.35);
    base.kq_mhz = -420.0;
    return calibrate_anchored(base, 0.4026 * kTwoPi, 4.223);
}

QuantumState analytic_cat(Complex alpha, int m, const HilbertLayout& lay) {
    VectorC v = coherent_state(alpha, lay).vector();
    for (int n = 0; n < lay.resonator_dim; ++n) {
        v(n) *= std::exp(Complex(0.0, kPi * double(n) * double(n) / double(m)));
    }
    v.normalize();
    return QuantumState::pure(lay, v);
}

// --------------------------------------------------------------------------

void criterion_1(Check& c) {
    SnailDevice dev = anchored_device();
    double root = kerr_free_flux(dev, 0.30 * kTwoPi, 0.48 * kTwoPi);
    c.expect_near(root / kTwoPi, 0.4026, 0.005, "kerr-free flux / Phi0");
    double k_khz = std::abs(mode_parameters(root, dev).k_mhz) * 1e3;
    c.expect(k_khz < 0.1, "|K| at root < 0.1 kHz (got " + format_double(k_khz) + " kHz)");
}

void criterion_2(Check& c) {
    SnailDevice dev = anchored_device();
    std::vector<FluxPoint> sweep = flux_sweep(dev, 0.0, 0.5 * kTwoPi, 201);
    double k_min = 1e9, k_max = -1e9, kqs = 0.0;
    for (const auto& fp : sweep) {
        k_min = std::min(k_min, fp.k_mhz);
        k_max = std::max(k_max, fp.k_mhz);
        kqs = fp.kqs_mhz;
    }
    c.expect(k_min >= -6.5 && k_min <= -3.5,
             "K minimum in [-6.5, -3.5] MHz (got " + format_double(k_min) + " MHz)");
    c.expect(k_max >= 4.2 && k_max <= 7.8,
             "K maximum in [4.2, 7.8] MHz (got " + format_double(k_max) + " MHz)");
    c.expect_near(kqs * 1e3, -11.3, 0.5, "K_qs in kHz");
}

void criterion_3(Check& c) {
    HilbertLayout lay{40, 1};
    Complex alpha(1.42, 0.0);
    double k = 5.21;
    double tau0 = 1.0e3 / k;  // 1/K in ns for K in MHz
    c.expect_near(tau0, 192.0, 0.5, "tau0 in ns");

    QuantumState cat2 = generate_kerr_cat(alpha, k, 2, lay);
    c.expect(fidelity_trace(cat2, analytic_cat(alpha, 2, lay)) >= 0.999,
             "m=2 fidelity >= 0.999");
    QuantumState rev = generate_kerr_cat(alpha, k, 1, lay);
    c.expect(fidelity_trace(rev, coherent_state(-alpha, lay)) >= 1.0 - 1e-8,
             "m=1 revival >= 1-1e-8");
    for (int m : {3, 4}) {
        c.expect(fidelity_trace(generate_kerr_cat(alpha, k, m, lay),
                                analytic_cat(alpha, m, lay)) >= 0.999,
                 "m=" + std::to_string(m) + " fidelity >= 0.999");
    }
}

void criterion_4(Check& c) {
    // pointwise ramsey-vs-exact on a low-dimension mixed state
    HilbertLayout small{20, 1};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MatrixC rho = MatrixC::Zero(20, 20);
    for (int t = 0; t < 3; ++t) {
        VectorC v = VectorC::Zero(20);
        v(0) = 2.0;  // dominant vacuum keeps nbar inside the adequacy guard
        for (int n = 0; n < 8; ++n) {
            v(n) += Complex(u(rng), u(rng)) / double((1 + n) * (1 + n));
        }
        v.normalize();
        rho += (1.0 / 3.0) * v * v.adjoint();
    }
    QuantumState state = QuantumState::density(small, rho);
    WignerGridSpec probe = WignerGridSpec::centered(2.5, 21);
    WignerGrid we = wigner_exact(state, probe);
    WignerGrid wr = wigner_ramsey(state, 4.35, RamseyPulses{}, probe);
    double max_diff = (we.values - wr.values).cwiseAbs().maxCoeff();
    c.expect(max_diff < 1e-6,
             "ramsey == exact pointwise (max diff " + format_double(max_diff) + ")");

    // fidelity_wigner vs fidelity_trace on the reference grid, with refinement
    HilbertLayout lay{40, 1};
    Complex alpha(1.42, 0.0);
    QuantumState a = generate_kerr_cat(alpha, 5.21, 2, lay);
    QuantumState b = generate_odd_even_cat(alpha, 4.35, CatBranch::odd, HilbertLayout{40, 2});
    double f_trace = fidelity_trace(a, b);
    auto wig_err = [&](int n) {
        WignerGrid wa = wigner_exact(a, WignerGridSpec::centered(5.0, n), 2);
        WignerGrid wb = wigner_exact(b, WignerGridSpec::centered(5.0, n), 2);
        return std::abs(fidelity_wigner(wa, wb) - f_trace);
    };
    double err_coarse = wig_err(51);
    double err_fine = wig_err(101);
    c.expect(err_fine < 1e-3,
             "wigner fidelity within 1e-3 of trace fidelity (err " +
                 format_double(err_fine) + ")");
    c.expect(err_fine <= err_coarse || err_fine < 1e-5,
             "error tightens under grid refinement");
}

void criterion_5(Check& c) {
    HilbertLayout lay{40, 1};
    PulseEnvelope drive;
    drive.shape = PulseShape::square;
    drive.duration_ns = 500.0;
    drive.amplitude_mhz = 1.0;
    std::vector<double> amps;
    for (double nb : {0.1, 0.2, 0.3, 0.4, 0.5}) {
        amps.push_back(single_tone_amp_for_nbar(nb, drive));
    }
    FluxPoint fp;
    for (double k : {0.5, 1.0, 2.0, -1.0}) {
        fp.k_mhz = k;
        double got = single_tone_kerr(fp, drive, amps, lay).k_mhz_measured;
        c.expect(std::abs(got - k) <= 0.05 * std::abs(k),
                 "single-tone K=" + format_double(k) + " within 5% (got " +
                     format_double(got) + ")");
    }
    fp.k_mhz = 0.0;
    double at_root = std::abs(single_tone_kerr(fp, drive, amps, lay).k_mhz_measured);
    c.expect(at_root < 0.07, "single-tone resolution < 70 kHz at the kerr-free point (got " +
                                 format_double(at_root * 1e3) + " kHz)");

    HilbertLayout qutrit{12, 1};
    for (double k : {2.0, 3.0, 5.21, -4.0}) {
        fp.k_mhz = k;
        double got = two_tone_kerr(fp, qutrit).k_mhz_measured;
        c.expect(std::abs(got - k) <= 0.02 * std::abs(k),
                 "two-tone K=" + format_double(k) + " within 2% (got " + format_double(got) +
                     ")");
    }
    for (double k : {2.0, 2.5}) {
        fp.k_mhz = k;
        double st = single_tone_kerr(fp, drive, amps, lay).k_mhz_measured;
        double tt = two_tone_kerr(fp, qutrit).k_mhz_measured;
        c.expect(std::abs(st - tt) <= 0.10 * std::abs(tt),
                 "routes agree within 10% at K=" + format_double(k));
    }
}

void criterion_6(Check& c) {
    double chi = 4.35, lw = 0.5;
    SpectroscopyResult spec = make_qubit_spectrum(1.92, chi, lw, -45.0, 5.0, 1001);
    PhotonCalibration one = calibrate_photon_number({spec}, {1.0}, chi, lw);
    c.expect(std::abs(one.nbar[0] - 1.92) <= 0.02 * 1.92,
             "poisson route recovers nbar=1.92 within 2% (got " +
                 format_double(one.nbar[0]) + ")");

    double g_true = 1.5;
    std::vector<double> volts{0.4, 0.8, 1.2, 1.45};  // nbar up to ~4.7 < 5
    std::vector<SpectroscopyResult> spectra;
    std::vector<std::pair<double, Complex>> wigner_pairs;
    HilbertLayout lay{60, 1};
    for (double v : volts) {
        double a = g_true * v;
        spectra.push_back(make_qubit_spectrum(a * a, chi, lw, -60.0, 5.0, 1301));
        WignerGrid g = wigner_exact(coherent_state(Complex(a, 0.0), lay),
                                    WignerGridSpec::centered(a + 2.5, 41), 2);
        wigner_pairs.emplace_back(v, fit_coherent_gaussian(g).alpha0);
    }
    double g_poisson = calibrate_photon_number(spectra, volts, chi, lw).g;
    double g_wigner = photon_scale_from_wigner(wigner_pairs);
    c.expect(std::abs(g_poisson - g_wigner) <= 0.03 * std::abs(g_wigner),
             "poisson and wigner routes agree on G within 3% (" +
                 format_double(g_poisson) + " vs " + format_double(g_wigner) + ")");
}

void criterion_7(Check& c) {
    HilbertLayout lay{40, 1};
    Complex alpha(1.42, 0.0);
    QuantumState cat = generate_kerr_cat(alpha, 5.21, 2, lay);

    auto closed = preserve_state(cat, {100.0, 300.0, 500.0}, {}, 0.0);
    for (const auto& s : closed) {
        c.expect(fidelity_trace(s, cat) >= 1.0 - 1e-6, "closed-system fidelity >= 1-1e-6");
    }
    auto residual = preserve_state(cat, {500.0}, {}, 0.5);
    double f_res = fidelity_trace(residual[0], cat);
    c.expect(f_res < 0.9, "0.5 MHz residual Kerr degrades below 0.9 by 500 ns (got " +
                              format_double(f_res) + ")");

    std::vector<std::pair<double, double>> targets{{0.0, 0.891}, {100.0, 0.819},
                                                   {200.0, 0.758}};
    DecoherenceFit fit = calibrate_decoherence(targets, alpha, lay);
    c.expect(fit.rms_residual < 0.02,
             "calibrated triple RMS < 2 points (got " + format_double(fit.rms_residual) + ")");
}

void criterion_8(Check& c) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> dims(6, 24);
    std::uniform_int_distribution<int> qubit(1, 2);

    // invariants across 100 randomized instances
    for (int i = 0; i < 100; ++i) {
        HilbertLayout lay{dims(rng), qubit(rng)};
        RotatingFrameHamiltonian hp;
        hp.layout = lay;
        hp.detuning_res_mhz = 4.0 * u(rng);
        hp.kerr_mhz = 6.0 * u(rng);
        hp.chi_mhz = (lay.qubit_levels == 2) ? 4.0 * std::abs(u(rng)) : 0.0;
        hp.drive_amp_mhz = Complex(u(rng), u(rng));
        OperatorMatrix h = assemble_hamiltonian(hp);
        c.expect((h.m - h.m.adjoint()).cwiseAbs().maxCoeff() < 1e-12, "H hermitian");

        VectorC v = VectorC::Zero(lay.dim());
        for (int n = 0; n < lay.dim(); ++n) v(n) = Complex(u(rng), u(rng));
        v.normalize();
        QuantumState psi = QuantumState::pure(lay, v);
        QuantumState evolved = evolve_unitary(h, 13.7, psi);
        c.expect(std::abs(evolved.vector().norm() - 1.0) < 1e-10, "unitarity preserves norm");
        c.expect(std::abs(evolved.density_matrix().trace().real() - 1.0) < 1e-10,
                 "trace one");

        // pure Kerr evolution commutes with parity
        OperatorMatrix kerr = kerr_cat_propagator(5.0 * u(rng), 40.0, lay);
        QuantumState kerr_out = QuantumState::pure(lay, kerr.m * v);
        double p0 = psi.expectation(parity_operator(lay));
        double p1 = kerr_out.expectation(parity_operator(lay));
        c.expect(std::abs(p0 - p1) < 1e-10, "kerr evolution conserves parity");
    }

    // RK4 order: global error vs step size on a driven lossy resonator
    {
        HilbertLayout lay{18, 1};
        RotatingFrameHamiltonian hp;
        hp.layout = lay;
        hp.kerr_mhz = 1.5;  // keeps the stiffest corner of the space RK4-stable
        hp.drive_amp_mhz = Complex(1.5, 0.4);
        OperatorMatrix h = assemble_hamiltonian(hp);
        std::vector<CollapseChannel> ch{{ChannelKind::photon_loss, 5.0}};
        QuantumState rho0 = coherent_state(Complex(1.0, 0.0), lay);
        auto run = [&](double dt) {
            return evolve_lindblad(h, ch, rho0, 64.0, dt, false).density_matrix();
        };
        MatrixC ref = run(0.03125);
        std::vector<double> log_dt, log_err;
        for (double dt : {1.0, 0.5, 0.25}) {
            log_dt.push_back(std::log(dt));
            log_err.push_back(std::log((run(dt) - ref).cwiseAbs().maxCoeff()));
        }
        double slope = linear_regression(log_dt, log_err).slope;
        c.expect_near(slope, 4.0, 0.3, "RK4 convergence order");
    }

    // finite-difference Taylor coefficients vs analytic oracle
    {
        SnailDevice dev = anchored_device();
        std::uniform_real_distribution<double> flux(0.02, 0.48);
        for (int i = 0; i < 20; ++i) {
            double pe = flux(rng) * kTwoPi;
            TaylorCoefficients fd = taylor_coefficients(pe, dev);
            testing::OracleCoefficients an = testing::oracle_coefficients(pe, dev);
            c.expect(std::abs(fd.c2 - an.c2) / std::abs(an.c2) < 1e-5, "c2 vs oracle");
            c.expect(std::abs(fd.c3 - an.c3) / std::max(std::abs(an.c3), 1e-4) < 1e-5,
                     "c3 vs oracle");
            c.expect(std::abs(fd.c4 - an.c4) / std::max(std::abs(an.c4), 1e-4) < 1e-5,
                     "c4 vs oracle");
        }
    }

    // Wigner normalization on a refined grid
    {
        HilbertLayout lay{40, 1};
        QuantumState cat = generate_kerr_cat(Complex(1.42, 0.0), 5.21, 2, lay);
        WignerGrid w = wigner_exact(cat, WignerGridSpec::centered(5.0, 121), 2);
        c.expect_near(wigner_integral(w), 1.0, 5e-3, "wigner normalization");
    }
}

struct Criterion {
    int id;
    const char* title;
    double budget_s;
    void (*fn)(Check&);
};

const Criterion kCriteria[] = {
    {1, "kerr-free point", 10.0, criterion_1},
    {2, "kerr tunability extremes", 30.0, criterion_2},
    {3, "cat timing and fidelity", 10.0, criterion_3},
    {4, "tomography equivalence", 60.0, criterion_4},
    {5, "kerr measurement closed loop", 60.0, criterion_5},
    {6, "photon-number calibration", 60.0, criterion_6},
    {7, "preservation contrast", 120.0, criterion_7},
    {8, "property suites", 300.0, criterion_8},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);
    int failures = 0;
    for (const Criterion& cr : kCriteria) {
        if (only != 0 && cr.id != only) continue;
        Check c;
        auto t0 = std::chrono::steady_clock::now();
        try {
            cr.fn(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        c.expect(secs <= cr.budget_s, "runtime budget exceeded");
        std::printf("criterion %d: %s (%.2f s) %s%s%s\n", cr.id, c.ok ? "PASS" : "FAIL", secs,
                    cr.title, c.ok ? "" : " -- ", c.ok ? "" : c.first_failure.c_str());
        std::fflush(stdout);
        if (!c.ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
