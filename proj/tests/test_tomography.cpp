#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "kerrcat/protocols.hpp"
#include "kerrcat/tomography.hpp"

using namespace kerrcat;

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

QuantumState even_cat(double a, const HilbertLayout& lay) {
    VectorC v = coherent_state(Complex(a, 0.0), lay).vector() +
                coherent_state(Complex(-a, 0.0), lay).vector();
    v.normalize();
    return QuantumState::pure(lay, v);
}

QuantumState odd_cat(double a, const HilbertLayout& lay) {
    VectorC v = coherent_state(Complex(a, 0.0), lay).vector() -
                coherent_state(Complex(-a, 0.0), lay).vector();
    v.normalize();
    return QuantumState::pure(lay, v);
}

QuantumState random_low_photon_state(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    VectorC v = VectorC::Zero(d);
    // support concentrated on the lowest few Fock levels, with a dominant
    // vacuum component so the mean photon number stays well inside the
    // tomography adequacy guard at D = 20
    v(0) = 2.0;
    for (int n = 0; n < std::min(d, 6); ++n) {
        v(n) += Complex(gauss(rng), gauss(rng)) / double((1 + n) * (1 + n));
    }
    v.normalize();
    return QuantumState::pure({d, 1}, v);
}

// Brute-force Ramsey parity at one point: explicit Ry(pi/2) rotations and the
// e-branch dispersive phase on the displaced amplitudes, evaluated in a space
// large enough for the displacement (the state is zero-padded into it).
double ramsey_point_oracle(const QuantumState& res_state, Complex gamma) {
    const int d = 60;
    HilbertLayout big{d, 1};
    VectorC padded = VectorC::Zero(d);
    padded.head(res_state.vector().size()) = res_state.vector();
    MatrixC dm = displacement(-gamma, big).m;
    VectorC psi = dm * padded;

    // |g> branch amplitude g_n, |e> branch amplitude e_n
    VectorC g = psi / std::sqrt(2.0), e = psi / std::sqrt(2.0);  // after Ry(pi/2)
    for (int n = 0; n < d; ++n) {
        e(n) *= std::exp(Complex(0.0, kPi * n));  // wait pi/chi: e-branch phase
    }
    // second Ry(pi/2): |g> -> (|g>+|e>)/sqrt2, |e> -> (|e>-|g>)/sqrt2
    double pe = 0.0;
    for (int n = 0; n < d; ++n) {
        Complex e2 = (g(n) + e(n)) / std::sqrt(2.0);
        pe += std::norm(e2);
    }
    return (2.0 / kPi) * (2.0 * pe - 1.0);
}

}  // namespace

TEST_CASE("wigner_exact anchors") {
    HilbertLayout lay{25, 1};
    SUBCASE("vacuum at the origin gives 2/pi") {
        WignerGrid g = wigner_exact(fock_state(0, lay), WignerGridSpec::centered(0.5, 3));
        CHECK(g.values(1, 1) == doctest::Approx(2.0 / kPi).epsilon(1e-8));
    }
    SUBCASE("coherent state is the shifted Gaussian") {
        double a0 = 1.1;
        QuantumState coh = coherent_state(Complex(a0, 0.0), lay);
        WignerGridSpec spec;
        spec.re_min = -0.5;
        spec.re_max = 2.5;
        spec.im_min = -1.0;
        spec.im_max = 1.0;
        spec.nx = 31;
        spec.ny = 11;
        WignerGrid g = wigner_exact(coh, spec);
        for (int ix = 0; ix < spec.nx; ++ix) {
            double re = spec.re_at(ix);
            double expect = (2.0 / kPi) * std::exp(-2.0 * (re - a0) * (re - a0));
            CHECK(std::abs(g.values(5, ix) - expect) < 1e-6);
        }
    }
    SUBCASE("odd cat at the origin gives -2/pi") {
        WignerGrid g = wigner_exact(odd_cat(1.42, {40, 1}), WignerGridSpec::centered(0.5, 3));
        CHECK(g.values(1, 1) == doctest::Approx(-2.0 / kPi).epsilon(1e-6));
    }
    SUBCASE("truncation guard fires on an overfull state") {
        QuantumState crowded = fock_state(19, {20, 1});
        CHECK_THROWS_AS(wigner_exact(crowded, WignerGridSpec::centered(1.0, 3)), SimError);
    }
}

TEST_CASE("fast path matches the Pade displacement reference to 1e-10") {
    // D = 80 so the reference's in-layout displacement is itself adequate for
    // every probe point (no padding difference between the two paths)
    HilbertLayout lay{80, 1};
    QuantumState cat = even_cat(1.42, lay);
    WignerGridSpec spec = WignerGridSpec::centered(2.0, 9);
    WignerGrid g = wigner_exact(cat, spec);
    for (int iy = 0; iy < 9; iy += 2) {
        for (int ix = 0; ix < 9; ix += 2) {
            Complex gamma(spec.re_at(ix), spec.im_at(iy));
            CHECK(std::abs(g.values(iy, ix) - wigner_point_reference(cat, gamma)) < 1e-10);
        }
    }
}

TEST_CASE("wigner normalization within 5e-3 on refined grids") {
    SUBCASE("cat state") {
        QuantumState cat = even_cat(1.42, {40, 1});
        WignerGrid g = wigner_exact(cat, WignerGridSpec::centered(1.42 + 3.0, 201), 2);
        CHECK(std::abs(wigner_integral(g) - 1.0) < 5e-3);
    }
    SUBCASE("mixed state") {
        HilbertLayout lay{30, 1};
        MatrixC rho = 0.6 * coherent_state(Complex(1.0, 0.5), lay).density_matrix() +
                      0.4 * fock_state(2, lay).density_matrix();
        QuantumState mixed = QuantumState::density(lay, rho);
        WignerGrid g = wigner_exact(mixed, WignerGridSpec::centered(4.2, 201), 2);
        CHECK(std::abs(wigner_integral(g) - 1.0) < 5e-3);
    }
}

TEST_CASE("ramsey with ideal pulses equals exact Wigner") {
    RamseyPulses ideal;
    std::mt19937_64 rng(5);
    SUBCASE("random pure states at D <= 20") {
        for (int trial = 0; trial < 5; ++trial) {
            QuantumState s = random_low_photon_state(20, rng);
            WignerGridSpec spec = WignerGridSpec::centered(3.0, 21);
            WignerGrid we = wigner_exact(s, spec);
            WignerGrid wr = wigner_ramsey(s, 4.35, ideal, spec);
            CHECK((we.values - wr.values).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
    SUBCASE("mixed state") {
        HilbertLayout lay{18, 1};
        MatrixC rho = 0.5 * coherent_state(Complex(0.8, 0.0), lay).density_matrix() +
                      0.5 * fock_state(1, lay).density_matrix();
        QuantumState mixed = QuantumState::density(lay, rho);
        WignerGridSpec spec = WignerGridSpec::centered(2.5, 15);
        WignerGrid we = wigner_exact(mixed, spec);
        WignerGrid wr = wigner_ramsey(mixed, 4.35, ideal, spec);
        CHECK((we.values - wr.values).cwiseAbs().maxCoeff() < 1e-6);
    }
    SUBCASE("vacuum anchors the parity sign at +2/pi") {
        WignerGrid g =
            wigner_ramsey(fock_state(0, {12, 1}), 4.35, ideal, WignerGridSpec::centered(0.5, 3));
        CHECK(g.values(1, 1) == doctest::Approx(2.0 / kPi).epsilon(1e-8));
    }
    SUBCASE("brute-force joint-evolution oracle at scattered points") {
        QuantumState s = random_low_photon_state(14, rng);
        WignerGridSpec spec = WignerGridSpec::centered(2.0, 5);
        WignerGrid wr = wigner_ramsey(s, 4.35, ideal, spec);
        for (int iy = 0; iy < 5; ++iy) {
            for (int ix = 0; ix < 5; ++ix) {
                Complex gamma(spec.re_at(ix), spec.im_at(iy));
                CHECK(std::abs(wr.values(iy, ix) - ramsey_point_oracle(s, gamma)) < 1e-9);
            }
        }
    }
}

TEST_CASE("finite-bandwidth distortion shrinks as the pulse band widens") {
    QuantumState cat = even_cat(1.42, {40, 1});
    WignerGridSpec spec = WignerGridSpec::centered(3.0, 21);
    WignerGrid exact = wigner_exact(cat, spec);
    double prev = 1e9;
    for (double lobe : {60.0, 30.0, 10.0}) {  // narrower lobe = wider band
        RamseyPulses pulses;
        pulses.ideal = false;
        pulses.pi2_pulse.shape = PulseShape::sinc;
        pulses.pi2_pulse.amplitude_mhz = 1.0;
        pulses.pi2_pulse.duration_ns = 10.0 * lobe;
        pulses.pi2_pulse.sinc_lobe_width_ns = lobe;
        WignerGrid wr = wigner_ramsey(cat, 4.35, pulses, spec);
        double dev = (wr.values - exact.values).cwiseAbs().maxCoeff();
        CHECK(dev > 0.0);
        CHECK(dev < prev);
        prev = dev;
    }
}

TEST_CASE("fidelity_wigner") {
    HilbertLayout lay{40, 1};
    QuantumState cat = even_cat(1.42, lay);
    WignerGridSpec spec = WignerGridSpec::centered(1.42 + 3.0, 101);
    WignerGrid wcat = wigner_exact(cat, spec);

    SUBCASE("pure state against itself is 1 within the discretization bound") {
        CHECK(std::abs(fidelity_wigner(wcat, wcat) - 1.0) < 2e-3);
    }
    SUBCASE("orthogonal Fock states give ~0") {
        WignerGridSpec s2 = WignerGridSpec::centered(3.0, 101);
        WignerGrid w0 = wigner_exact(fock_state(0, lay), s2);
        WignerGrid w1 = wigner_exact(fock_state(1, lay), s2);
        CHECK(std::abs(fidelity_wigner(w0, w1)) < 2e-3);
    }
    SUBCASE("agrees with fidelity_trace and tightens under refinement") {
        std::mt19937_64 rng(8);
        QuantumState a = random_low_photon_state(40, rng);
        QuantumState b = random_low_photon_state(40, rng);
        double truth = fidelity_trace(a, b);
        WignerGridSpec coarse = WignerGridSpec::centered(5.0, 51);
        WignerGridSpec fine = WignerGridSpec::centered(5.0, 101);
        double err_coarse =
            std::abs(fidelity_wigner(wigner_exact(a, coarse), wigner_exact(b, coarse)) - truth);
        double err_fine =
            std::abs(fidelity_wigner(wigner_exact(a, fine), wigner_exact(b, fine)) - truth);
        CHECK(err_fine < 1e-3);
        CHECK(err_fine <= err_coarse + 1e-12);
    }
    SUBCASE("grid mismatch throws") {
        WignerGrid other = wigner_exact(cat, WignerGridSpec::centered(1.42 + 3.0, 51));
        CHECK_THROWS_AS(fidelity_wigner(wcat, other), SimError);
    }
    SUBCASE("symmetric and bilinear") {
        WignerGrid w0 = wigner_exact(fock_state(0, lay), spec);
        CHECK(fidelity_wigner(wcat, w0) == doctest::Approx(fidelity_wigner(w0, wcat)));
        WignerGrid sum = w0;
        sum.values = 2.0 * w0.values;
        CHECK(fidelity_wigner(sum, wcat) ==
              doctest::Approx(2.0 * fidelity_wigner(w0, wcat)).epsilon(1e-12));
    }
}

TEST_CASE("fit_coherent_gaussian") {
    HilbertLayout lay{40, 1};
    SUBCASE("recovers a displaced coherent state") {
        QuantumState coh = coherent_state(Complex(1.42, 0.0), lay);
        WignerGrid g = wigner_exact(coh, WignerGridSpec::centered(4.0, 61));
        CoherentFit fit = fit_coherent_gaussian(g);
        CHECK(std::abs(fit.alpha0 - Complex(1.42, 0.0)) < 1e-3);
        CHECK(fit.amplitude == doctest::Approx(2.0 / kPi).epsilon(1e-3));
    }
    SUBCASE("vacuum") {
        WignerGrid g = wigner_exact(fock_state(0, lay), WignerGridSpec::centered(3.0, 41));
        CoherentFit fit = fit_coherent_gaussian(g);
        CHECK(std::abs(fit.alpha0) < 1e-3);
        CHECK(fit.amplitude == doctest::Approx(2.0 / kPi).epsilon(1e-3 / (2.0 / kPi)));
    }
    SUBCASE("photon loss shrinks the recovered center as e^{-kt/2}") {
        Complex alpha(1.5, 0.0);
        double kappa = 0.6, t = 300.0;
        QuantumState rho0 =
            QuantumState::density(lay, coherent_state(alpha, lay).density_matrix());
        OperatorMatrix h = assemble_hamiltonian({lay});
        QuantumState decayed =
            evolve_lindblad(h, {{ChannelKind::photon_loss, kappa}}, rho0, t, 1.0);
        WignerGrid g = wigner_exact(decayed, WignerGridSpec::centered(4.0, 61));
        CoherentFit fit = fit_coherent_gaussian(g);
        double expect = std::abs(alpha) * std::exp(-0.5 * kappa * 1e-3 * t);
        CHECK(std::abs(std::abs(fit.alpha0) - expect) / expect < 0.01);
    }
}

TEST_CASE("grid spec validation") {
    WignerGridSpec s;
    s.nx = 1;
    CHECK_THROWS_AS(s.validate(), SimError);
    s = WignerGridSpec();
    s.re_max = s.re_min;
    CHECK_THROWS_AS(s.validate(), SimError);
}
