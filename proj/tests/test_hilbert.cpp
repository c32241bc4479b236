#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "kerrcat/hilbert.hpp"

using namespace kerrcat;

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;

double max_abs(const MatrixC& m) { return m.cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("layout validation") {
    CHECK_THROWS_AS((HilbertLayout{1, 1}.validate()), SimError);
    CHECK_THROWS_AS((HilbertLayout{8, 3}.validate()), SimError);
    HilbertLayout ok{8, 2};
    CHECK(ok.dim() == 16);
}

TEST_CASE("ladder operators at D=2") {
    Ladder lad = make_ladder({2, 1});
    CHECK(lad.a.m(0, 1).real() == doctest::Approx(1.0));
    CHECK(max_abs(lad.a.m - (MatrixC(2, 2) << 0, 1, 0, 0).finished()) < 1e-15);
    CHECK(max_abs(lad.a_dagger.m - lad.a.m.adjoint()) == 0.0);
}

TEST_CASE("number operator is diagonal n") {
    const int d = 12;
    Ladder lad = make_ladder({d, 1});
    for (int n = 0; n < d; ++n) {
        QuantumState fock = fock_state(n, {d, 1});
        CHECK(fock.expectation(lad.number) == doctest::Approx(double(n)).epsilon(1e-12));
    }
}

TEST_CASE("truncated commutator diagonal (1,...,1,1-D)") {
    const int d = 9;
    Ladder lad = make_ladder({d, 1});
    MatrixC comm = lad.a.m * lad.a_dagger.m - lad.a_dagger.m * lad.a.m;
    for (int i = 0; i < d; ++i) {
        double expected = (i == d - 1) ? 1.0 - d : 1.0;
        CHECK(comm(i, i).real() == doctest::Approx(expected).epsilon(1e-12));
    }
    comm.diagonal().setZero();
    CHECK(max_abs(comm) < 1e-12);
}

TEST_CASE("ladder acts as identity on the qubit factor") {
    const int d = 6;
    Ladder lad = make_ladder({d, 2});
    CHECK(lad.a.m.rows() == 2 * d);
    // block structure: same resonator block in both qubit sectors, no cross terms
    CHECK(max_abs(lad.a.m.block(0, 0, d, d) - lad.a.m.block(d, d, d, d)) < 1e-15);
    CHECK(max_abs(lad.a.m.block(0, d, d, d)) == 0.0);
    CHECK(max_abs(lad.a.m.block(d, 0, d, d)) == 0.0);
}

TEST_CASE("displacement basics") {
    HilbertLayout lay{30, 1};
    SUBCASE("D(0) is the identity") {
        CHECK(max_abs(displacement(0.0, lay).m - MatrixC::Identity(30, 30)) < 1e-12);
    }
    SUBCASE("coherent-state column matches analytic amplitudes") {
        Complex alpha(1.3, -0.4);
        OperatorMatrix d = displacement(alpha, lay);
        double lognorm = -0.5 * std::norm(alpha);
        for (int n = 0; n < 26; ++n) {
            Complex expected = std::exp(Complex(lognorm, 0.0)) * std::pow(alpha, n);
            for (int k = 2; k <= n; ++k) expected /= std::sqrt(double(k));
            CHECK(std::abs(d.m(n, 0) - expected) < 1e-8);
        }
    }
    SUBCASE("D(a) D(-a) = identity") {
        Complex alpha(1.1, 0.7);
        MatrixC prod = displacement(alpha, lay).m * displacement(-alpha, lay).m;
        CHECK(max_abs(prod - MatrixC::Identity(30, 30)) < 1e-8);
    }
    SUBCASE("unitarity") {
        OperatorMatrix d = displacement(Complex(0.0, 1.8), lay);
        CHECK(max_abs(d.m.adjoint() * d.m - MatrixC::Identity(30, 30)) < 1e-8);
    }
    SUBCASE("truncation guard") {
        CHECK_THROWS_AS(displacement(Complex(4.0, 0.0), HilbertLayout{20, 1}), SimError);
        CHECK(min_dim_for_displacement(2.0) == 26);  // ceil(4 + 12 + 10)
    }
}

TEST_CASE("parity operator") {
    HilbertLayout lay{25, 1};
    OperatorMatrix p = parity_operator(lay);
    CHECK(fock_state(0, lay).expectation(p) == doctest::Approx(1.0));
    CHECK(fock_state(1, lay).expectation(p) == doctest::Approx(-1.0));
    SUBCASE("coherent-state parity e^{-2|a|^2}") {
        QuantumState coh = coherent_state(Complex(1.0, 0.0), lay);
        CHECK(std::abs(coh.expectation(p) - std::exp(-2.0)) < 1e-6);
    }
    SUBCASE("involution") {
        CHECK(max_abs(p.m * p.m - MatrixC::Identity(25, 25)) < 1e-15);
    }
}

TEST_CASE("matrix exponential") {
    SUBCASE("exp(0) = I") {
        MatrixC z = MatrixC::Zero(7, 7);
        CHECK(max_abs(matrix_exponential(z) - MatrixC::Identity(7, 7)) < 1e-14);
    }
    SUBCASE("diagonal case") {
        MatrixC d = MatrixC::Zero(4, 4);
        d.diagonal() << Complex(0.3, 0), Complex(-1.2, 0.5), Complex(0, 2.0), Complex(4.0, -1.0);
        MatrixC e = matrix_exponential(d);
        for (int i = 0; i < 4; ++i) {
            CHECK(std::abs(e(i, i) - std::exp(d(i, i))) < 1e-12 * std::abs(std::exp(d(i, i))));
        }
        e.diagonal().setZero();
        CHECK(max_abs(e) < 1e-12);
    }
    SUBCASE("non-finite input throws") {
        MatrixC bad = MatrixC::Zero(3, 3);
        bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(matrix_exponential(bad), SimError);
    }
}

TEST_CASE("fidelity_trace") {
    HilbertLayout lay{35, 1};
    SUBCASE("identical pure states") {
        QuantumState s = coherent_state(Complex(0.9, 0.2), lay);
        CHECK(std::abs(fidelity_trace(s, s) - 1.0) < 1e-10);
    }
    SUBCASE("orthogonal Fock states") {
        CHECK(std::abs(fidelity_trace(fock_state(0, lay), fock_state(1, lay))) < 1e-12);
    }
    SUBCASE("|a> vs |-a> overlap e^{-4|a|^2}") {
        Complex a(1.42, 0.0);
        double f = fidelity_trace(coherent_state(a, lay), coherent_state(-a, lay));
        CHECK(std::abs(f - std::exp(-4.0 * std::norm(a))) < 1e-6);
        CHECK(f == doctest::Approx(3.13e-4).epsilon(0.01));
    }
    SUBCASE("symmetry and mixed states") {
        QuantumState a = coherent_state(Complex(0.7, 0.0), lay);
        MatrixC rho = 0.5 * a.density_matrix() +
                      0.5 * fock_state(2, lay).density_matrix();
        QuantumState mixed = QuantumState::density(lay, rho);
        CHECK(fidelity_trace(a, mixed) == doctest::Approx(fidelity_trace(mixed, a)));
        // Tr[rho |a><a|] = 0.5 + 0.5 |<2|a>|^2
        VectorC av = a.vector();
        double expected = 0.5 + 0.5 * std::norm(av(2));
        CHECK(fidelity_trace(a, mixed) == doctest::Approx(expected).epsilon(1e-10));
    }
    SUBCASE("layout mismatch throws") {
        CHECK_THROWS_AS(fidelity_trace(fock_state(0, lay), fock_state(0, {10, 1})), SimError);
    }
}

TEST_CASE("state invariants enforced at construction") {
    HilbertLayout lay{5, 1};
    SUBCASE("norm") {
        VectorC v = VectorC::Zero(5);
        v(0) = 2.0;
        CHECK_THROWS_AS(QuantumState::pure(lay, v), SimError);
    }
    SUBCASE("hermiticity") {
        MatrixC m = MatrixC::Zero(5, 5);
        m(0, 0) = 1.0;
        m(0, 1) = Complex(0.5, 0.0);  // missing conjugate partner
        CHECK_THROWS_AS(QuantumState::density(lay, m), SimError);
    }
    SUBCASE("trace") {
        MatrixC m = MatrixC::Identity(5, 5);
        CHECK_THROWS_AS(QuantumState::density(lay, m), SimError);
    }
    SUBCASE("positivity") {
        MatrixC m = MatrixC::Zero(5, 5);
        m(0, 0) = 1.5;
        m(1, 1) = -0.5;
        CHECK_THROWS_AS(QuantumState::density(lay, m), SimError);
    }
}

TEST_CASE("coherent-state photon statistics are Poissonian") {
    HilbertLayout lay{40, 1};
    Complex alpha(1.6, 0.4);
    QuantumState coh = coherent_state(alpha, lay);
    const VectorC& v = coh.vector();
    double nbar = std::norm(alpha);
    double logw = -nbar;
    for (int n = 0; n < 30; ++n) {
        CHECK(std::abs(std::norm(v(n)) - std::exp(logw)) < 1e-8);
        logw += std::log(nbar) - std::log(double(n + 1));
    }
}

TEST_CASE("truncation convergence of the displacement") {
    Complex alpha(1.2, -0.9);
    OperatorMatrix small = displacement(alpha, {30, 1});
    OperatorMatrix mid = displacement(alpha, {45, 1});
    OperatorMatrix big = displacement(alpha, {60, 1});
    double err_small = max_abs(big.m.topLeftCorner(15, 15) - small.m.topLeftCorner(15, 15));
    double err_mid = max_abs(big.m.topLeftCorner(15, 15) - mid.m.topLeftCorner(15, 15));
    CHECK(err_small < 1e-8);
    CHECK(err_mid < err_small);
}

TEST_CASE("partial trace over the qubit") {
    HilbertLayout joint{8, 2};
    // |g> (x) |2>
    VectorC v = VectorC::Zero(16);
    v(2) = 1.0;
    QuantumState red = partial_trace_qubit(QuantumState::pure(joint, v));
    CHECK(red.layout().qubit_levels == 1);
    CHECK(fidelity_trace(red, fock_state(2, {8, 1})) == doctest::Approx(1.0));

    // (|g,0> + |e,1>)/sqrt(2) -> maximally mixed over {|0>,|1>}
    VectorC w = VectorC::Zero(16);
    w(0) = 1.0 / std::sqrt(2.0);
    w(8 + 1) = 1.0 / std::sqrt(2.0);
    QuantumState red2 = partial_trace_qubit(QuantumState::pure(joint, w));
    MatrixC rho = red2.density_matrix();
    CHECK(rho(0, 0).real() == doctest::Approx(0.5));
    CHECK(rho(1, 1).real() == doctest::Approx(0.5));
    CHECK(std::abs(rho(0, 1)) < 1e-12);
}

TEST_CASE("random unitaries preserve norm (property, 100 instances)") {
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss(0.0, 1.0);
    HilbertLayout lay{8, 1};
    for (int trial = 0; trial < 100; ++trial) {
        MatrixC h(8, 8);
        for (int i = 0; i < 8; ++i) {
            for (int j = 0; j < 8; ++j) h(i, j) = Complex(gauss(rng), gauss(rng));
        }
        h = 0.5 * (h + h.adjoint()).eval();
        MatrixC u = matrix_exponential(Complex(0.0, -1.0) * h);
        CHECK(max_abs(u.adjoint() * u - MatrixC::Identity(8, 8)) < 1e-8);
        VectorC psi(8);
        for (int i = 0; i < 8; ++i) psi(i) = Complex(gauss(rng), gauss(rng));
        psi.normalize();
        CHECK(std::abs((u * psi).norm() - 1.0) < 1e-9);
    }
}
