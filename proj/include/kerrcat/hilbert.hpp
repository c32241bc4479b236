#pragma once

#include <Eigen/Dense>
#include <complex>

#include "kerrcat/errors.hpp"

namespace kerrcat {

using Complex = std::complex<double>;
using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;

// Truncated Hilbert-space layout.  The resonator is a D-level Fock ladder;
// an optional two-level ancilla sits in front of it with the fixed ordering
// qubit (x) resonator, i.e. index = q*D + n for qubit level q and Fock n.
struct HilbertLayout {
    int resonator_dim = 0;
    int qubit_levels = 1;  // 1 = resonator only, 2 = with ancilla

    int dim() const { return qubit_levels * resonator_dim; }

    void validate() const;

    bool operator==(const HilbertLayout& other) const {
        return resonator_dim == other.resonator_dim && qubit_levels == other.qubit_levels;
    }
};

// Dense operator tied to a layout.
struct OperatorMatrix {
    HilbertLayout layout;
    MatrixC m;

    OperatorMatrix() = default;
    OperatorMatrix(const HilbertLayout& lay, MatrixC mat);
};

// Pure state or density matrix on a layout.  Construction validates the
// physicality invariants (unit norm / Hermitian, trace-one, PSD).
class QuantumState {
public:
    static QuantumState pure(const HilbertLayout& layout, VectorC psi);
    static QuantumState density(const HilbertLayout& layout, MatrixC rho);

    const HilbertLayout& layout() const { return layout_; }
    bool is_pure() const { return is_pure_; }
    const VectorC& vector() const;
    // Density matrix view; pure states are promoted to projectors on demand.
    MatrixC density_matrix() const;

    // Expectation value of a Hermitian (or at least layout-matching) operator.
    double expectation(const OperatorMatrix& op) const;

private:
    QuantumState() = default;
    HilbertLayout layout_;
    bool is_pure_ = true;
    VectorC psi_;
    MatrixC rho_;
};

struct Ladder {
    OperatorMatrix a;
    OperatorMatrix a_dagger;
    OperatorMatrix number;
};

// Annihilation/creation/number operators acting as identity on the qubit factor.
Ladder make_ladder(const HilbertLayout& layout);

// Lift a D x D resonator-only matrix to the full layout (identity on the qubit).
MatrixC embed_resonator(const MatrixC& op, const HilbertLayout& layout);

// Lift a 2 x 2 qubit matrix to the full layout (identity on the resonator).
MatrixC embed_qubit(const Eigen::Matrix2cd& op, const HilbertLayout& layout);

// exp(alpha a† - alpha* a).  Enforces the truncation-adequacy guard
// |alpha|^2 + 6|alpha| + 10 <= resonator_dim.
OperatorMatrix displacement(Complex alpha, const HilbertLayout& layout);

// Minimum resonator dimension the displacement guard accepts for |alpha|.
int min_dim_for_displacement(double abs_alpha);

// (-1)^n on the resonator factor, identity on the qubit factor.
OperatorMatrix parity_operator(const HilbertLayout& layout);

// Dense matrix exponential by Pade-13 scaling and squaring.
MatrixC matrix_exponential(const MatrixC& m);
OperatorMatrix matrix_exponential(const OperatorMatrix& m);

// Tr[rho1 rho2]; pure states are treated as projectors, so this is the usual
// squared-overlap fidelity for pure inputs.
double fidelity_trace(const QuantumState& s1, const QuantumState& s2);

// Fock basis vector |n> (resonator factor; qubit in |g> when present).
QuantumState fock_state(int n, const HilbertLayout& layout);

// Coherent state from the analytic amplitudes e^{-|a|^2/2} a^n / sqrt(n!).
QuantumState coherent_state(Complex alpha, const HilbertLayout& layout);

// Resonator reduced state of a joint qubit (x) resonator state.
QuantumState partial_trace_qubit(const QuantumState& state);

}  // namespace kerrcat
