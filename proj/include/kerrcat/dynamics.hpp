#pragma once

#include <vector>

#include "kerrcat/hilbert.hpp"

namespace kerrcat {

// Angular-frequency conversion: ordinary MHz -> rad/ns.
inline double mhz_to_angular(double f_mhz) {
    return 6.283185307179586476925286766559e-3 * f_mhz;
}

// Rotating-frame Hamiltonian parameters (ordinary MHz; conversion to angular
// rad/ns happens at assembly).  The dispersive term is -chi a†a |e><e|: one
// resonator photon shifts the qubit transition by the full chi, so a Ramsey
// wait of pi/chi imprints the photon parity.
struct RotatingFrameHamiltonian {
    HilbertLayout layout;
    double detuning_res_mhz = 0.0;
    double kerr_mhz = 0.0;
    double chi_mhz = 0.0;
    double qubit_detuning_mhz = 0.0;
    Complex drive_amp_mhz = 0.0;
};

// H = Delta_s n + (K/2) n^2 - chi n |e><e| + Delta_q |e><e| + (eps a† + eps* a),
// in rad/ns.
OperatorMatrix assemble_hamiltonian(const RotatingFrameHamiltonian& params);

// exp(-i H t) |psi> (or rho -> U rho U†).  H in rad/ns, t in ns.
QuantumState evolve_unitary(const OperatorMatrix& h, double t_ns, const QuantumState& state);

// Diagonal Kerr-evolution unitary e^{+i (K/2) n^2 tau} on the resonator factor.
OperatorMatrix kerr_cat_propagator(double k_mhz, double tau_ns, const HilbertLayout& layout);

enum class ChannelKind { photon_loss, qubit_decay, qubit_dephasing };

struct CollapseChannel {
    ChannelKind kind = ChannelKind::photon_loss;
    double rate_per_us = 0.0;
};

// Collapse operator scaled by sqrt(rate), in 1/sqrt(ns) units.
OperatorMatrix collapse_operator(const CollapseChannel& ch, const HilbertLayout& layout);

// Fixed-step RK4 integration of the Lindblad master equation
//   drho/dt = -i[H, rho] + sum_k (L rho L† - 1/2 {L†L, rho}).
// When check_step is set, the full evolution is re-run at dt/2 and the trace
// distance between the two results must stay below 1e-6 (StepTooLarge).
QuantumState evolve_lindblad(const OperatorMatrix& h,
                             const std::vector<CollapseChannel>& channels,
                             const QuantumState& rho, double t_ns, double dt_ns,
                             bool check_step = true);

enum class PulseShape { square, gaussian, sinc };

struct PulseEnvelope {
    PulseShape shape = PulseShape::square;
    double amplitude_mhz = 0.0;
    double duration_ns = 0.0;
    double carrier_detuning_mhz = 0.0;
    double gaussian_sigma_ns = 0.0;    // gaussian only
    double sinc_lobe_width_ns = 0.0;   // sinc only: center-to-first-zero time

    void validate() const;
};

// Shaped complex amplitude at time t (OutOfWindow outside [0, duration]).
Complex sample_envelope(const PulseEnvelope& p, double t_ns);

// Normalized spectral response of the envelope at a drive detuning:
// |integral env(t) e^{i 2pi f t} dt| / integral env(t) dt.  Used to model
// the finite selectivity bandwidth of shaped qubit pulses.
double envelope_spectral_response(const PulseEnvelope& p, double detuning_mhz);

}  // namespace kerrcat
