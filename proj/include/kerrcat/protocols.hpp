#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kerrcat/dynamics.hpp"
#include "kerrcat/hilbert.hpp"
#include "kerrcat/snail.hpp"

namespace kerrcat {

// ---------------------------------------------------------------------------
// Declarative pulse sequences

struct DisplaceStep {
    Complex alpha;
};
struct FluxWindowStep {
    double k_mhz = 0.0;   // Kerr during the window
    double tau_ns = 0.0;
};
struct QubitRotationStep {
    char axis = 'y';          // 'x', 'y' or 'z'
    double angle_rad = 0.0;
    // Rotation applies only to Fock sectors n < max_photon when set
    // (photon-number-selective pulse); unconditional otherwise.
    std::optional<int> max_photon;
};
struct WaitStep {
    double tau_ns = 0.0;
    double chi_mhz = 0.0;  // dispersive wait; 0 = free wait (identity in frame)
};
struct MeasureQubitStep {};   // project the ancilla on |g> and renormalize
struct MeasureParityStep {};  // record resonator parity expectation

using SequenceStep = std::variant<DisplaceStep, FluxWindowStep, QubitRotationStep,
                                  WaitStep, MeasureQubitStep, MeasureParityStep>;

struct PulseSequence {
    HilbertLayout layout;
    std::vector<SequenceStep> steps;

    void validate() const;
};

std::string sequence_to_json(const PulseSequence& seq);
PulseSequence sequence_from_json(const std::string& text);

struct SequenceResult {
    QuantumState state;                 // final (joint) state
    std::optional<double> parity;      // last MeasureParity reading
    std::optional<double> p_ground;    // pre-projection |g> probability
};

SequenceResult run_sequence(const PulseSequence& seq);

// ---------------------------------------------------------------------------
// Cat-state generation

// D(alpha) then Kerr evolution for tau = (2 pi / K) / m.
QuantumState generate_kerr_cat(Complex alpha, double k_mhz, int m, const HilbertLayout& layout);

enum class CatBranch { odd, even };

// Ancilla-assisted odd/even cat: pi/2, D(alpha), dispersive wait (pi/chi for
// odd, 3 pi/chi for even), D(alpha), photon-number-conditional pi rotation,
// D(-alpha), projection on |g>.  Returns the resonator reduced state.
// conditional_max_photon selects the pulse window (sectors n < value); the
// default 1 is the empty-resonator-selective pulse.
QuantumState generate_odd_even_cat(Complex alpha, double chi_mhz, CatBranch branch,
                                   const HilbertLayout& layout,
                                   std::optional<int> conditional_max_photon = std::nullopt);

// ---------------------------------------------------------------------------
// Storage

// Snapshots of the state after each dt under residual Kerr + collapse
// channels (closed-form diagonal evolution when no channels are given).
std::vector<QuantumState> preserve_state(const QuantumState& state,
                                         const std::vector<double>& dt_list_ns,
                                         const std::vector<CollapseChannel>& channels,
                                         double k_residual_mhz, double rk4_dt_ns = 1.0);

// ---------------------------------------------------------------------------
// Kerr measurement

struct SingleToneResult {
    double k_mhz_measured = 0.0;
    std::vector<double> nbar;         // photon number at each dip
    std::vector<double> center_mhz;   // dip drive-frequency offset from bare
    double r_squared = 1.0;
};

// Steady-state response of the driven Kerr resonator probed through the
// vacuum population; dip centers regressed against photon number.  The drive
// linewidth is the Fourier width 1/duration of the pulse envelope.
SingleToneResult single_tone_kerr(const FluxPoint& dev_point, const PulseEnvelope& drive,
                                  const std::vector<double>& amp_list_mhz,
                                  const HilbertLayout& layout);

// Drive amplitude (MHz) that parks the on-resonance response at nbar photons
// for the given probe pulse.
double single_tone_amp_for_nbar(double nbar, const PulseEnvelope& drive);

struct RabiTrace {
    std::vector<double> t_ns;
    std::vector<double> population;
    double period_ns = 0.0;
};

struct TwoToneResult {
    double k_mhz_measured = 0.0;
    double f01_mhz = 0.0;
    double f12_mhz = 0.0;
    RabiTrace rabi01;
    RabiTrace rabi12;
};

// Qutrit-style spectroscopy: narrowband drive sweeps locate the 0<->1 and
// 1<->2 transition peaks; K = f12 - f01.
TwoToneResult two_tone_kerr(const FluxPoint& dev_point, const HilbertLayout& layout);

// ---------------------------------------------------------------------------
// Calibration helpers

struct SpectroscopyResult {
    std::vector<double> freq_mhz;    // qubit drive detuning from the n=0 line
    std::vector<double> p_excited;
    std::vector<double> peak_centers_mhz;
    std::vector<double> peak_weights;
    double peak_width_mhz = 0.0;

    void validate() const;
};

// Synthetic photon-number-split qubit spectrum of a coherent state: a
// Lorentzian comb at -n*chi with Poisson weights.
SpectroscopyResult make_qubit_spectrum(double nbar, double chi_mhz, double linewidth_mhz,
                                       double f_lo_mhz, double f_hi_mhz, int n_points);

struct PhotonCalibration {
    double g = 0.0;                 // alpha = G * V
    std::vector<double> nbar;       // Poisson-fitted photon number per spectrum
    double worst_fit_residual = 0.0;
};

// Poisson route: decompose each spectrum into the photon-number comb, fit the
// weights to a Poisson distribution, regress sqrt(nbar) against amplitude.
PhotonCalibration calibrate_photon_number(const std::vector<SpectroscopyResult>& spectra,
                                          const std::vector<double>& amps,
                                          double chi_mhz, double linewidth_mhz);

// Wigner-Gaussian route: regress the |alpha0| centers recovered by
// fit_coherent_gaussian against drive amplitude (zero-intercept).
double photon_scale_from_wigner(const std::vector<std::pair<double, Complex>>& amp_center_pairs);

struct DecoherenceFit {
    double kappa_per_us = 0.0;
    double contrast = 1.0;          // preparation/readout contrast factor
    double rms_residual = 0.0;      // in fidelity units (0..1)
};

// Fit photon-loss rate plus a global contrast factor to fidelity-vs-time
// targets for a stored 2-component cat of the given size.
DecoherenceFit calibrate_decoherence(const std::vector<std::pair<double, double>>& targets,
                                     Complex alpha, const HilbertLayout& layout,
                                     double rk4_dt_ns = 2.0);

}  // namespace kerrcat
