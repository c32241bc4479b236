#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kerrcat/errors.hpp"

namespace kerrcat {

// Piecewise-linear dispersive-shift table chi(phi_ext), clamped outside the
// tabulated flux range.  Flux is expressed as phi_ext in radians throughout.
struct ChiTable {
    // (phi_ext_over_2pi, chi_mhz) pairs, sorted by flux.
    std::vector<std::pair<double, double>> points;

    static ChiTable constant(double chi_mhz);
    double at(double phi_ext) const;  // phi_ext in radians
    void validate() const;
};

// Circuit + ancilla parameters.  Energies in GHz*h, shifts in MHz, ordinary
// (non-angular) frequencies.
struct SnailDevice {
    double beta = 0.095;
    double ej_ghz = 830.0;
    double ec_ghz = 0.0;
    double el_ghz = 0.0;
    double kq_mhz = -420.0;      // transmon anharmonicity, negative
    double omega_q_ghz = 5.095;  // ancilla frequency (bookkeeping only)
    ChiTable chi = ChiTable::constant(4.35);

    void validate() const;
};

// Derived quantities at one external flux.
struct FluxPoint {
    double phi_ext = 0.0;  // radians (2*pi * Phi_ext / Phi_0)
    double phi_min = 0.0;  // effective-potential minimum (radians)
    double c2 = 0.0, c3 = 0.0, c4 = 0.0;  // dimensionless Taylor coefficients
    double omega_s_ghz = 0.0;
    double g3_mhz = 0.0, g4_mhz = 0.0;
    double chi_mhz = 0.0;
    double ks_mhz = 0.0, kqs_mhz = 0.0, k_mhz = 0.0;  // K = K_s + K_qs
};

// SNAIL loop potential (GHz*h):
//   U(phi) = -beta EJ cos(phi) - 3 EJ cos((phi_ext - phi)/3)
double snail_potential(double phi, double phi_ext, const SnailDevice& dev);

// Effective single-mode potential: min over phi_s of
//   0.5 EL (phi - phi_s)^2 + U_snail(phi_s),
// solved by damped Newton continuation from `guess` (defaults to phi).
double effective_potential(double phi, double phi_ext, const SnailDevice& dev,
                           std::optional<double> guess = std::nullopt);

// Exact gradient of the effective potential via the envelope theorem:
//   dU/dphi = EL (phi - phi_s*(phi)).
double effective_gradient(double phi, double phi_ext, const SnailDevice& dev,
                          std::optional<double> guess = std::nullopt);

struct TaylorCoefficients {
    double phi_min = 0.0;
    double c2 = 0.0, c3 = 0.0, c4 = 0.0;
};

// Potential minimum and Taylor coefficients c_j = (1/EJ) d^jU/dphi^j by
// Richardson-extrapolated central differences of the exact gradient.
TaylorCoefficients taylor_coefficients(double phi_ext, const SnailDevice& dev,
                                       std::optional<double> guess = std::nullopt);

// All mode parameters at one flux point.
FluxPoint mode_parameters(double phi_ext, const SnailDevice& dev,
                          std::optional<double> guess = std::nullopt);

// Sweep with continuation in flux (previous phi_min seeds the next point).
std::vector<FluxPoint> flux_sweep(const SnailDevice& dev, double phi_lo, double phi_hi,
                                  int n_points);

// Brent root of K(phi_ext) on [phi_lo, phi_hi]; |K| < 1e-4 MHz at the root.
double kerr_free_flux(const SnailDevice& dev, double phi_lo, double phi_hi);

// Fill in EC and EL from two anchors: omega_s(anchor_phi) = anchor_omega_ghz
// and K(anchor_phi) = 0.  beta, EJ, chi, Kq are taken from `base`.
SnailDevice calibrate_anchored(const SnailDevice& base, double anchor_phi,
                               double anchor_omega_ghz);

struct CalibrationResult {
    SnailDevice device;
    double rms_residual_ghz = 0.0;
    int iterations = 0;
};

// Least-squares fit of (beta, EJ, EC, EL) to an omega_s(phi_ext) curve.
// With anchors, EC and EL are eliminated through calibrate_anchored and only
// (beta, EJ) are free.
CalibrationResult calibrate(const std::vector<std::pair<double, double>>& curve,
                            std::optional<std::pair<double, double>> anchors,
                            const SnailDevice& initial_guess);

}  // namespace kerrcat
