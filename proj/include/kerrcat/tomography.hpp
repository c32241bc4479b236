#pragma once

#include <string>

#include "kerrcat/dynamics.hpp"
#include "kerrcat/hilbert.hpp"

namespace kerrcat {

// Rectangular phase-space grid specification.  Grid point (ix, iy) sits at
// gamma = re(ix) + i*im(iy) with both axes sampled inclusively.
struct WignerGridSpec {
    double re_min = -3.0, re_max = 3.0;
    double im_min = -3.0, im_max = 3.0;
    int nx = 101, ny = 101;

    void validate() const;
    double re_at(int ix) const { return re_min + (re_max - re_min) * ix / double(nx - 1); }
    double im_at(int iy) const { return im_min + (im_max - im_min) * iy / double(ny - 1); }
    double cell_area() const {
        return (re_max - re_min) / (nx - 1) * (im_max - im_min) / (ny - 1);
    }
    static WignerGridSpec centered(double half_extent, int n);
};

struct WignerGrid {
    WignerGridSpec spec;
    Eigen::MatrixXd values;  // values(iy, ix)
    std::string convention = "W(gamma) = (2/pi) Tr[D(-gamma) rho D(gamma) P]";
};

// Exact displaced-parity Wigner function, evaluated with the spectral fast
// path (one eigendecomposition per layout); matches the matrix-exponential
// displacement to 1e-10.  Resonator-only states; threads >= 1.
WignerGrid wigner_exact(const QuantumState& rho, const WignerGridSpec& spec, int threads = 1);

// Reference displaced-parity evaluation through the Pade displacement
// operator (slow; used to validate the fast path).
double wigner_point_reference(const QuantumState& rho, Complex gamma);

struct RamseyPulses {
    bool ideal = true;          // instantaneous pi/2 rotations
    PulseEnvelope pi2_pulse;    // finite-bandwidth mode: per-Fock rotation angle
                                // scaled by the envelope's spectral response
};

// Protocol-faithful Wigner: D(-gamma), ancilla Ramsey (pi/2, dispersive wait
// pi/chi, pi/2), parity from qubit excitation, W = (2/pi)(2 p_e - 1).
// Vacuum anchors the sign at +2/pi.
WignerGrid wigner_ramsey(const QuantumState& resonator_state, double chi_mhz,
                         const RamseyPulses& pulses, const WignerGridSpec& spec,
                         int threads = 1);

// F = pi * sum W1*W2 * cell_area (GridMismatch when the grids differ).
double fidelity_wigner(const WignerGrid& w1, const WignerGrid& w2);

// Riemann integral of W over the grid (normalization check helper).
double wigner_integral(const WignerGrid& w);

struct CoherentFit {
    Complex alpha0;
    double amplitude = 0.0;
    double rms_residual = 0.0;
};

// Nonlinear least squares of W = A exp(-2|gamma - alpha0|^2).
CoherentFit fit_coherent_gaussian(const WignerGrid& w);

}  // namespace kerrcat
