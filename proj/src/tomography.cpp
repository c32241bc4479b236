#include "kerrcat/tomography.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "kerrcat/numerics.hpp"

namespace kerrcat {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

// Spectral factorization of the displacement generator.  With A = a† - a
// (real antisymmetric) and iA = Q Lambda Q†,
//   D(gamma) = R(theta) Q e^{-i r Lambda} Q† R(theta)†,  gamma = r e^{i theta},
// where R(theta) = diag(e^{i n theta}) rotates phase space.  One
// eigendecomposition then serves every grid point at O(D^2) per point.
struct DisplacementKernel {
    MatrixC q;
    Eigen::VectorXd lambda;
    int dim;

    explicit DisplacementKernel(int d) : dim(d) {
        MatrixC a = MatrixC::Zero(d, d);
        for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
        MatrixC ia = Complex(0.0, 1.0) * (a.adjoint() - a);
        Eigen::SelfAdjointEigenSolver<MatrixC> es(ia);
        q = es.eigenvectors();
        lambda = es.eigenvalues();
    }

    // v = D(gamma)† psi = R Q e^{+i r Lambda} Q† R† psi
    VectorC displace_adjoint(Complex gamma, const VectorC& psi) const {
        double r = std::abs(gamma);
        double theta = (r > 0.0) ? std::arg(gamma) : 0.0;
        VectorC u(dim);
        for (int n = 0; n < dim; ++n) {
            u(n) = psi(n) * std::exp(Complex(0.0, -theta * n));
        }
        VectorC w = q.adjoint() * u;
        for (int n = 0; n < dim; ++n) {
            w(n) *= std::exp(Complex(0.0, r * lambda(n)));
        }
        VectorC v = q * w;
        for (int n = 0; n < dim; ++n) {
            v(n) *= std::exp(Complex(0.0, theta * n));
        }
        return v;
    }
};

// Decompose a state into weighted pure components (eigenbranches for density
// matrices) so grid evaluation only ever handles vectors.
struct PureBranches {
    std::vector<double> weights;
    std::vector<VectorC> vectors;

    explicit PureBranches(const QuantumState& state) {
        if (state.layout().qubit_levels != 1) {
            throw SimError(ErrorKind::LayoutMismatch,
                           "Wigner evaluation expects a resonator-only state");
        }
        if (state.is_pure()) {
            weights.push_back(1.0);
            vectors.push_back(state.vector());
            return;
        }
        Eigen::SelfAdjointEigenSolver<MatrixC> es(state.density_matrix());
        for (int k = 0; k < es.eigenvalues().size(); ++k) {
            double p = es.eigenvalues()(k);
            if (p > 1e-12) {
                weights.push_back(p);
                vectors.push_back(es.eigenvectors().col(k));
            }
        }
    }
};

// The displacement operator in a truncated space wraps around once the
// displaced state needs more photons than the space holds, so values far from
// the origin would be rounding junk instead of ~0.  Embedding the state in a
// larger zero-padded space (sized for the worst grid corner plus the state's
// own support) makes every grid point reliable at negligible cost.
int working_dim(const QuantumState& state, const WignerGridSpec& spec) {
    double g_max = 0.0;
    for (double re : {spec.re_min, spec.re_max}) {
        for (double im : {spec.im_min, spec.im_max}) {
            g_max = std::max(g_max, std::hypot(re, im));
        }
    }
    Ladder lad = make_ladder(state.layout());
    double alpha_eff = std::sqrt(std::max(state.expectation(lad.number), 0.0));
    return std::max(state.layout().resonator_dim,
                    min_dim_for_displacement(g_max + alpha_eff));
}

VectorC zero_pad(const VectorC& v, int dim) {
    VectorC out = VectorC::Zero(dim);
    out.head(v.size()) = v;
    return out;
}

void check_truncation(const QuantumState& state) {
    // adequacy guard on the state itself: the grid may extend far into the
    // tail region where W ~ 0, but the state's own support must leave the
    // headroom the displacement guard demands
    Ladder lad = make_ladder(state.layout());
    double nbar = state.expectation(lad.number);
    double alpha_eff = std::sqrt(std::max(nbar, 0.0));
    if (min_dim_for_displacement(alpha_eff) > state.layout().resonator_dim) {
        throw SimError(ErrorKind::TruncationTooSmall,
                       "state occupies too much of the truncated space for tomography");
    }
}

void run_rows(int ny, int threads, const std::function<void(int)>& row_job) {
    threads = std::max(1, threads);
    if (threads == 1) {
        for (int iy = 0; iy < ny; ++iy) row_job(iy);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (int iy = next.fetch_add(1); iy < ny; iy = next.fetch_add(1)) row_job(iy);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

void WignerGridSpec::validate() const {
    if (nx < 2 || ny < 2) {
        throw SimError(ErrorKind::ConfigError, "Wigner grid needs at least 2 points per axis");
    }
    if (!(re_max > re_min) || !(im_max > im_min)) {
        throw SimError(ErrorKind::ConfigError, "Wigner grid ranges must be increasing");
    }
}

WignerGridSpec WignerGridSpec::centered(double half_extent, int n) {
    WignerGridSpec s;
    s.re_min = -half_extent;
    s.re_max = half_extent;
    s.im_min = -half_extent;
    s.im_max = half_extent;
    s.nx = n;
    s.ny = n;
    s.validate();
    return s;
}

WignerGrid wigner_exact(const QuantumState& rho, const WignerGridSpec& spec, int threads) {
    spec.validate();
    check_truncation(rho);
    int d = working_dim(rho, spec);
    DisplacementKernel kernel(d);
    PureBranches branches(rho);
    for (auto& v : branches.vectors) v = zero_pad(v, d);

    WignerGrid out;
    out.spec = spec;
    out.values.resize(spec.ny, spec.nx);
    run_rows(spec.ny, threads, [&](int iy) {
        for (int ix = 0; ix < spec.nx; ++ix) {
            Complex gamma(spec.re_at(ix), spec.im_at(iy));
            double w = 0.0;
            for (size_t k = 0; k < branches.weights.size(); ++k) {
                VectorC v = kernel.displace_adjoint(gamma, branches.vectors[k]);
                double par = 0.0;
                for (int n = 0; n < d; ++n) {
                    par += ((n % 2 == 0) ? 1.0 : -1.0) * std::norm(v(n));
                }
                w += branches.weights[k] * par;
            }
            out.values(iy, ix) = (2.0 / kPi) * w;
        }
    });
    return out;
}

double wigner_point_reference(const QuantumState& rho, Complex gamma) {
    const HilbertLayout& lay = rho.layout();
    OperatorMatrix dm = displacement(-gamma, lay);
    OperatorMatrix p = parity_operator(lay);
    MatrixC m = dm.m * rho.density_matrix() * dm.m.adjoint() * p.m;
    return (2.0 / kPi) * m.trace().real();
}

WignerGrid wigner_ramsey(const QuantumState& resonator_state, double chi_mhz,
                         const RamseyPulses& pulses, const WignerGridSpec& spec,
                         int threads) {
    spec.validate();
    check_truncation(resonator_state);
    if (chi_mhz <= 0.0) {
        throw SimError(ErrorKind::ConfigError, "Ramsey tomography needs chi > 0");
    }
    int d = working_dim(resonator_state, spec);
    DisplacementKernel kernel(d);
    PureBranches branches(resonator_state);
    for (auto& v : branches.vectors) v = zero_pad(v, d);

    // Per-Fock pi/2 rotation angles.  Ideal pulses rotate every photon-number
    // sector by exactly pi/2; finite-bandwidth pulses see the qubit line of
    // sector n detuned by n*chi and rotate by the correspondingly reduced
    // spectral weight.
    std::vector<double> theta(d, 0.5 * kPi);
    if (!pulses.ideal) {
        for (int n = 0; n < d; ++n) {
            theta[n] = 0.5 * kPi * envelope_spectral_response(pulses.pi2_pulse, n * chi_mhz);
        }
    }
    // During the wait pi/chi the excited branch of sector n advances by
    // e^{i chi n tau} = (-1)^n; the qubit excitation after the second pi/2
    // then encodes the parity (vacuum -> p_e = 1 -> W = +2/pi).  Compose the
    // two-level sequence Ry(theta_n), phase (+-1)^n on |e>, Ry(theta_n)
    // starting from |g> and read off the |e> population.
    std::vector<double> pe_even(d), pe_odd(d);
    for (int n = 0; n < d; ++n) {
        double half = 0.5 * theta[n];
        auto compose = [&](double sign) {
            double g = std::cos(half), e = sign * std::sin(half);
            double e2 = std::sin(half) * g + std::cos(half) * e;
            return e2 * e2;
        };
        pe_even[n] = compose(+1.0);
        pe_odd[n] = compose(-1.0);
    }

    WignerGrid out;
    out.spec = spec;
    out.values.resize(spec.ny, spec.nx);
    out.convention += " (Ramsey parity readout)";
    run_rows(spec.ny, threads, [&](int iy) {
        for (int ix = 0; ix < spec.nx; ++ix) {
            Complex gamma(spec.re_at(ix), spec.im_at(iy));
            double pe = 0.0;
            for (size_t k = 0; k < branches.weights.size(); ++k) {
                VectorC v = kernel.displace_adjoint(gamma, branches.vectors[k]);
                for (int n = 0; n < d; ++n) {
                    pe += branches.weights[k] * std::norm(v(n)) *
                          ((n % 2 == 0) ? pe_even[n] : pe_odd[n]);
                }
            }
            out.values(iy, ix) = (2.0 / kPi) * (2.0 * pe - 1.0);
        }
    });
    return out;
}

double fidelity_wigner(const WignerGrid& w1, const WignerGrid& w2) {
    const WignerGridSpec& a = w1.spec;
    const WignerGridSpec& b = w2.spec;
    if (a.nx != b.nx || a.ny != b.ny || a.re_min != b.re_min || a.re_max != b.re_max ||
        a.im_min != b.im_min || a.im_max != b.im_max) {
        throw SimError(ErrorKind::GridMismatch, "Wigner grids differ in extent or resolution");
    }
    return kPi * (w1.values.array() * w2.values.array()).sum() * a.cell_area();
}

double wigner_integral(const WignerGrid& w) {
    return w.values.sum() * w.spec.cell_area();
}

CoherentFit fit_coherent_gaussian(const WignerGrid& w) {
    const WignerGridSpec& s = w.spec;
    // initialize at the grid maximum
    int iy0 = 0, ix0 = 0;
    w.values.maxCoeff(&iy0, &ix0);
    Eigen::VectorXd p0(3);
    p0 << s.re_at(ix0), s.im_at(iy0), std::max(w.values(iy0, ix0), 1e-3);

    const int nr = s.nx * s.ny;
    ResidualFn fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        int idx = 0;
        for (int iy = 0; iy < s.ny; ++iy) {
            for (int ix = 0; ix < s.nx; ++ix) {
                double dre = s.re_at(ix) - p(0);
                double dim = s.im_at(iy) - p(1);
                double model = p(2) * std::exp(-2.0 * (dre * dre + dim * dim));
                r(idx++) = model - w.values(iy, ix);
            }
        }
    };
    LMResult lm = levenberg_marquardt(fn, p0, nr);
    CoherentFit out;
    out.alpha0 = Complex(lm.params(0), lm.params(1));
    out.amplitude = lm.params(2);
    out.rms_residual = std::sqrt(2.0 * lm.cost / nr);
    return out;
}

}  // namespace kerrcat
