#include "kerrcat/dynamics.hpp"

#include <cmath>

namespace kerrcat {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

void require_hermitian(const MatrixC& h) {
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
        throw SimError(ErrorKind::NonHermitian, "Hamiltonian is not Hermitian");
    }
}

}  // namespace

OperatorMatrix assemble_hamiltonian(const RotatingFrameHamiltonian& params) {
    const HilbertLayout& lay = params.layout;
    lay.validate();
    int d = lay.resonator_dim;
    double ds = mhz_to_angular(params.detuning_res_mhz);
    double k = mhz_to_angular(params.kerr_mhz);
    double chi = mhz_to_angular(params.chi_mhz);
    double dq = mhz_to_angular(params.qubit_detuning_mhz);
    Complex eps(mhz_to_angular(params.drive_amp_mhz.real()),
                mhz_to_angular(params.drive_amp_mhz.imag()));

    MatrixC h = MatrixC::Zero(lay.dim(), lay.dim());
    for (int q = 0; q < lay.qubit_levels; ++q) {
        for (int n = 0; n < d; ++n) {
            int i = q * d + n;
            h(i, i) = ds * n + 0.5 * k * double(n) * double(n);
            if (q == 1) h(i, i) += dq - chi * n;
        }
    }
    if (eps != Complex(0.0)) {
        for (int q = 0; q < lay.qubit_levels; ++q) {
            for (int n = 1; n < d; ++n) {
                int i = q * d + n;
                h(i, i - 1) += eps * std::sqrt(double(n));       // eps a†
                h(i - 1, i) += std::conj(eps) * std::sqrt(double(n));  // eps* a
            }
        }
    }
    return OperatorMatrix(lay, h);
}

QuantumState evolve_unitary(const OperatorMatrix& h, double t_ns, const QuantumState& state) {
    if (!(h.layout == state.layout())) {
        throw SimError(ErrorKind::LayoutMismatch, "Hamiltonian layout does not match state");
    }
    require_hermitian(h.m);
    MatrixC u = matrix_exponential(Complex(0.0, -t_ns) * h.m);
    if (state.is_pure()) {
        VectorC psi = u * state.vector();
        double norm = psi.norm();
        if (std::abs(norm - 1.0) > 1e-9) {
            throw SimError(ErrorKind::NonFinite, "unitary evolution lost norm");
        }
        psi /= norm;
        return QuantumState::pure(state.layout(), psi);
    }
    MatrixC rho = u * state.density_matrix() * u.adjoint();
    rho = 0.5 * (rho + rho.adjoint().eval());
    return QuantumState::density(state.layout(), rho);
}

OperatorMatrix kerr_cat_propagator(double k_mhz, double tau_ns, const HilbertLayout& layout) {
    layout.validate();
    double k = mhz_to_angular(k_mhz);
    int d = layout.resonator_dim;
    MatrixC u = MatrixC::Zero(d, d);
    for (int n = 0; n < d; ++n) {
        u(n, n) = std::exp(Complex(0.0, 0.5 * k * double(n) * double(n) * tau_ns));
    }
    return OperatorMatrix(layout, embed_resonator(u, layout));
}

OperatorMatrix collapse_operator(const CollapseChannel& ch, const HilbertLayout& layout) {
    layout.validate();
    if (ch.rate_per_us < 0.0) {
        throw SimError(ErrorKind::ConfigError, "collapse rate must be non-negative");
    }
    double rate_per_ns = ch.rate_per_us * 1e-3;
    double s = std::sqrt(rate_per_ns);
    int d = layout.resonator_dim;
    switch (ch.kind) {
        case ChannelKind::photon_loss: {
            MatrixC a = MatrixC::Zero(d, d);
            for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
            return OperatorMatrix(layout, s * embed_resonator(a, layout));
        }
        case ChannelKind::qubit_decay: {
            Eigen::Matrix2cd sm = Eigen::Matrix2cd::Zero();
            sm(0, 1) = 1.0;  // |g><e|
            return OperatorMatrix(layout, s * embed_qubit(sm, layout));
        }
        case ChannelKind::qubit_dephasing: {
            // L = sqrt(rate/2) sigma_z: qubit coherences decay at `rate`.
            Eigen::Matrix2cd sz = Eigen::Matrix2cd::Zero();
            sz(0, 0) = 1.0;
            sz(1, 1) = -1.0;
            return OperatorMatrix(layout, std::sqrt(rate_per_ns / 2.0) * embed_qubit(sz, layout));
        }
    }
    throw SimError(ErrorKind::ConfigError, "unknown collapse channel kind");
}

namespace {

MatrixC lindblad_rhs(const MatrixC& h, const std::vector<MatrixC>& ls,
                     const std::vector<MatrixC>& ldl, const MatrixC& rho) {
    MatrixC out = Complex(0.0, -1.0) * (h * rho - rho * h);
    for (size_t k = 0; k < ls.size(); ++k) {
        out += ls[k] * rho * ls[k].adjoint();
        out -= 0.5 * (ldl[k] * rho + rho * ldl[k]);
    }
    return out;
}

MatrixC rk4_run(const MatrixC& h, const std::vector<MatrixC>& ls,
                const std::vector<MatrixC>& ldl, MatrixC rho, double t, double dt) {
    int n_steps = std::max(1, int(std::ceil(t / dt - 1e-12)));
    double hstep = t / n_steps;
    for (int s = 0; s < n_steps; ++s) {
        MatrixC k1 = lindblad_rhs(h, ls, ldl, rho);
        MatrixC k2 = lindblad_rhs(h, ls, ldl, rho + 0.5 * hstep * k1);
        MatrixC k3 = lindblad_rhs(h, ls, ldl, rho + 0.5 * hstep * k2);
        MatrixC k4 = lindblad_rhs(h, ls, ldl, rho + hstep * k3);
        rho += (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        rho = 0.5 * (rho + rho.adjoint().eval());  // enforce Hermiticity
    }
    return rho;
}

}  // namespace

QuantumState evolve_lindblad(const OperatorMatrix& h,
                             const std::vector<CollapseChannel>& channels,
                             const QuantumState& state, double t_ns, double dt_ns,
                             bool check_step) {
    if (!(h.layout == state.layout())) {
        throw SimError(ErrorKind::LayoutMismatch, "Hamiltonian layout does not match state");
    }
    if (dt_ns <= 0.0 || t_ns < 0.0) {
        throw SimError(ErrorKind::ConfigError, "need dt > 0 and t >= 0");
    }
    if (dt_ns > t_ns && t_ns > 0.0) dt_ns = t_ns;
    require_hermitian(h.m);

    std::vector<MatrixC> ls, ldl;
    for (const auto& ch : channels) {
        MatrixC l = collapse_operator(ch, h.layout).m;
        ldl.push_back(l.adjoint() * l);
        ls.push_back(std::move(l));
    }

    MatrixC rho0 = state.density_matrix();
    if (t_ns == 0.0) return QuantumState::density(state.layout(), rho0);

    MatrixC rho = rk4_run(h.m, ls, ldl, rho0, t_ns, dt_ns);
    if (check_step) {
        MatrixC rho_half = rk4_run(h.m, ls, ldl, rho0, t_ns, 0.5 * dt_ns);
        // trace distance = 1/2 sum of singular values of the difference
        Eigen::JacobiSVD<MatrixC> svd(rho - rho_half);
        if (0.5 * svd.singularValues().sum() > 1e-6) {
            throw SimError(ErrorKind::StepTooLarge,
                           "halving dt changes the Lindblad result by more than 1e-6");
        }
        rho = rho_half;  // keep the more accurate solution
    }
    double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > 1e-7) {
        throw SimError(ErrorKind::StepTooLarge, "Lindblad evolution lost trace normalization");
    }
    rho /= tr;
    return QuantumState::density(state.layout(), rho);
}

void PulseEnvelope::validate() const {
    if (duration_ns <= 0.0) {
        throw SimError(ErrorKind::ConfigError, "pulse duration must be positive");
    }
    if (shape == PulseShape::gaussian && gaussian_sigma_ns <= 0.0) {
        throw SimError(ErrorKind::ConfigError, "gaussian pulse needs sigma > 0");
    }
    if (shape == PulseShape::sinc && sinc_lobe_width_ns <= 0.0) {
        throw SimError(ErrorKind::ConfigError, "sinc pulse needs a positive lobe width");
    }
}

Complex sample_envelope(const PulseEnvelope& p, double t_ns) {
    p.validate();
    if (t_ns < 0.0 || t_ns > p.duration_ns) {
        throw SimError(ErrorKind::OutOfWindow, "sample time outside the pulse window");
    }
    double env = 0.0;
    double tc = t_ns - 0.5 * p.duration_ns;
    switch (p.shape) {
        case PulseShape::square:
            env = 1.0;
            break;
        case PulseShape::gaussian:
            env = std::exp(-0.5 * tc * tc / (p.gaussian_sigma_ns * p.gaussian_sigma_ns));
            break;
        case PulseShape::sinc: {
            double x = kPi * tc / p.sinc_lobe_width_ns;
            env = (std::abs(x) < 1e-8) ? 1.0 : std::sin(x) / x;
            break;
        }
    }
    double phase = -mhz_to_angular(p.carrier_detuning_mhz) * t_ns;
    return p.amplitude_mhz * env * Complex(std::cos(phase), std::sin(phase));
}

double envelope_spectral_response(const PulseEnvelope& p, double detuning_mhz) {
    p.validate();
    // midpoint rule over the window; the carrier is excluded so this is the
    // baseband spectral weight at the requested detuning
    const int n = 2048;
    double dt = p.duration_ns / n;
    double w = mhz_to_angular(detuning_mhz);
    Complex acc = 0.0;
    double norm = 0.0;
    PulseEnvelope base = p;
    base.carrier_detuning_mhz = 0.0;
    base.amplitude_mhz = 1.0;
    for (int i = 0; i < n; ++i) {
        double t = (i + 0.5) * dt;
        double env = sample_envelope(base, t).real();
        double tc = t - 0.5 * p.duration_ns;
        acc += env * Complex(std::cos(w * tc), std::sin(w * tc));
        norm += env;
    }
    if (norm <= 0.0) {
        throw SimError(ErrorKind::ConfigError, "envelope has non-positive area");
    }
    return std::abs(acc) / norm;
}

}  // namespace kerrcat
