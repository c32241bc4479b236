#include "kerrcat/snail.hpp"

#include <algorithm>
#include <cmath>

#include "kerrcat/numerics.hpp"

namespace kerrcat {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Partial derivatives of the SNAIL loop potential with respect to phi_s.
double us0(double p, double pe, double beta, double ej) {
    return -beta * ej * std::cos(p) - 3.0 * ej * std::cos((pe - p) / 3.0);
}
double us1(double p, double pe, double beta, double ej) {
    return beta * ej * std::sin(p) - ej * std::sin((pe - p) / 3.0);
}
double us2(double p, double pe, double beta, double ej) {
    return beta * ej * std::cos(p) + (ej / 3.0) * std::cos((pe - p) / 3.0);
}

// Minimize 0.5 EL (phi - phi_s)^2 + U_snail(phi_s) over phi_s by Newton.
double inner_minimizer(double phi, double phi_ext, const SnailDevice& dev, double guess) {
    const double el = dev.el_ghz, beta = dev.beta, ej = dev.ej_ghz;
    // Convexity guard: when EL dominates the most negative curvature the
    // total function is strictly convex in phi_s and the minimum is unique.
    const double curvature_floor = el - beta * ej - ej / 3.0;
    double p = guess;
    for (int it = 0; it < 100; ++it) {
        double g = -el * (phi - p) + us1(p, phi_ext, beta, ej);
        double h = el + us2(p, phi_ext, beta, ej);
        if (h <= 0.0) {
            throw SimError(ErrorKind::MinimizationFailed,
                           "non-convex inner potential at phi_s = " + std::to_string(p));
        }
        double step = g / h;
        // damp outsized Newton steps so the iteration cannot branch-hop
        step = std::clamp(step, -1.0, 1.0);
        p -= step;
        if (std::abs(step) < 1e-14) {
            if (curvature_floor <= 0.0) {
                // weak-EL regime: confirm there is no second stationary point
                // in the physically reachable window around the solution
                int minima = 0;
                double prev = -el * (phi - (p - 3.0)) + us1(p - 3.0, phi_ext, beta, ej);
                for (int k = 1; k <= 60; ++k) {
                    double x = p - 3.0 + k * 0.1;
                    double cur = -el * (phi - x) + us1(x, phi_ext, beta, ej);
                    if (prev < 0.0 && cur >= 0.0) ++minima;
                    prev = cur;
                }
                if (minima > 1) {
                    throw SimError(ErrorKind::MinimizationFailed,
                                   "effective potential has multiple minima at this flux");
                }
            }
            return p;
        }
    }
    throw SimError(ErrorKind::MinimizationFailed, "inner Newton did not converge");
}

}  // namespace

ChiTable ChiTable::constant(double chi_mhz) {
    ChiTable t;
    t.points = {{0.0, chi_mhz}};
    return t;
}

void ChiTable::validate() const {
    if (points.empty()) {
        throw SimError(ErrorKind::ConfigError, "chi table must have at least one entry");
    }
    for (size_t i = 1; i < points.size(); ++i) {
        if (points[i].first <= points[i - 1].first) {
            throw SimError(ErrorKind::ConfigError, "chi table flux values must be increasing");
        }
    }
}

double ChiTable::at(double phi_ext) const {
    double x = phi_ext / kTwoPi;
    if (points.size() == 1) return points.front().second;
    if (x <= points.front().first) return points.front().second;
    if (x >= points.back().first) return points.back().second;
    for (size_t i = 1; i < points.size(); ++i) {
        if (x <= points[i].first) {
            double t = (x - points[i - 1].first) / (points[i].first - points[i - 1].first);
            return points[i - 1].second + t * (points[i].second - points[i - 1].second);
        }
    }
    return points.back().second;
}

void SnailDevice::validate() const {
    if (!(beta > 0.0 && beta < 1.0)) {
        throw SimError(ErrorKind::ConfigError, "beta must lie in (0, 1)");
    }
    if (ej_ghz <= 0.0 || el_ghz <= 0.0 || ec_ghz <= 0.0) {
        throw SimError(ErrorKind::ConfigError, "EJ, EL, EC must be positive");
    }
    if (kq_mhz >= 0.0) {
        throw SimError(ErrorKind::ConfigError, "Kq must be negative (transmon convention)");
    }
    chi.validate();
}

double snail_potential(double phi, double phi_ext, const SnailDevice& dev) {
    return us0(phi, phi_ext, dev.beta, dev.ej_ghz);
}

double effective_potential(double phi, double phi_ext, const SnailDevice& dev,
                           std::optional<double> guess) {
    double ps = inner_minimizer(phi, phi_ext, dev, guess.value_or(phi));
    double d = phi - ps;
    return 0.5 * dev.el_ghz * d * d + us0(ps, phi_ext, dev.beta, dev.ej_ghz);
}

double effective_gradient(double phi, double phi_ext, const SnailDevice& dev,
                          std::optional<double> guess) {
    double ps = inner_minimizer(phi, phi_ext, dev, guess.value_or(phi));
    return dev.el_ghz * (phi - ps);
}

TaylorCoefficients taylor_coefficients(double phi_ext, const SnailDevice& dev,
                                       std::optional<double> guess) {
    // The effective minimum coincides with the stationary point of the loop
    // potential itself (there phi_s* = phi and the spring term vanishes), so
    // locate it as the root of dU_snail/dphi near the guess.
    double g0 = guess.value_or(phi_ext * 0.7);
    double lo = g0 - 1.5, hi = g0 + 1.5;
    auto deriv = [&](double p) { return us1(p, phi_ext, dev.beta, dev.ej_ghz); };
    int expand = 0;
    while (deriv(lo) * deriv(hi) > 0.0) {
        lo -= 0.5;
        hi += 0.5;
        if (++expand > 20) {
            throw SimError(ErrorKind::MinimizationFailed, "no stationary point near the guess");
        }
    }
    double pm = brent_root(deriv, lo, hi, 1e-15);
    if (us2(pm, phi_ext, dev.beta, dev.ej_ghz) <= 0.0) {
        throw SimError(ErrorKind::MinimizationFailed, "stationary point is not a minimum");
    }

    // c_{j+1} = (1/EJ) d^j/dphi^j of the exact effective gradient.
    auto grad = [&](double p) { return effective_gradient(p, phi_ext, dev, pm); };
    TaylorCoefficients out;
    out.phi_min = pm;
    // Derivatives of the gradient smaller than ~1e-6 EJ are physically zero
    // (symmetry points); the floor keeps the convergence test honest there.
    double floor_scale = 1e-6 * dev.ej_ghz;
    out.c2 = richardson_derivative(grad, pm, 1, 0.1, 1e-7, floor_scale) / dev.ej_ghz;
    out.c3 = richardson_derivative(grad, pm, 2, 0.1, 1e-7, floor_scale) / dev.ej_ghz;
    out.c4 = richardson_derivative(grad, pm, 3, 0.1, 1e-7, floor_scale) / dev.ej_ghz;
    if (out.c2 <= 0.0) {
        throw SimError(ErrorKind::MinimizationFailed, "non-positive curvature at the minimum");
    }
    return out;
}

FluxPoint mode_parameters(double phi_ext, const SnailDevice& dev,
                          std::optional<double> guess) {
    TaylorCoefficients tc = taylor_coefficients(phi_ext, dev, guess);
    FluxPoint fp;
    fp.phi_ext = phi_ext;
    fp.phi_min = tc.phi_min;
    fp.c2 = tc.c2;
    fp.c3 = tc.c3;
    fp.c4 = tc.c4;
    fp.omega_s_ghz = std::sqrt(8.0 * dev.ec_ghz * dev.ej_ghz * tc.c2);
    double g3_ghz = tc.c3 * std::sqrt(dev.ec_ghz * fp.omega_s_ghz) / (6.0 * tc.c2);
    double g4_ghz = tc.c4 * dev.ec_ghz / (12.0 * tc.c2);
    fp.g3_mhz = g3_ghz * 1e3;
    fp.g4_mhz = g4_ghz * 1e3;
    fp.ks_mhz = 12.0 * (g4_ghz - 5.0 * g3_ghz * g3_ghz / fp.omega_s_ghz) * 1e3;
    fp.chi_mhz = dev.chi.at(phi_ext);
    fp.kqs_mhz = fp.chi_mhz * fp.chi_mhz / (4.0 * dev.kq_mhz);
    fp.k_mhz = fp.ks_mhz + fp.kqs_mhz;
    return fp;
}

std::vector<FluxPoint> flux_sweep(const SnailDevice& dev, double phi_lo, double phi_hi,
                                  int n_points) {
    if (n_points < 2) {
        throw SimError(ErrorKind::ConfigError, "flux sweep needs at least 2 points");
    }
    std::vector<FluxPoint> out;
    out.reserve(n_points);
    std::optional<double> guess;
    for (int i = 0; i < n_points; ++i) {
        double phi = phi_lo + (phi_hi - phi_lo) * double(i) / double(n_points - 1);
        FluxPoint fp = mode_parameters(phi, dev, guess);
        guess = fp.phi_min;  // continuation keeps the sweep on one branch
        out.push_back(fp);
    }
    return out;
}

double kerr_free_flux(const SnailDevice& dev, double phi_lo, double phi_hi) {
    std::optional<double> guess;
    auto k_of_phi = [&](double phi) {
        FluxPoint fp = mode_parameters(phi, dev, guess);
        guess = fp.phi_min;
        return fp.k_mhz;
    };
    double root = brent_root(k_of_phi, phi_lo, phi_hi, 1e-12);
    double k_at_root = k_of_phi(root);
    if (std::abs(k_at_root) > 1e-4) {
        throw SimError(ErrorKind::MinimizationFailed,
                       "Kerr-free root refinement left |K| above 0.1 kHz");
    }
    return root;
}

SnailDevice calibrate_anchored(const SnailDevice& base, double anchor_phi,
                               double anchor_omega_ghz) {
    // EC follows from the frequency anchor once EL (hence c2) is fixed;
    // EL is then the single unknown pinned by K(anchor_phi) = 0.
    auto k_at_anchor = [&](double el) {
        SnailDevice d = base;
        d.el_ghz = el;
        TaylorCoefficients tc = taylor_coefficients(anchor_phi, d);
        d.ec_ghz = anchor_omega_ghz * anchor_omega_ghz / (8.0 * d.ej_ghz * tc.c2);
        return mode_parameters(anchor_phi, d).k_mhz;
    };
    // bracket by geometric expansion
    double lo = 50.0, hi = 100.0;
    double flo = k_at_anchor(lo);
    int expand = 0;
    while (k_at_anchor(hi) * flo > 0.0) {
        lo = hi;
        flo = k_at_anchor(lo);
        hi *= 2.0;
        if (++expand > 16) {
            throw SimError(ErrorKind::NoSignChange,
                           "no EL in [50, 6.5e6] GHz makes K vanish at the anchor flux");
        }
    }
    double el_star = brent_root(k_at_anchor, lo, hi, 1e-8);
    SnailDevice out = base;
    out.el_ghz = el_star;
    TaylorCoefficients tc = taylor_coefficients(anchor_phi, out);
    out.ec_ghz = anchor_omega_ghz * anchor_omega_ghz / (8.0 * out.ej_ghz * tc.c2);
    out.validate();
    return out;
}

CalibrationResult calibrate(const std::vector<std::pair<double, double>>& curve,
                            std::optional<std::pair<double, double>> anchors,
                            const SnailDevice& initial_guess) {
    if (curve.size() < 4) {
        throw SimError(ErrorKind::ConfigError, "calibration needs at least 4 curve samples");
    }
    const int nr = int(curve.size());

    auto residuals_for = [&](const SnailDevice& dev, Eigen::VectorXd& r) {
        std::optional<double> guess;
        for (int i = 0; i < nr; ++i) {
            FluxPoint fp = mode_parameters(curve[i].first, dev, guess);
            guess = fp.phi_min;
            r(i) = fp.omega_s_ghz - curve[i].second;
        }
    };

    // The fit runs in parameters relative to the initial guess: the raw
    // sensitivities of the curve to beta and to the energies differ by many
    // orders of magnitude, which starves the finite-difference Jacobian.
    LMResult lm;
    SnailDevice fitted = initial_guess;
    if (anchors) {
        // (beta, EJ) free; EC, EL eliminated through the two anchors.
        ResidualFn fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
            try {
                SnailDevice d = initial_guess;
                d.beta = p(0) * initial_guess.beta;
                d.ej_ghz = p(1) * initial_guess.ej_ghz;
                d = calibrate_anchored(d, anchors->first, anchors->second);
                residuals_for(d, r);
            } catch (const SimError&) {
                r.setConstant(1e6);
            }
        };
        Eigen::VectorXd p0 = Eigen::VectorXd::Ones(2);
        lm = levenberg_marquardt(fn, p0, nr);
        fitted.beta = lm.params(0) * initial_guess.beta;
        fitted.ej_ghz = lm.params(1) * initial_guess.ej_ghz;
        fitted = calibrate_anchored(fitted, anchors->first, anchors->second);
    } else {
        ResidualFn fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
            try {
                SnailDevice d = initial_guess;
                d.beta = p(0) * initial_guess.beta;
                d.ej_ghz = p(1) * initial_guess.ej_ghz;
                d.ec_ghz = p(2) * initial_guess.ec_ghz;
                d.el_ghz = p(3) * initial_guess.el_ghz;
                d.validate();
                residuals_for(d, r);
            } catch (const SimError&) {
                r.setConstant(1e6);
            }
        };
        Eigen::VectorXd p0 = Eigen::VectorXd::Ones(4);
        lm = levenberg_marquardt(fn, p0, nr);
        fitted.beta = lm.params(0) * initial_guess.beta;
        fitted.ej_ghz = lm.params(1) * initial_guess.ej_ghz;
        fitted.ec_ghz = lm.params(2) * initial_guess.ec_ghz;
        fitted.el_ghz = lm.params(3) * initial_guess.el_ghz;
    }
    fitted.validate();

    CalibrationResult out;
    out.device = fitted;
    out.rms_residual_ghz = std::sqrt(2.0 * lm.cost / double(nr));
    out.iterations = lm.iterations;
    return out;
}

}  // namespace kerrcat
