#include "kerrcat/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace kerrcat {

double brent_root(const ScalarFn& f, double a, double b, double xtol, int max_iter) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) {
        throw SimError(ErrorKind::NoSignChange, "bracket does not straddle a root");
    }
    if (std::abs(fa) < std::abs(fb)) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    double c = a, fc = fa, d = b - a;
    bool mflag = true;
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(b - a) < xtol || fb == 0.0) return b;
        double s;
        if (fa != fc && fb != fc) {
            // inverse quadratic interpolation
            s = a * fb * fc / ((fa - fb) * (fa - fc)) +
                b * fa * fc / ((fb - fa) * (fb - fc)) +
                c * fa * fb / ((fc - fa) * (fc - fb));
        } else {
            s = b - fb * (b - a) / (fb - fa);  // secant
        }
        double lo = (3.0 * a + b) / 4.0, hi = b;
        if (lo > hi) std::swap(lo, hi);
        bool bisect = (s < lo || s > hi) ||
                      (mflag && std::abs(s - b) >= std::abs(b - c) / 2.0) ||
                      (!mflag && std::abs(s - b) >= std::abs(c - d) / 2.0) ||
                      (mflag && std::abs(b - c) < xtol) ||
                      (!mflag && std::abs(c - d) < xtol);
        if (bisect) {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }
        double fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if (fa * fs < 0.0) {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if (std::abs(fa) < std::abs(fb)) {
            std::swap(a, b);
            std::swap(fa, fb);
        }
    }
    return b;
}

double brent_minimize(const ScalarFn& f, double a, double b, double xtol, int max_iter) {
    const double golden = 0.3819660112501051;
    if (a > b) std::swap(a, b);
    double x = a + golden * (b - a), w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        double mid = 0.5 * (a + b);
        double tol1 = xtol * std::abs(x) + 1e-15, tol2 = 2.0 * tol1;
        if (std::abs(x - mid) <= tol2 - 0.5 * (b - a)) return x;
        bool parabolic = false;
        if (std::abs(e) > tol1) {
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            double etemp = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = (mid > x) ? tol1 : -tol1;
                parabolic = true;
            }
        }
        if (!parabolic) {
            e = (x >= mid) ? a - x : b - x;
            d = golden * e;
        }
        double u = (std::abs(d) >= tol1) ? x + d : x + ((d > 0.0) ? tol1 : -tol1);
        double fu = f(u);
        if (fu <= fx) {
            if (u >= x) a = x; else b = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return x;
}

namespace {

// Central-difference stencils, error O(h^2) per level before extrapolation.
double central_diff(const ScalarFn& f, double x, int order, double h) {
    switch (order) {
        case 1:
            return (f(x + h) - f(x - h)) / (2.0 * h);
        case 2:
            return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        case 3:
            return (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) /
                   (2.0 * h * h * h);
        default:
            throw SimError(ErrorKind::ConfigError, "derivative order must be 1..3");
    }
}

}  // namespace

double richardson_derivative(const ScalarFn& f, double x, int order, double h0,
                             double rel_tol, double abs_scale) {
    // Build the Richardson tableau over halved steps; each column cancels the
    // next even power of h.  Stop once two successive diagonal entries agree.
    const int max_levels = 10;
    std::vector<std::vector<double>> tab(max_levels);
    double best = 0.0, best_err = HUGE_VAL;
    double h = h0;
    for (int i = 0; i < max_levels; ++i) {
        tab[i].resize(i + 1);
        tab[i][0] = central_diff(f, x, order, h);
        double fac = 4.0;
        for (int j = 1; j <= i; ++j) {
            tab[i][j] = tab[i][j - 1] + (tab[i][j - 1] - tab[i - 1][j - 1]) / (fac - 1.0);
            fac *= 4.0;
        }
        if (i > 0) {
            double diag = tab[i][i], prev = tab[i - 1][i - 1];
            double scale = std::max({std::abs(diag), std::abs(prev), abs_scale, 1e-12});
            double err = std::abs(diag - prev) / scale;
            if (err < best_err) {
                best_err = err;
                best = diag;
            }
            if (err < rel_tol) return diag;
            // rounding noise eventually dominates; stop when the error grows
            if (err > 4.0 * best_err && best_err < 1e-4) return best;
        }
        h *= 0.5;
    }
    if (best_err < 1e-5) return best;
    throw SimError(ErrorKind::DerivativeUnstable,
                   "Richardson sequence failed to converge (best relative error " +
                       std::to_string(best_err) + ")");
}

LinearFit linear_regression(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw SimError(ErrorKind::FitDiverged, "linear regression needs >= 2 matching samples");
    }
    double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i]; sy += y[i];
        sxx += x[i] * x[i]; sxy += x[i] * y[i]; syy += y[i] * y[i];
    }
    double den = n * sxx - sx * sx;
    LinearFit fit;
    if (std::abs(den) < 1e-300) {
        throw SimError(ErrorKind::FitDiverged, "degenerate abscissae in linear regression");
    }
    fit.slope = (n * sxy - sx * sy) / den;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - (fit.slope * x[i] + fit.intercept);
        ss_res += r * r;
    }
    fit.r_squared = (ss_tot > 1e-300) ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

double regression_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty()) {
        throw SimError(ErrorKind::FitDiverged, "regression needs matching nonempty samples");
    }
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    if (sxx < 1e-300) {
        throw SimError(ErrorKind::FitDiverged, "degenerate abscissae in regression");
    }
    return sxy / sxx;
}

LMResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd p0, int n_residuals,
                             const LMOptions& opts) {
    const int np = int(p0.size());
    Eigen::VectorXd r(n_residuals), r_try(n_residuals);
    fn(p0, r);
    double cost = 0.5 * r.squaredNorm();
    const double cost0 = cost;
    double lambda = opts.lambda0;
    Eigen::MatrixXd jac(n_residuals, np);

    LMResult out;
    out.params = p0;
    out.cost = cost;

    for (int it = 0; it < opts.max_iter; ++it) {
        out.iterations = it + 1;
        // forward-difference Jacobian
        for (int j = 0; j < np; ++j) {
            double h = 1e-7 * std::max(1.0, std::abs(p0(j)));
            Eigen::VectorXd pj = p0;
            pj(j) += h;
            fn(pj, r_try);
            jac.col(j) = (r_try - r) / h;
        }
        Eigen::MatrixXd jtj = jac.transpose() * jac;
        Eigen::VectorXd jtr = jac.transpose() * r;
        bool stepped = false;
        for (int sub = 0; sub < 30; ++sub) {
            Eigen::MatrixXd aug = jtj;
            aug.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            Eigen::VectorXd step = aug.ldlt().solve(-jtr);
            Eigen::VectorXd p_try = p0 + step;
            fn(p_try, r_try);
            double cost_try = 0.5 * r_try.squaredNorm();
            if (std::isfinite(cost_try) && cost_try < cost) {
                double rel_dec = (cost - cost_try) / std::max(cost, 1e-300);
                double rel_step = step.norm() / std::max(p0.norm(), 1e-300);
                p0 = p_try;
                r = r_try;
                cost = cost_try;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                out.params = p0;
                out.cost = cost;
                if (rel_dec < opts.ftol || rel_step < opts.xtol) {
                    out.converged = true;
                    return out;
                }
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
        if (!stepped) {
            // no downhill step found: converged if the gradient is tiny, or
            // stalled at the finite-difference noise floor after a genuine
            // improvement; only a fit that never improved is a failure
            if (jtr.norm() < 1e-8 * std::max(1.0, cost) || cost < 0.5 * cost0) {
                out.converged = jtr.norm() < 1e-8 * std::max(1.0, cost);
                return out;
            }
            throw SimError(ErrorKind::FitDiverged, "Levenberg-Marquardt could not reduce the cost");
        }
    }
    out.converged = true;  // budget exhausted but cost was monotonically reduced
    return out;
}

double parabolic_vertex(double x0, double h, double ym, double y0, double yp) {
    double denom = ym - 2.0 * y0 + yp;
    if (std::abs(denom) < 1e-300) return x0;
    return x0 + 0.5 * h * (ym - yp) / denom;
}

}  // namespace kerrcat
