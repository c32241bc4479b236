#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "kerrcat/errors.hpp"

namespace kerrcat {

using ScalarFn = std::function<double(double)>;

// Brent root finding on a bracketing interval.  Throws NoSignChange when the
// endpoints do not straddle a root.  Endpoint order does not matter.
double brent_root(const ScalarFn& f, double a, double b, double xtol = 1e-14,
                  int max_iter = 200);

// Golden-section/parabolic minimization on [a, b].
double brent_minimize(const ScalarFn& f, double a, double b, double xtol = 1e-12,
                      int max_iter = 200);

// Richardson-extrapolated central finite difference of order `order` (1..3)
// of f at x.  Verifies convergence against step halving and throws
// DerivativeUnstable if the extrapolation does not settle to rel_tol.
// `abs_scale` floors the denominator of the relative error so that a
// derivative which is genuinely zero (e.g. at a symmetry point, where the
// finite-difference residue is pure rounding noise) still converges.
double richardson_derivative(const ScalarFn& f, double x, int order, double h0,
                             double rel_tol = 1e-7, double abs_scale = 0.0);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
};

LinearFit linear_regression(const std::vector<double>& x, const std::vector<double>& y);

// Zero-intercept least squares: y ~ slope * x.
double regression_through_origin(const std::vector<double>& x, const std::vector<double>& y);

// Residual function: fills r (fixed size) from parameter vector p.
using ResidualFn = std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r)>;

struct LMOptions {
    int max_iter = 200;
    double ftol = 1e-12;   // relative cost decrease
    double xtol = 1e-12;   // relative step size
    double lambda0 = 1e-3;
};

struct LMResult {
    Eigen::VectorXd params;
    double cost = 0.0;  // 0.5 * sum of squared residuals
    int iterations = 0;
    bool converged = false;
};

// Dense Levenberg-Marquardt with forward-difference Jacobian.  Throws
// FitDiverged when the cost cannot be reduced within the iteration budget.
LMResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd p0, int n_residuals,
                             const LMOptions& opts = {});

// Locate the vertex of the parabola through (x0-h, y0), (x0, y1), (x0+h, y2).
// Falls back to x0 when the points are collinear.
double parabolic_vertex(double x0, double h, double ym, double y0, double yp);

}  // namespace kerrcat
