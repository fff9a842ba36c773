#pragma once

#include <Eigen/Dense>
#include <functional>

namespace smal {

/// Result of a bracketing 1-D root search. When no sign change exists in the
/// search interval, `value` is the grid argmin of |f| and bracketed is false.
struct RootResult {
    double value = 0.0;
    bool bracketed = false;
};

/// Bisection on [lo, hi] where f(lo) and f(hi) have opposite signs; shrinks
/// the bracket to width <= tol and returns its midpoint.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

/// Scans n_grid+1 equally spaced points of [lo, hi] for the first sign change
/// and bisects it; falls back to the grid argmin of |f| when none exists.
RootResult scan_and_bisect(const std::function<double(double)>& f, double lo, double hi,
                           int n_grid = 200, double tol = 1e-12);

/// Mean of f over one period [0, 2*pi): composite trapezoid on a uniform
/// grid, which for periodic integrands is the spectrally accurate choice.
double periodic_mean(const std::function<double(double)>& f, int n_nodes);

/// Configuration for the damped Gauss-Newton solver.
struct LevMarOptions {
    int max_iterations = 100;
    double gradient_tol = 1e-10;  // convergence: inf-norm of J^T r
    double step_tol = 1e-12;      // convergence: norm of the accepted step
    double initial_lambda = 1e-4;
    double max_step = 0.0;  // 0 = unlimited; otherwise steps are rescaled to this norm
};

struct LevMarResult {
    Eigen::VectorXd x;
    double residual_norm = 0.0;  // sqrt of the final sum of squares
    bool converged = false;
    int iterations = 0;
};

/// Residual callback: fills r(x) and, when jac is non-null, J = dr/dx.
using ResidualFn =
    std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac)>;

/// Levenberg-Marquardt minimization of |r(x)|^2 for small dense problems.
LevMarResult levenberg_marquardt(const ResidualFn& fn, const Eigen::VectorXd& x0,
                                 int n_residuals, const LevMarOptions& opts = {});

}  // namespace smal
