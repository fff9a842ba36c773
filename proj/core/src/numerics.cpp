#include "smal/numerics.hpp"

#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include "smal/parallel.hpp"
#include "smal/vec.hpp"

namespace smal {

void parallel_for_indexed(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            // static block partition: worker w owns [w*n/workers, (w+1)*n/workers)
            const std::size_t lo = w * n / workers;
            const std::size_t hi = (w + 1) * n / workers;
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;  // interval at one ulp
        const double fmid = f(mid);
        if (fmid == 0.0) return mid;
        if (std::signbit(fmid) == std::signbit(flo)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
            fhi = fmid;
        }
    }
    return 0.5 * (lo + hi);
}

RootResult scan_and_bisect(const std::function<double(double)>& f, double lo, double hi,
                           int n_grid, double tol) {
    const double h = (hi - lo) / n_grid;
    double x_prev = lo;
    double f_prev = f(lo);
    double best_x = lo;
    double best_abs = std::abs(f_prev);
    for (int i = 1; i <= n_grid; ++i) {
        const double x = (i == n_grid) ? hi : lo + i * h;
        const double fx = f(x);
        if (std::abs(fx) < best_abs) {
            best_abs = std::abs(fx);
            best_x = x;
        }
        if (f_prev == 0.0) return {x_prev, true};
        if (std::signbit(fx) != std::signbit(f_prev)) {
            return {bisect(f, x_prev, x, tol), true};
        }
        x_prev = x;
        f_prev = fx;
    }
    return {best_x, false};
}

double periodic_mean(const std::function<double(double)>& f, int n_nodes) {
    // uniform midpoint nodes: same spectral accuracy as the trapezoid rule on
    // a periodic integrand, but axis-aligned symmetry points of the problem
    // geometry never coincide with a node
    double acc = 0.0;
    for (int k = 0; k < n_nodes; ++k) {
        acc += f(2.0 * kPi * (k + 0.5) / n_nodes);
    }
    return acc / n_nodes;
}

LevMarResult levenberg_marquardt(const ResidualFn& fn, const Eigen::VectorXd& x0,
                                 int n_residuals, const LevMarOptions& opts) {
    const int n = static_cast<int>(x0.size());
    LevMarResult out;
    out.x = x0;

    Eigen::VectorXd r(n_residuals);
    Eigen::MatrixXd jac(n_residuals, n);
    fn(out.x, r, &jac);
    double cost = r.squaredNorm();

    Eigen::VectorXd grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() <= opts.gradient_tol) {
        out.converged = true;
        out.residual_norm = std::sqrt(cost);
        return out;
    }

    double lambda = opts.initial_lambda;
    Eigen::VectorXd r_trial(n_residuals);

    for (int it = 0; it < opts.max_iterations; ++it) {
        out.iterations = it + 1;
        Eigen::MatrixXd hess = jac.transpose() * jac;
        grad = jac.transpose() * r;

        // damped normal equations; scale damping by the diagonal so the step
        // is invariant to per-parameter units
        Eigen::MatrixXd damped = hess;
        for (int k = 0; k < n; ++k) {
            damped(k, k) += lambda * std::max(hess(k, k), 1e-30);
        }
        const auto clamp_step = [&](Eigen::VectorXd& s) {
            if (opts.max_step > 0.0 && s.norm() > opts.max_step) {
                s *= opts.max_step / s.norm();
            }
        };
        Eigen::VectorXd step = damped.ldlt().solve(-grad);
        clamp_step(step);

        bool accepted = false;
        bool first_try = true;
        double step_norm = step.norm();
        for (int tries = 0; tries < 25; ++tries) {
            Eigen::VectorXd x_trial = out.x + step;
            fn(x_trial, r_trial, nullptr);
            const double cost_trial = r_trial.squaredNorm();
            if (cost_trial < cost) {
                out.x = x_trial;
                r = r_trial;
                cost = cost_trial;
                lambda = std::max(lambda * 0.33, 1e-14);
                accepted = true;
                break;
            }
            first_try = false;
            lambda *= 8.0;
            damped = hess;
            for (int k = 0; k < n; ++k) {
                damped(k, k) += lambda * std::max(hess(k, k), 1e-30);
            }
            step = damped.ldlt().solve(-grad);
            clamp_step(step);
            step_norm = step.norm();
        }
        if (!accepted) break;

        fn(out.x, r, &jac);
        grad = jac.transpose() * r;
        if (grad.lpNorm<Eigen::Infinity>() <= opts.gradient_tol) {
            out.converged = true;
            break;
        }
        // a full-quality step this small means the iterate has stopped moving
        if (first_try && step_norm <= opts.step_tol) {
            out.converged = true;
            break;
        }
    }
    out.residual_norm = std::sqrt(cost);
    return out;
}

}  // namespace smal
