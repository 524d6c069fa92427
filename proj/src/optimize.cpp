#include "inplay/optimize.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace inplay {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double finite_or_inf(double v) { return std::isfinite(v) ? v : kInf; }

}  // namespace

Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x, double step,
                                 const std::vector<Eigen::Index>& order) {
    const Eigen::Index n = x.size();
    std::vector<Eigen::Index> idx = order;
    if (idx.empty()) {
        idx.resize(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    }
    Eigen::VectorXd g(n);
    Eigen::VectorXd xp = x;
    for (Eigen::Index i : idx) {
        xp(i) = x(i) + step;
        const double fp = f(xp);
        xp(i) = x(i) - step;
        const double fm = f(xp);
        xp(i) = x(i);
        g(i) = (fp - fm) / (2.0 * step);
    }
    return g;
}

Eigen::MatrixXd central_hessian(const Objective& f, const Eigen::VectorXd& x, double step,
                                const std::vector<Eigen::Index>& order) {
    const Eigen::Index n = x.size();
    std::vector<Eigen::Index> idx = order;
    if (idx.empty()) {
        idx.resize(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    }
    Eigen::MatrixXd H(n, n);
    Eigen::VectorXd plus(n), minus(n);
    Eigen::VectorXd xp = x;
    const double f0 = f(x);
    const double h2 = step * step;
    // Coordinate j's single steps come right before its pairs with earlier
    // coordinates, so objectives caching on a subset of coordinates can reuse
    // the x +- h e_j evaluations.
    for (std::size_t jj = 0; jj < idx.size(); ++jj) {
        const Eigen::Index j = idx[jj];
        xp(j) = x(j) + step;
        plus(j) = f(xp);
        xp(j) = x(j) - step;
        minus(j) = f(xp);
        xp(j) = x(j);
        H(j, j) = (plus(j) - 2.0 * f0 + minus(j)) / h2;
        for (std::size_t ii = 0; ii < jj; ++ii) {
            const Eigen::Index i = idx[ii];
            xp(i) = x(i) + step;
            xp(j) = x(j) + step;
            const double fpp = f(xp);
            xp(i) = x(i) - step;
            xp(j) = x(j) - step;
            const double fmm = f(xp);
            xp(i) = x(i);
            xp(j) = x(j);
            const double v = (fpp + fmm - plus(i) - minus(i) - plus(j) - minus(j) + 2.0 * f0) / (2.0 * h2);
            H(i, j) = v;
            H(j, i) = v;
        }
    }
    return H;
}

OptimResult minimize_bfgs(const Objective& f_raw, Eigen::VectorXd x0, const OptimOptions& opt,
                          const std::vector<Eigen::Index>& gradient_order) {
    OptimResult res;
    long evals = 0;
    Objective f = [&](const Eigen::VectorXd& x) {
        ++evals;
        return finite_or_inf(f_raw(x));
    };

    const Eigen::Index n = x0.size();
    Eigen::VectorXd x = std::move(x0);
    double fx = f(x);
    if (!std::isfinite(fx)) {
        res.x = x;
        res.value = fx;
        res.message = "objective is not finite at the starting point";
        res.evaluations = evals;
        return res;
    }
    Eigen::VectorXd g = central_gradient(f, x, opt.fd_step, gradient_order);
    Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);
    bool scaled_initial = false;
    res.trace.push_back({0, fx, g.lpNorm<Eigen::Infinity>()});

    if (g.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
        res.converged = true;
        res.message = "gradient below tolerance at start";
    }

    constexpr double c1 = 1e-4;
    bool reset_once = false;
    int iter = 0;
    while (!res.converged && iter < opt.max_iter) {
        Eigen::VectorXd p = -Hinv * g;
        double slope = g.dot(p);
        if (!(slope < 0.0)) {
            Hinv.setIdentity();
            scaled_initial = false;
            p = -g;
            slope = g.dot(p);
        }
        // First step (or after a reset) has no curvature information; cap its length.
        double alpha = 1.0;
        if (!scaled_initial) {
            const double pmax = p.lpNorm<Eigen::Infinity>();
            if (pmax > 1.0) alpha = 1.0 / pmax;
        }
        double f_new = kInf;
        Eigen::VectorXd x_new;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + alpha * p;
            f_new = f(x_new);
            if (f_new <= fx + c1 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            if (!reset_once) {
                reset_once = true;
                Hinv.setIdentity();
                scaled_initial = false;
                // Restore the cached state at x before recomputing the gradient.
                fx = f(x);
                g = central_gradient(f, x, opt.fd_step, gradient_order);
                continue;
            }
            res.message = "line search failed to decrease the objective";
            break;
        }
        ++iter;
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd g_new = central_gradient(f, x_new, opt.fd_step, gradient_order);
        const Eigen::VectorXd yv = g_new - g;
        const double rel_change = std::abs(fx - f_new) / std::max(std::abs(f_new), 1.0);
        x = x_new;
        fx = f_new;
        g = g_new;
        const double gnorm = g.lpNorm<Eigen::Infinity>();
        res.trace.push_back({iter, fx, gnorm});

        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            if (!scaled_initial) {
                Hinv = Eigen::MatrixXd::Identity(n, n) * (sy / yv.squaredNorm());
                scaled_initial = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::VectorXd Hy = Hinv * yv;
            // H+ = (I - rho s y')H(I - rho y s') + rho s s'
            Hinv += rho * ((1.0 + rho * yv.dot(Hy)) * (s * s.transpose()) - Hy * s.transpose() - s * Hy.transpose());
        }
        if (gnorm < opt.grad_tol && rel_change < opt.rel_tol) {
            res.converged = true;
            res.message = "converged";
        }
    }
    if (!res.converged && res.message.empty()) res.message = "iteration limit reached";
    res.x = x;
    res.value = fx;
    res.gradient = g;
    res.iterations = iter;
    res.evaluations = evals;
    return res;
}

}  // namespace inplay
