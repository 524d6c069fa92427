#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace inplay {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptimOptions {
    int max_iter = 500;
    double rel_tol = 1e-8;       // relative objective change
    double grad_tol = 1e-4;      // gradient max-norm
    double fd_step = 1e-5;       // central-difference gradient step
    double hessian_step = 1e-4;  // central-difference Hessian step
};

struct TraceRow {
    int iteration = 0;
    double value = 0.0;
    double grad_norm = 0.0;
};

struct OptimResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd gradient;
    int iterations = 0;
    long evaluations = 0;
    bool converged = false;
    std::string message;
    std::vector<TraceRow> trace;
};

/// Central differences, coordinates visited in `order` (all, ascending, when
/// empty). Objectives that cache work keyed on a subset of coordinates can
/// pass an order that groups the cheap ones first.
Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x, double step,
                                 const std::vector<Eigen::Index>& order = {});

/// Symmetric central-difference Hessian from function values only, using
/// f(x +- h e_i), f(x +- h(e_i + e_j)) and f(x). `order` as for the gradient.
Eigen::MatrixXd central_hessian(const Objective& f, const Eigen::VectorXd& x, double step,
                                const std::vector<Eigen::Index>& order = {});

/// Quasi-Newton minimisation with BFGS inverse-Hessian updates and a
/// backtracking Armijo line search. Converged when the gradient max-norm is
/// below grad_tol and the last accepted step changed f by less than rel_tol
/// relative. Non-finite objective values are treated as +infinity.
OptimResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const OptimOptions& options,
                          const std::vector<Eigen::Index>& gradient_order = {});

}  // namespace inplay
