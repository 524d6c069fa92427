#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "inplay/covariates.hpp"
#include "inplay/panel.hpp"

namespace inplay {

// Response vector, design matrix and match cluster index for OLS.
struct Design {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::vector<int> cluster;             // dense index into cluster_labels
    std::vector<std::string> cluster_labels;
    DesignSpec spec;
};

/// Stacks every row with an observed improb. Clusters are matches.
Design build_design(const Panel& panel, const DesignSpec& spec);

struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd residuals;
    Eigen::VectorXd fitted;
};

/// Least squares by column-pivoting QR. Throws std::invalid_argument naming
/// the collinear columns when X is rank deficient.
OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
               std::span<const std::string> column_names = {});

/// Match-clustered sandwich (X'X)^-1 (sum_g X_g'u_g u_g'X_g) (X'X)^-1. With
/// `cr1` the Stata small-sample factor G/(G-1) * (N-1)/(N-k) is applied.
/// Throws std::invalid_argument when fewer than two clusters are present.
Eigen::MatrixXd cluster_covariance(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                                   std::span<const int> cluster, bool cr1 = true);

/// Gaussian log-likelihood at the ML variance RSS/n.
double gaussian_loglik(double rss, Eigen::Index n);

/// AIC = 2k - 2 logL with k = n_coef + 1 (the variance). Throws
/// std::invalid_argument if n <= k and std::domain_error if rss == 0.
double gaussian_aic(double rss, Eigen::Index n, Eigen::Index n_coef);

constexpr double kZ95 = 1.96;

struct RegressionFit {
    std::string model;
    std::vector<std::string> columns;
    std::vector<std::string> labels;
    Eigen::VectorXd beta;
    Eigen::MatrixXd covariance;  // CR1 cluster-robust
    Eigen::VectorXd se;
    Eigen::VectorXd ci_lower;
    Eigen::VectorXd ci_upper;
    double rss = 0.0;
    double residual_variance = 0.0;  // rss / (n - k)
    Eigen::Index n = 0;
    Eigen::Index k = 0;
    Eigen::Index clusters = 0;
    double loglik = 0.0;
    double aic = 0.0;
};

RegressionFit fit_regression(const Design& design);

}  // namespace inplay
