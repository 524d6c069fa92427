#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "inplay/covariates.hpp"
#include "inplay/optimize.hpp"
#include "inplay/panel.hpp"
#include "inplay/ssm.hpp"

namespace inplay {

// Position of each natural parameter in the unconstrained working vector:
// [atanh(phi), log(sigma_s)] (state models only), beta, log(gamma), then the
// additive-logistic pair log(pi/(1-pi-lambda)), log(lambda/(1-pi-lambda)).
struct WorkingLayout {
    Eigen::Index n_beta = 0;
    bool state = true;

    Eigen::Index size() const { return n_beta + (state ? 5 : 3); }
    Eigen::Index phi() const { return 0; }
    Eigen::Index sigma() const { return 1; }
    Eigen::Index beta(Eigen::Index j) const { return (state ? 2 : 0) + j; }
    Eigen::Index gamma() const { return beta(n_beta); }
    Eigen::Index pi() const { return gamma() + 1; }
    Eigen::Index lambda() const { return gamma() + 2; }
};

/// Throws std::invalid_argument unless |phi| < 1, sigma > 0 (state models),
/// gamma > 0, pi > 0, lambda > 0 and pi + lambda < 1.
Eigen::VectorXd to_working(const SsmParams& params, bool with_state = true);
SsmParams from_working(const Eigen::VectorXd& theta, Eigen::Index n_beta, bool with_state = true);

/// Log-likelihood of the BEINF regression without latent state (eta = nu),
/// summed over the observed entries of every sequence.
double beinf_glm_loglik(std::span<const MatchSequence> seqs, const SsmParams& params);

struct ParameterEstimate {
    std::string name;
    std::string label;
    double estimate = 0.0;
    std::optional<double> se_working;
    std::optional<double> lower;
    std::optional<double> upper;
};

struct FitOptions {
    Grid grid;
    OptimOptions optim;
    int threads = 1;
    int restarts = 0;  // extra jittered starts, best optimum kept
    std::uint64_t seed = 1;
    bool bridge_gaps = false;  // insert missing minutes so the state steps once per elapsed minute
    std::optional<SsmParams> start;  // overrides the default starting values
    bool compute_hessian = true;
};

struct FitResult {
    std::string model;  // "ssm" or "beinf_glm"
    std::string spec;
    std::vector<std::string> columns;
    std::vector<std::string> labels;
    bool with_state = true;
    SsmParams estimate;
    Eigen::VectorXd working;
    Eigen::MatrixXd working_cov;  // empty unless the observed information is positive definite
    bool hessian_pd = false;
    std::vector<ParameterEstimate> params;
    double loglik = 0.0;
    double aic = 0.0;
    Eigen::Index n_params = 0;
    Eigen::Index n_obs = 0;
    int iterations = 0;
    long evaluations = 0;
    bool converged = false;
    double grad_norm = 0.0;
    std::string message;
    std::vector<TraceRow> trace;
    Grid grid;

    const ParameterEstimate* find(std::string_view name) const;
};

/// 95% intervals: Wald on the working scale mapped through the inverse
/// transform for phi, sigma_s and gamma; Wald on the logit scale (delta
/// method) for pi and lambda; plain Wald for beta. Intervals are omitted when
/// `working_cov` is empty.
std::vector<ParameterEstimate> wald_cis(const Eigen::VectorXd& working, const Eigen::MatrixXd& working_cov,
                                        const WorkingLayout& layout, std::span<const std::string> beta_names,
                                        std::span<const std::string> beta_labels);

/// Maximum likelihood for the AR(1)-state BEINF model. `panel` must already
/// exclude closed-market minutes. Non-convergence is reported in the result.
FitResult fit_ssm(const Panel& panel, const DesignSpec& spec, const FitOptions& options);
FitResult fit_ssm(std::span<const MatchSequence> seqs, const DesignSpec& spec, const FitOptions& options);

/// BEINF regression with eta = nu (no latent state).
FitResult fit_beinf_glm(const Panel& panel, const DesignSpec& spec, const FitOptions& options);
FitResult fit_beinf_glm(std::span<const MatchSequence> seqs, const DesignSpec& spec, const FitOptions& options);

}  // namespace inplay
