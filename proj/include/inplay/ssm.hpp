#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "inplay/covariates.hpp"
#include "inplay/panel.hpp"

namespace inplay {

// AR(1) latent state s_t = phi s_{t-1} + sigma eps_t.
struct StateParams {
    double phi = 0.0;
    double sigma = 1.0;

    double stationary_sd() const;
    void validate() const;  // |phi| < 1, sigma > 0
};

// Equal-width discretisation of [lower, upper] into m intervals.
struct Grid {
    int m = 95;
    double lower = -3.0;
    double upper = 3.0;

    double width() const { return (upper - lower) / m; }
    double edge(int i) const { return lower + i * width(); }  // i = 0..m
    double midpoint(int i) const { return lower + (i + 0.5) * width(); }  // i = 0..m-1
    Eigen::VectorXd midpoints() const;
    void validate() const;  // m >= 2, lower < upper
};

struct SsmParams {
    StateParams state;
    Eigen::VectorXd beta;
    double gamma = 1.0;
    double pi = 0.0;
    double lambda = 0.0;
};

/// Gamma(i,j) = P(s_t in interval j | s_{t-1} = midpoint i), as normal CDF
/// differences. Rows are not renormalised; mass beyond the bounds is lost.
Eigen::MatrixXd transition_matrix(const StateParams& state, const Grid& grid);

/// Stationary N(0, sigma^2/(1-phi^2)) interval masses.
Eigen::VectorXd initial_distribution(const StateParams& state, const Grid& grid);

// One match's bettors' series: y missing where nothing was observed.
struct MatchSequence {
    std::string match_id;
    std::vector<int> t;
    std::vector<std::optional<double>> y;
    Eigen::MatrixXd X;  // rows aligned with y; ignored where y is missing

    Eigen::Index length() const { return static_cast<Eigen::Index>(y.size()); }
    std::size_t observed() const;
};

/// Builds per-match sequences with stakerel as response. With bridge_gaps,
/// minutes absent between two retained rows are inserted as missing
/// observations so the state advances once per elapsed minute.
std::vector<MatchSequence> build_sequences(const Panel& panel, const DesignSpec& spec, bool bridge_gaps = false);

enum class EmissionKind : unsigned char { interior, zero, one, missing };

// State-dependent beta densities for one match, column t scaled by
// exp(-log_offset[t]) to keep the forward recursion in range.
struct Emissions {
    Eigen::MatrixXd scaled;  // m x T
    std::vector<double> log_offset;
    std::vector<EmissionKind> kind;
};

Emissions compute_emissions(const MatchSequence& seq, const Eigen::VectorXd& beta, double gamma,
                            const Grid& grid);

// Holds the transition matrix and initial distribution for one parameter
// set so they are shared by every match.
class ForwardFilter {
public:
    ForwardFilter(const StateParams& state, const Grid& grid);

    double loglik(const Emissions& e, double pi, double lambda) const;

    const Eigen::MatrixXd& gamma() const { return gamma_; }
    const Eigen::VectorXd& delta() const { return delta_; }

private:
    Eigen::MatrixXd gamma_;
    Eigen::MatrixXd gamma_t_;
    Eigen::VectorXd delta_;
};

/// Scaled forward recursion for one match. Throws std::invalid_argument on
/// an empty sequence and std::domain_error on y outside [0,1].
double forward_loglik(const MatchSequence& seq, const SsmParams& params, const Grid& grid);

/// Sum of per-match log-likelihoods, reduced in match_id order. `threads`
/// > 1 evaluates matches concurrently.
double total_loglik(std::span<const MatchSequence> seqs, const SsmParams& params, const Grid& grid,
                    int threads = 1);

struct DecodedStates {
    std::vector<double> viterbi;        // grid midpoints on the most probable path
    std::vector<double> smoothed_mean;  // E[s_t | all observations]
};

DecodedStates decode_states(const MatchSequence& seq, const SsmParams& params, const Grid& grid);

}  // namespace inplay
