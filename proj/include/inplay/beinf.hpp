#pragma once

#include <cmath>
#include <random>
#include <utility>

namespace inplay {

// Zero-one-inflated beta law: mass pi at 0, lambda at 1 and (1 - pi - lambda)
// times a Beta(mu*gamma, (1-mu)*gamma) density on (0,1).
struct BeinfParams {
    double mu = 0.5;
    double gamma = 1.0;
    double pi = 0.0;
    double lambda = 0.0;

    double alpha() const { return mu * gamma; }
    double beta_shape() const { return (1.0 - mu) * gamma; }
    /// Throws std::invalid_argument when any invariant is violated.
    void validate() const;
};

/// Log-density (log-probability at the boundaries). y = 0 with pi = 0 gives
/// -infinity. Throws std::domain_error for y outside [0,1].
double log_density(double y, const BeinfParams& p);

/// Normalised beta log-density on (0,1) written in terms of the linear
/// predictor, so shapes stay positive where the logistic mean rounds to 0 or 1.
double log_beta_density_eta(double y, double eta, double gamma);

/// gamma = mu(1-mu)/sigma2 - 1. Requires 0 < sigma2 < mu(1-mu).
double precision_from_moments(double mu, double sigma2);

/// Variance implied by mean and precision, mu(1-mu)/(gamma+1).
double variance_from_precision(double mu, double gamma);

/// Inverse logit, 1/(1+exp(-eta)), evaluated without overflow.
double mean_from_predictor(double eta);

double logit(double p);

/// (mu, 1 - mu) for mu = logistic(eta), each accurate to full relative precision.
inline std::pair<double, double> logistic_pair(double eta) {
    const double e = std::exp(-std::abs(eta));
    const double big = 1.0 / (1.0 + e);
    const double small = e / (1.0 + e);
    return eta >= 0.0 ? std::pair{big, small} : std::pair{small, big};
}

/// One draw; exact 0 and 1 occur only through the point masses.
double sample(const BeinfParams& p, std::mt19937_64& rng);

/// Thread-safe log-gamma.
double log_gamma(double x);

}  // namespace inplay
