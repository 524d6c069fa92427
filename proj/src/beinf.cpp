#include "inplay/beinf.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace inplay {

double log_gamma(double x) {
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

void BeinfParams::validate() const {
    if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("BEINF mean must lie in (0,1)");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("BEINF precision must be > 0");
    if (!(pi >= 0.0 && pi < 1.0) || !(lambda >= 0.0 && lambda < 1.0)) {
        throw std::invalid_argument("BEINF inflation probabilities must lie in [0,1)");
    }
    if (!(pi + lambda < 1.0)) throw std::invalid_argument("BEINF requires pi + lambda < 1");
}

double log_beta_density_eta(double y, double eta, double gamma) {
    const auto [mu, one_minus_mu] = logistic_pair(eta);
    const double a = gamma * mu;
    const double b = gamma * one_minus_mu;
    return log_gamma(gamma) - log_gamma(a) - log_gamma(b) + (a - 1.0) * std::log(y) +
           (b - 1.0) * std::log1p(-y);
}

double log_density(double y, const BeinfParams& p) {
    if (!(y >= 0.0 && y <= 1.0)) throw std::domain_error("BEINF support is [0,1], got y = " + std::to_string(y));
    if (y == 0.0) return std::log(p.pi);
    if (y == 1.0) return std::log(p.lambda);
    const double a = p.alpha();
    const double b = p.beta_shape();
    return std::log1p(-(p.pi + p.lambda)) + log_gamma(p.gamma) - log_gamma(a) - log_gamma(b) +
           (a - 1.0) * std::log(y) + (b - 1.0) * std::log1p(-y);
}

double precision_from_moments(double mu, double sigma2) {
    if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("mean must lie in (0,1)");
    if (!(sigma2 > 0.0 && sigma2 < mu * (1.0 - mu))) {
        throw std::invalid_argument("variance must lie in (0, mu(1-mu))");
    }
    return mu * (1.0 - mu) / sigma2 - 1.0;
}

double variance_from_precision(double mu, double gamma) { return mu * (1.0 - mu) / (gamma + 1.0); }

double mean_from_predictor(double eta) {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double sample(const BeinfParams& p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    if (u < p.pi) return 0.0;
    if (u < p.pi + p.lambda) return 1.0;
    std::gamma_distribution<double> ga(p.alpha(), 1.0);
    std::gamma_distribution<double> gb(p.beta_shape(), 1.0);
    const double x = ga(rng);
    const double z = gb(rng);
    double y = x / (x + z);
    // Underflow of a tiny gamma draw must not masquerade as a point mass.
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    if (!(y > lo)) y = lo;
    if (!(y < hi)) y = hi;
    return y;
}

}  // namespace inplay
