#include "inplay/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "inplay/beinf.hpp"
#include "inplay/linreg.hpp"
#include "parallel.hpp"

namespace inplay {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Total SSM log-likelihood with emission matrices cached for the few most
// recent (beta, gamma) values; perturbing only state or inflation parameters
// then costs one forward pass per match.
class SsmLikelihood {
public:
    SsmLikelihood(std::span<const MatchSequence> seqs, const Grid& grid, int threads)
        : seqs_(seqs), grid_(grid), threads_(threads), per_match_(seqs.size()), order_(seqs.size()) {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        std::stable_sort(order_.begin(), order_.end(),
                         [&](std::size_t a, std::size_t b) { return seqs_[a].match_id < seqs_[b].match_id; });
    }

    double operator()(const SsmParams& p) {
        if (!(std::abs(p.state.phi) < 1.0) || !(p.state.sigma > 0.0) || !std::isfinite(p.state.sigma) ||
            !(p.gamma > 0.0) || !std::isfinite(p.gamma) || !(p.pi > 0.0) || !(p.lambda > 0.0) ||
            !(p.pi + p.lambda < 1.0)) {
            return -kInf;
        }
        const std::vector<Emissions>& em = emissions(p.beta, p.gamma);
        const ForwardFilter filter(p.state, grid_);
        detail::parallel_for(seqs_.size(), threads_,
                             [&](std::size_t i) { per_match_[i] = filter.loglik(em[i], p.pi, p.lambda); });
        double total = 0.0;
        for (std::size_t i : order_) total += per_match_[i];
        return total;
    }

private:
    struct Slot {
        Eigen::VectorXd beta;
        double gamma = 0.0;
        std::vector<Emissions> em;
        long used = 0;
    };
    static constexpr std::size_t kSlots = 3;

    const std::vector<Emissions>& emissions(const Eigen::VectorXd& beta, double gamma) {
        ++clock_;
        for (auto& s : slots_) {
            if (s.gamma == gamma && s.beta.size() == beta.size() && s.beta == beta) {
                s.used = clock_;
                return s.em;
            }
        }
        if (slots_.size() < kSlots) slots_.emplace_back();
        Slot& s = *std::min_element(slots_.begin(), slots_.end(),
                                    [](const Slot& a, const Slot& b) { return a.used < b.used; });
        s.beta = beta;
        s.gamma = gamma;
        s.used = clock_;
        s.em.resize(seqs_.size());
        detail::parallel_for(seqs_.size(), threads_,
                             [&](std::size_t i) { s.em[i] = compute_emissions(seqs_[i], beta, gamma, grid_); });
        return s.em;
    }

    std::span<const MatchSequence> seqs_;
    Grid grid_;
    int threads_;
    std::vector<Slot> slots_;
    long clock_ = 0;
    std::vector<double> per_match_;
    std::vector<std::size_t> order_;
};

Eigen::Index observed_count(std::span<const MatchSequence> seqs) {
    Eigen::Index n = 0;
    for (const auto& s : seqs) n += static_cast<Eigen::Index>(s.observed());
    return n;
}

// Root-mean-square of each design column over observed rows; used to put
// coefficients on comparable optimizer scales.
Eigen::VectorXd column_rms(std::span<const MatchSequence> seqs, Eigen::Index k) {
    Eigen::VectorXd ss = Eigen::VectorXd::Zero(k);
    double n = 0.0;
    for (const auto& s : seqs) {
        for (Eigen::Index t = 0; t < s.length(); ++t) {
            if (!s.y[static_cast<std::size_t>(t)]) continue;
            ss += s.X.row(t).transpose().cwiseAbs2();
            n += 1.0;
        }
    }
    Eigen::VectorXd rms = (ss / std::max(n, 1.0)).cwiseSqrt();
    for (Eigen::Index j = 0; j < k; ++j) {
        if (!(rms(j) > 0.0)) rms(j) = 1.0;
    }
    return rms;
}

// Starting coefficients: least squares of logit(y) on X, y pulled into
// [0.01, 0.99] so boundary observations stay finite.
Eigen::VectorXd logit_ols_start(std::span<const MatchSequence> seqs, Eigen::Index k) {
    const Eigen::Index n = observed_count(seqs);
    if (n == 0) throw std::invalid_argument("no observed responses to fit");
    Eigen::MatrixXd X(n, k);
    Eigen::VectorXd z(n);
    Eigen::Index r = 0;
    for (const auto& s : seqs) {
        for (Eigen::Index t = 0; t < s.length(); ++t) {
            const auto& y = s.y[static_cast<std::size_t>(t)];
            if (!y) continue;
            X.row(r) = s.X.row(t);
            z(r) = logit(std::clamp(*y, 0.01, 0.99));
            ++r;
        }
    }
    return X.colPivHouseholderQr().solve(z);
}

FitResult run_fit(std::span<const MatchSequence> seqs, const DesignSpec& spec, const FitOptions& options,
                  bool with_state, const SsmParams& start) {
    if (seqs.empty()) throw std::invalid_argument("cannot fit a model to an empty panel");
    const Eigen::Index k = spec.columns();
    const WorkingLayout layout{k, with_state};
    const Eigen::Index dim = layout.size();

    std::optional<SsmLikelihood> ssm;
    if (with_state) {
        options.grid.validate();
        ssm.emplace(seqs, options.grid, options.threads);
    }
    auto loglik = [&](const SsmParams& p) -> double {
        if (with_state) return (*ssm)(p);
        return beinf_glm_loglik(seqs, p);
    };

    Eigen::VectorXd scale = Eigen::VectorXd::Ones(dim);
    const Eigen::VectorXd rms = column_rms(seqs, k);
    for (Eigen::Index j = 0; j < k; ++j) scale(layout.beta(j)) = rms(j);

    const Objective objective = [&](const Eigen::VectorXd& u) {
        const Eigen::VectorXd theta = u.cwiseQuotient(scale);
        const double ll = loglik(from_working(theta, k, with_state));
        return std::isfinite(ll) ? -ll : kInf;
    };

    std::vector<Eigen::Index> order;
    if (with_state) order = {layout.phi(), layout.sigma()};
    order.push_back(layout.pi());
    order.push_back(layout.lambda());
    for (Eigen::Index j = 0; j < k; ++j) order.push_back(layout.beta(j));
    order.push_back(layout.gamma());

    const Eigen::VectorXd theta0 = to_working(start, with_state);
    OptimResult best = minimize_bfgs(objective, theta0.cwiseProduct(scale), options.optim, order);
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> jitter(0.0, 0.5);
    for (int r = 0; r < options.restarts; ++r) {
        Eigen::VectorXd theta = theta0;
        for (Eigen::Index i = 0; i < dim; ++i) theta(i) += jitter(rng);
        OptimResult cand = minimize_bfgs(objective, theta.cwiseProduct(scale), options.optim, order);
        if (cand.value < best.value) best = std::move(cand);
    }

    FitResult fit;
    fit.model = with_state ? "ssm" : "beinf_glm";
    fit.spec = spec.name;
    fit.columns = spec.column_keys();
    fit.labels = spec.column_labels();
    fit.with_state = with_state;
    fit.grid = options.grid;
    fit.working = best.x.cwiseQuotient(scale);
    fit.estimate = from_working(fit.working, k, with_state);
    fit.loglik = -best.value;
    fit.n_params = dim;
    fit.n_obs = observed_count(seqs);
    fit.aic = 2.0 * static_cast<double>(dim) - 2.0 * fit.loglik;
    fit.iterations = best.iterations;
    fit.converged = best.converged;
    fit.grad_norm = best.gradient.size() ? best.gradient.lpNorm<Eigen::Infinity>() : kInf;
    fit.message = best.message;
    fit.trace = best.trace;

    if (options.compute_hessian && std::isfinite(best.value)) {
        const Eigen::MatrixXd Hu = central_hessian(objective, best.x, options.optim.hessian_step, order);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (Hu + Hu.transpose()));
        const auto& ev = eig.eigenvalues();
        if (eig.info() == Eigen::Success && ev.allFinite() && ev.minCoeff() > 1e-9 * ev.maxCoeff() &&
            ev.maxCoeff() > 0.0) {
            const Eigen::MatrixXd cov_u =
                eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
            fit.working_cov = cov_u.array() / (scale * scale.transpose()).array();
            fit.hessian_pd = true;
        }
        fit.evaluations = best.evaluations;
    }
    fit.params = wald_cis(fit.working, fit.working_cov, layout, fit.columns, fit.labels);
    return fit;
}

}  // namespace

Eigen::VectorXd to_working(const SsmParams& p, bool with_state) {
    const WorkingLayout layout{p.beta.size(), with_state};
    Eigen::VectorXd theta(layout.size());
    if (with_state) {
        p.state.validate();
        theta(layout.phi()) = std::atanh(p.state.phi);
        theta(layout.sigma()) = std::log(p.state.sigma);
    }
    if (!(p.gamma > 0.0)) throw std::invalid_argument("precision gamma must be > 0");
    if (!(p.pi > 0.0 && p.lambda > 0.0 && p.pi + p.lambda < 1.0)) {
        throw std::invalid_argument("inflation probabilities need pi > 0, lambda > 0, pi + lambda < 1");
    }
    for (Eigen::Index j = 0; j < p.beta.size(); ++j) theta(layout.beta(j)) = p.beta(j);
    theta(layout.gamma()) = std::log(p.gamma);
    const double rest = 1.0 - p.pi - p.lambda;
    theta(layout.pi()) = std::log(p.pi) - std::log(rest);
    theta(layout.lambda()) = std::log(p.lambda) - std::log(rest);
    return theta;
}

SsmParams from_working(const Eigen::VectorXd& theta, Eigen::Index n_beta, bool with_state) {
    const WorkingLayout layout{n_beta, with_state};
    if (theta.size() != layout.size()) throw std::invalid_argument("working vector has the wrong length");
    SsmParams p;
    if (with_state) {
        p.state.phi = std::tanh(theta(layout.phi()));
        p.state.sigma = std::exp(theta(layout.sigma()));
    } else {
        p.state = {0.0, 0.0};
    }
    p.beta = theta.segment(layout.beta(0), n_beta);
    p.gamma = std::exp(theta(layout.gamma()));
    const double a = theta(layout.pi());
    const double b = theta(layout.lambda());
    const double shift = std::max({0.0, a, b});
    const double e0 = std::exp(-shift);
    const double ea = std::exp(a - shift);
    const double eb = std::exp(b - shift);
    const double denom = e0 + ea + eb;
    p.pi = ea / denom;
    p.lambda = eb / denom;
    return p;
}

double beinf_glm_loglik(std::span<const MatchSequence> seqs, const SsmParams& p) {
    if (!(p.gamma > 0.0) || !std::isfinite(p.gamma) || !(p.pi >= 0.0) || !(p.lambda >= 0.0) ||
        !(p.pi + p.lambda < 1.0)) {
        return -kInf;
    }
    const double log_interior = std::log1p(-(p.pi + p.lambda));
    const double log_pi = std::log(p.pi);
    const double log_lambda = std::log(p.lambda);
    double total = 0.0;
    for (const auto& s : seqs) {
        for (Eigen::Index t = 0; t < s.length(); ++t) {
            const auto& y = s.y[static_cast<std::size_t>(t)];
            if (!y) continue;
            if (!(*y >= 0.0 && *y <= 1.0)) throw std::domain_error("relative stakes must lie in [0,1]");
            if (*y == 0.0) {
                total += log_pi;
            } else if (*y == 1.0) {
                total += log_lambda;
            } else {
                total += log_interior + log_beta_density_eta(*y, s.X.row(t).dot(p.beta), p.gamma);
            }
        }
    }
    return total;
}

const ParameterEstimate* FitResult::find(std::string_view name) const {
    for (const auto& p : params) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

std::vector<ParameterEstimate> wald_cis(const Eigen::VectorXd& w, const Eigen::MatrixXd& cov,
                                        const WorkingLayout& layout, std::span<const std::string> names,
                                        std::span<const std::string> labels) {
    const bool have_cov = cov.rows() == w.size() && cov.cols() == w.size();
    const SsmParams nat = from_working(w, layout.n_beta, layout.state);
    std::vector<ParameterEstimate> out;

    auto working_se = [&](Eigen::Index i) -> std::optional<double> {
        if (!have_cov || !(cov(i, i) > 0.0)) return std::nullopt;
        return std::sqrt(cov(i, i));
    };
    auto mapped = [&](std::string name, std::string label, Eigen::Index i, double estimate, auto inverse) {
        ParameterEstimate pe{std::move(name), std::move(label), estimate, working_se(i), {}, {}};
        if (pe.se_working) {
            pe.lower = inverse(w(i) - kZ95 * *pe.se_working);
            pe.upper = inverse(w(i) + kZ95 * *pe.se_working);
        }
        out.push_back(std::move(pe));
    };
    auto identity = [](double x) { return x; };
    auto expf = [](double x) { return std::exp(x); };
    auto tanhf = [](double x) { return std::tanh(x); };

    if (layout.state) {
        mapped("phi", "phi", layout.phi(), nat.state.phi, tanhf);
        mapped("sigma_s", "sigma_s", layout.sigma(), nat.state.sigma, expf);
    }
    for (Eigen::Index j = 0; j < layout.n_beta; ++j) {
        const auto js = static_cast<std::size_t>(j);
        mapped(js < names.size() ? names[js] : "beta" + std::to_string(j),
               js < labels.size() ? labels[js] : "beta" + std::to_string(j), layout.beta(j), nat.beta(j), identity);
    }
    mapped("gamma", "gamma", layout.gamma(), nat.gamma, expf);

    // logit(pi) = a - log(1 + e^b), so its gradient in (a, b) is (1, -lambda/(1-pi)).
    auto inflation = [&](std::string name, double value, double other, Eigen::Index own, Eigen::Index cross) {
        ParameterEstimate pe{name, name, value, working_se(own), {}, {}};
        if (have_cov) {
            const double g_cross = -other / (1.0 - value);
            const double var = cov(own, own) + 2.0 * g_cross * cov(own, cross) + g_cross * g_cross * cov(cross, cross);
            if (var > 0.0) {
                const double centre = logit(value);
                pe.lower = mean_from_predictor(centre - kZ95 * std::sqrt(var));
                pe.upper = mean_from_predictor(centre + kZ95 * std::sqrt(var));
            }
        }
        out.push_back(std::move(pe));
    };
    inflation("pi", nat.pi, nat.lambda, layout.pi(), layout.lambda());
    inflation("lambda", nat.lambda, nat.pi, layout.lambda(), layout.pi());
    return out;
}

FitResult fit_beinf_glm(std::span<const MatchSequence> seqs, const DesignSpec& spec, const FitOptions& options) {
    SsmParams start;
    if (options.start) {
        start = *options.start;
    } else {
        start.beta = logit_ols_start(seqs, spec.columns());
        start.gamma = 10.0;
        start.pi = 0.001;
        start.lambda = 0.001;
    }
    return run_fit(seqs, spec, options, false, start);
}

FitResult fit_beinf_glm(const Panel& panel, const DesignSpec& spec, const FitOptions& options) {
    const auto seqs = build_sequences(panel, spec, options.bridge_gaps);
    return fit_beinf_glm(seqs, spec, options);
}

FitResult fit_ssm(std::span<const MatchSequence> seqs, const DesignSpec& spec, const FitOptions& options) {
    SsmParams start;
    if (options.start) {
        start = *options.start;
    } else {
        FitOptions glm_options = options;
        glm_options.compute_hessian = false;
        glm_options.restarts = 0;
        const FitResult glm = fit_beinf_glm(seqs, spec, glm_options);
        start.beta = glm.estimate.beta;
        start.state = {0.9, 0.2};
        start.gamma = 10.0;
        start.pi = 0.001;
        start.lambda = 0.001;
    }
    return run_fit(seqs, spec, options, true, start);
}

FitResult fit_ssm(const Panel& panel, const DesignSpec& spec, const FitOptions& options) {
    const auto seqs = build_sequences(panel, spec, options.bridge_gaps);
    return fit_ssm(seqs, spec, options);
}

}  // namespace inplay
