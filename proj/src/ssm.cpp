#include "inplay/ssm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "inplay/beinf.hpp"
#include "parallel.hpp"

namespace inplay {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void check_y(double y) {
    if (!(y >= 0.0 && y <= 1.0)) throw std::domain_error("relative stakes must lie in [0,1]");
}

}  // namespace

double StateParams::stationary_sd() const { return sigma / std::sqrt(1.0 - phi * phi); }

void StateParams::validate() const {
    if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("state persistence must satisfy |phi| < 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("state noise sd must be > 0 (use the no-state model for sigma = 0)");
    }
}

Eigen::VectorXd Grid::midpoints() const {
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) b(i) = midpoint(i);
    return b;
}

void Grid::validate() const {
    if (m < 2) throw std::invalid_argument("grid needs at least two intervals");
    if (!(lower < upper)) throw std::invalid_argument("grid bounds must satisfy lower < upper");
}

Eigen::MatrixXd transition_matrix(const StateParams& state, const Grid& grid) {
    state.validate();
    grid.validate();
    const int m = grid.m;
    Eigen::MatrixXd G(m, m);
    Eigen::VectorXd cdf(m + 1);
    for (int i = 0; i < m; ++i) {
        const double centre = state.phi * grid.midpoint(i);
        for (int j = 0; j <= m; ++j) cdf(j) = normal_cdf((grid.edge(j) - centre) / state.sigma);
        for (int j = 0; j < m; ++j) G(i, j) = std::max(cdf(j + 1) - cdf(j), 0.0);
    }
    return G;
}

Eigen::VectorXd initial_distribution(const StateParams& state, const Grid& grid) {
    state.validate();
    grid.validate();
    const double sd = state.stationary_sd();
    Eigen::VectorXd d(grid.m);
    for (int i = 0; i < grid.m; ++i) {
        d(i) = std::max(normal_cdf(grid.edge(i + 1) / sd) - normal_cdf(grid.edge(i) / sd), 0.0);
    }
    return d;
}

std::size_t MatchSequence::observed() const {
    return static_cast<std::size_t>(std::count_if(y.begin(), y.end(), [](const auto& v) { return v.has_value(); }));
}

std::vector<MatchSequence> build_sequences(const Panel& panel, const DesignSpec& spec, bool bridge_gaps) {
    std::vector<MatchSequence> out;
    out.reserve(panel.matches.size());
    for (const auto& m : panel.matches) {
        if (m.rows.empty()) continue;
        MatchSequence seq;
        seq.match_id = m.match_id;
        const int first = m.rows.front().t;
        const int last = m.rows.back().t;
        const auto len = bridge_gaps ? static_cast<std::size_t>(last - first + 1) : m.rows.size();
        seq.t.reserve(len);
        seq.y.reserve(len);
        seq.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(len), spec.columns());
        Eigen::Index pos = 0;
        int prev_t = first - 1;
        for (const auto& row : m.rows) {
            if (bridge_gaps) {
                for (int gap = prev_t + 1; gap < row.t; ++gap) {
                    seq.t.push_back(gap);
                    seq.y.emplace_back(std::nullopt);
                    ++pos;
                }
            }
            seq.t.push_back(row.t);
            seq.y.push_back(row.stakerel);
            spec.fill_row(row, seq.X.row(pos));
            ++pos;
            prev_t = row.t;
        }
        out.push_back(std::move(seq));
    }
    return out;
}

Emissions compute_emissions(const MatchSequence& seq, const Eigen::VectorXd& beta, double gamma,
                            const Grid& grid) {
    const Eigen::Index T = seq.length();
    const int m = grid.m;
    Emissions e;
    e.scaled.resize(m, T);
    e.log_offset.assign(static_cast<std::size_t>(T), 0.0);
    e.kind.assign(static_cast<std::size_t>(T), EmissionKind::missing);
    // logistic(nu + b_i) from exp(+-nu) and precomputed exp(-+b_i): one exp per minute
    // instead of one per state.
    const Eigen::VectorXd b = grid.midpoints();
    const Eigen::ArrayXd exp_b = b.array().exp();
    const Eigen::ArrayXd exp_mb = (-b.array()).exp();
    const double lg_gamma = log_gamma(gamma);
    Eigen::VectorXd logh(m);
    for (Eigen::Index t = 0; t < T; ++t) {
        const auto& y = seq.y[static_cast<std::size_t>(t)];
        const auto ts = static_cast<std::size_t>(t);
        if (!y) continue;
        check_y(*y);
        if (*y == 0.0) {
            e.kind[ts] = EmissionKind::zero;
            continue;
        }
        if (*y == 1.0) {
            e.kind[ts] = EmissionKind::one;
            continue;
        }
        e.kind[ts] = EmissionKind::interior;
        const double nu = seq.X.row(t).dot(beta);
        const double ly = std::log(*y);
        const double l1y = std::log1p(-*y);
        const double exp_nu = std::exp(nu);
        const double exp_mnu = std::exp(-nu);
        for (int i = 0; i < m; ++i) {
            double mu, one_minus_mu;
            if (nu + b(i) >= 0.0) {
                const double q = exp_mnu * exp_mb(i);
                mu = 1.0 / (1.0 + q);
                one_minus_mu = q / (1.0 + q);
            } else {
                const double q = exp_nu * exp_b(i);
                mu = q / (1.0 + q);
                one_minus_mu = 1.0 / (1.0 + q);
            }
            const double a = gamma * mu;
            const double c = gamma * one_minus_mu;
            logh(i) = lg_gamma - log_gamma(a) - log_gamma(c) + (a - 1.0) * ly + (c - 1.0) * l1y;
        }
        const double offset = logh.maxCoeff();
        if (!std::isfinite(offset)) {
            e.log_offset[ts] = offset;
            e.scaled.col(t).setZero();
            continue;
        }
        e.log_offset[ts] = offset;
        e.scaled.col(t) = (logh.array() - offset).exp();
    }
    return e;
}

ForwardFilter::ForwardFilter(const StateParams& state, const Grid& grid)
    : gamma_(transition_matrix(state, grid)), gamma_t_(gamma_.transpose()), delta_(initial_distribution(state, grid)) {}

double ForwardFilter::loglik(const Emissions& e, double pi, double lambda) const {
    const auto T = static_cast<Eigen::Index>(e.kind.size());
    if (T == 0) throw std::invalid_argument("forward_loglik: empty observation sequence");
    const double log_interior = std::log1p(-(pi + lambda));
    const double log_pi = std::log(pi);
    const double log_lambda = std::log(lambda);
    Eigen::VectorXd alpha = delta_;
    Eigen::VectorXd v(alpha.size());
    double ll = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
        if (t == 0) {
            v = delta_;
        } else {
            v.noalias() = gamma_t_ * alpha;
        }
        switch (e.kind[static_cast<std::size_t>(t)]) {
            case EmissionKind::interior:
                v.array() *= e.scaled.col(t).array();
                ll += e.log_offset[static_cast<std::size_t>(t)] + log_interior;
                break;
            case EmissionKind::zero: ll += log_pi; break;
            case EmissionKind::one: ll += log_lambda; break;
            case EmissionKind::missing: break;
        }
        const double c = v.sum();
        if (!(c > 0.0) || !std::isfinite(ll)) return kNegInf;
        ll += std::log(c);
        alpha = v / c;
    }
    return ll;
}

double forward_loglik(const MatchSequence& seq, const SsmParams& params, const Grid& grid) {
    if (seq.length() == 0) throw std::invalid_argument("forward_loglik: empty observation sequence");
    const ForwardFilter filter(params.state, grid);
    return filter.loglik(compute_emissions(seq, params.beta, params.gamma, grid), params.pi, params.lambda);
}

double total_loglik(std::span<const MatchSequence> seqs, const SsmParams& params, const Grid& grid, int threads) {
    const ForwardFilter filter(params.state, grid);
    std::vector<double> per_match(seqs.size(), 0.0);
    detail::parallel_for(seqs.size(), threads, [&](std::size_t i) {
        per_match[i] =
            filter.loglik(compute_emissions(seqs[i], params.beta, params.gamma, grid), params.pi, params.lambda);
    });
    std::vector<std::size_t> order(seqs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return seqs[a].match_id < seqs[b].match_id; });
    double total = 0.0;
    for (std::size_t i : order) total += per_match[i];
    return total;
}

DecodedStates decode_states(const MatchSequence& seq, const SsmParams& params, const Grid& grid) {
    const Eigen::Index T = seq.length();
    if (T == 0) throw std::invalid_argument("decode_states: empty observation sequence");
    const ForwardFilter filter(params.state, grid);
    const Emissions e = compute_emissions(seq, params.beta, params.gamma, grid);
    const int m = grid.m;
    const Eigen::MatrixXd& G = filter.gamma();
    const Eigen::VectorXd b = grid.midpoints();

    auto emission = [&](Eigen::Index t) -> Eigen::VectorXd {
        if (e.kind[static_cast<std::size_t>(t)] == EmissionKind::interior) return e.scaled.col(t);
        return Eigen::VectorXd::Ones(m);
    };

    // Viterbi in log space; constant factors per step do not change the argmax.
    const Eigen::MatrixXd logG = G.array().log();
    Eigen::MatrixXd score(m, T);
    Eigen::MatrixXi back(m, T);
    score.col(0) = filter.delta().array().log() + emission(0).array().log();
    for (Eigen::Index t = 1; t < T; ++t) {
        const Eigen::VectorXd le = emission(t).array().log();
        for (int j = 0; j < m; ++j) {
            Eigen::Index arg = 0;
            const double best = (score.col(t - 1) + logG.col(j)).maxCoeff(&arg);
            score(j, t) = best + le(j);
            back(j, t) = static_cast<int>(arg);
        }
    }
    DecodedStates out;
    out.viterbi.resize(static_cast<std::size_t>(T));
    Eigen::Index state = 0;
    score.col(T - 1).maxCoeff(&state);
    for (Eigen::Index t = T - 1; t >= 0; --t) {
        out.viterbi[static_cast<std::size_t>(t)] = b(state);
        if (t > 0) state = back(state, t);
    }

    // Scaled forward-backward.
    Eigen::MatrixXd alpha(m, T);
    std::vector<double> scale(static_cast<std::size_t>(T));
    Eigen::VectorXd v = filter.delta();
    for (Eigen::Index t = 0; t < T; ++t) {
        if (t > 0) v = G.transpose() * alpha.col(t - 1);
        v.array() *= emission(t).array();
        const double c = v.sum();
        if (!(c > 0.0)) throw std::domain_error("decode_states: observation has zero likelihood on the grid");
        scale[static_cast<std::size_t>(t)] = c;
        alpha.col(t) = v / c;
    }
    out.smoothed_mean.resize(static_cast<std::size_t>(T));
    Eigen::VectorXd beta_t = Eigen::VectorXd::Ones(m);
    for (Eigen::Index t = T - 1; t >= 0; --t) {
        if (t < T - 1) {
            const Eigen::VectorXd w = emission(t + 1).cwiseProduct(beta_t);
            beta_t = G * w / scale[static_cast<std::size_t>(t + 1)];
        }
        const Eigen::VectorXd post = alpha.col(t).cwiseProduct(beta_t);
        out.smoothed_mean[static_cast<std::size_t>(t)] = post.dot(b) / post.sum();
    }
    return out;
}

}  // namespace inplay
