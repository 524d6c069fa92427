#pragma once

// Shared fixtures and independent reference computations for the test suites.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "inplay/panel.hpp"
#include "inplay/ssm.hpp"

namespace testing {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double beta_logpdf(double y, double a, double b) {
    return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(y) +
           (b - 1.0) * std::log1p(-y);
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Integral over (0, 1/2) of a density behaving like y^(a-1) near zero. An
// exponent below one is mapped away with y = u^(1/a). Points that round to 0
// contribute nothing, since f there would be a point mass.
inline double half_integral(const std::function<double(double)>& f, double a) {
    boost::math::quadrature::tanh_sinh<double> ts;
    auto at = [&](double y) { return y > 0.0 ? f(y) : 0.0; };
    if (a >= 1.0) return ts.integrate(at, 0.0, 0.5, 1e-12);
    auto g = [&](double u) {
        if (u <= 0.0) return 0.0;
        const double y = std::pow(u, 1.0 / a);
        return at(y) * y / (a * u);
    };
    return ts.integrate(g, 0.0, std::pow(0.5, a), 1e-12);
}

// Integral over (0,1). The right half is taken through 1 - y, which is only
// accurate when (1-y)^(b-1) mass within machine epsilon of 1 is negligible;
// callers with small b should integrate a mirrored density with half_integral.
inline double unit_integral(const std::function<double(double)>& f, double a, double b) {
    return half_integral(f, a) + half_integral([&](double z) { return f(1.0 - z); }, b);
}

// Hand-built match with uniform per-minute stakes and constant odds.
struct MatchBuilder {
    std::string id = "X1";
    std::string home = "Home";
    std::string away = "Away";
    inplay::OddsTriple prematch{2.0, 3.5, 4.0};
    inplay::OddsTriple inplay_odds{2.0, 3.5, 4.0};
    std::optional<int> goal = 20;
    inplay::Side scorer = inplay::Side::home;
    int ticks_per_minute = 1;
    int last_minute = -1;  // default: goal - 1, or 90 when scoreless
    std::function<double(int)> stake_home = [](int) { return 3.0; };
    std::function<double(int)> stake_away = [](int) { return 1.0; };
    std::function<double(int)> stake_draw = [](int) { return 0.5; };
    std::function<bool(int)> open = [](int) { return true; };
    std::vector<inplay::RedCardEvent> red_cards;
    std::vector<inplay::XgEvent> xg;
    std::optional<inplay::HalfTimeBreak> half_time;

    inplay::MatchData build() const {
        inplay::MatchData m;
        m.meta.match_id = id;
        m.meta.home_team = home;
        m.meta.away_team = away;
        m.meta.prematch = prematch;
        m.meta.first_goal_minute = goal;
        if (goal) m.meta.first_scorer = scorer;
        m.meta.red_cards = red_cards;
        m.meta.xg_events = xg;
        m.meta.half_time = half_time;
        const int last = last_minute >= 0 ? last_minute : (goal ? *goal - 1 : 90);
        for (int t = 1; t <= last; ++t) {
            for (int k = 0; k < ticks_per_minute; ++k) {
                inplay::TickRecord tick;
                tick.match_id = id;
                tick.t_sec = 60L * (t - 1) + 60L * k / ticks_per_minute;
                tick.odds = inplay_odds;
                tick.stake_home = stake_home(t) / ticks_per_minute;
                tick.stake_away = stake_away(t) / ticks_per_minute;
                tick.stake_draw = stake_draw(t) / ticks_per_minute;
                tick.market_open = open(t);
                m.ticks.push_back(tick);
            }
        }
        return m;
    }
};

// Sequence with covariate matrix X (intercept first) and response y.
inline inplay::MatchSequence make_sequence(std::string id, const Eigen::MatrixXd& X,
                                           const std::vector<std::optional<double>>& y) {
    inplay::MatchSequence s;
    s.match_id = std::move(id);
    s.X = X;
    s.y = y;
    for (std::size_t i = 0; i < y.size(); ++i) s.t.push_back(static_cast<int>(i) + 1);
    return s;
}

// Likelihood of one sequence by summing over every state path, with the
// transition probabilities, stationary masses and BEINF densities computed
// from their definitions. Exponential in the length; small cases only.
inline double brute_force_loglik(const inplay::MatchSequence& seq, const inplay::SsmParams& p,
                                 const inplay::Grid& g) {
    const int m = g.m;
    const double h = (g.upper - g.lower) / m;
    const double sd_stat = p.state.sigma / std::sqrt(1.0 - p.state.phi * p.state.phi);
    std::vector<double> mid(m), delta(m);
    std::vector<std::vector<double>> gam(m, std::vector<double>(m));
    for (int i = 0; i < m; ++i) {
        mid[i] = g.lower + (i + 0.5) * h;
        const double lo = g.lower + i * h, hi = lo + h;
        delta[i] = normal_cdf(hi / sd_stat) - normal_cdf(lo / sd_stat);
    }
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double lo = g.lower + j * h, hi = lo + h;
            const double c = p.state.phi * mid[i];
            gam[i][j] = normal_cdf((hi - c) / p.state.sigma) - normal_cdf((lo - c) / p.state.sigma);
        }
    }
    const auto T = static_cast<int>(seq.y.size());
    auto dens = [&](int t, int i) {
        const auto& y = seq.y[static_cast<std::size_t>(t)];
        if (!y) return 1.0;
        if (*y == 0.0) return p.pi;
        if (*y == 1.0) return p.lambda;
        const double nu = seq.X.row(t).dot(p.beta);
        const double mu = logistic(nu + mid[i]);
        return (1.0 - p.pi - p.lambda) * std::exp(beta_logpdf(*y, mu * p.gamma, (1.0 - mu) * p.gamma));
    };
    std::vector<int> path(static_cast<std::size_t>(T), 0);
    double total = 0.0;
    while (true) {
        double w = delta[path[0]] * dens(0, path[0]);
        for (int t = 1; t < T; ++t) w *= gam[path[t - 1]][path[t]] * dens(t, path[t]);
        total += w;
        int t = T - 1;
        while (t >= 0 && ++path[t] == m) path[t--] = 0;
        if (t < 0) break;
    }
    return std::log(total);
}

// Random parameters and a random sequence (interior, boundary and missing
// responses) for the path-enumeration checks.
struct RandomCase {
    inplay::MatchSequence seq;
    inplay::SsmParams params;
    inplay::Grid grid;
};

inline RandomCase random_case(std::mt19937_64& rng, int m, int T) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> z;
    RandomCase c;
    const double bound = 1.0 + 3.0 * u(rng);
    c.grid = {m, -bound, bound};
    c.params.state = {-0.95 + 1.9 * u(rng), 0.1 + 1.9 * u(rng)};
    c.params.beta = Eigen::Vector2d(z(rng), 0.5 * z(rng));
    c.params.gamma = 1.0 + 49.0 * u(rng);
    c.params.pi = 0.001 + 0.1 * u(rng);
    c.params.lambda = 0.001 + 0.1 * u(rng);
    Eigen::MatrixXd X(T, 2);
    std::vector<std::optional<double>> y;
    for (int t = 0; t < T; ++t) {
        X(t, 0) = 1.0;
        X(t, 1) = z(rng);
        const double r = u(rng);
        if (r < 0.1) {
            y.push_back(0.0);
        } else if (r < 0.2) {
            y.push_back(1.0);
        } else if (r < 0.3) {
            y.push_back(std::nullopt);
        } else {
            y.push_back(0.02 + 0.96 * u(rng));
        }
    }
    c.seq = make_sequence("R", X, y);
    return c;
}

// Fresh scratch directory under the working directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::current_path() / ("scratch_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testing
