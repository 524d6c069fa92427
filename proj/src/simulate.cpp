#include "inplay/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "inplay/beinf.hpp"
#include "inplay/odds.hpp"
#include "parallel.hpp"

namespace inplay {
namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t index, std::uint32_t purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), index, purpose};
    return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::string padded_id(const char* prefix, int i, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, i);
    return buf;
}

// Home/draw/away probabilities under independent Poisson scores.
ProbTriple poisson_outcome(double rate_home, double rate_away) {
    constexpr int kMax = 25;
    std::vector<double> ph(kMax + 1), pa(kMax + 1);
    ph[0] = std::exp(-rate_home);
    pa[0] = std::exp(-rate_away);
    for (int k = 1; k <= kMax; ++k) {
        ph[k] = ph[k - 1] * rate_home / k;
        pa[k] = pa[k - 1] * rate_away / k;
    }
    ProbTriple p{0.0, 0.0, 0.0};
    for (int i = 0; i <= kMax; ++i) {
        for (int j = 0; j <= kMax; ++j) {
            const double q = ph[i] * pa[j];
            if (i > j) {
                p.home += q;
            } else if (i == j) {
                p.draw += q;
            } else {
                p.away += q;
            }
        }
    }
    const double s = p.sum();
    return {p.home / s, p.draw / s, p.away / s};
}

double side_prob(const ProbTriple& p, Side s) { return s == Side::home ? p.home : p.away; }

// Keeps both team probabilities in [floor, cap] and the draw at least floor,
// so that odds formed with the margin stay above 1.
std::pair<ProbTriple, bool> bounded_triple(double home, double away, double floor, double cap) {
    bool clamped = false;
    for (double* v : {&home, &away}) {
        if (*v < floor) {
            *v = floor;
            clamped = true;
        } else if (*v > cap) {
            *v = cap;
            clamped = true;
        }
    }
    double draw = 1.0 - home - away;
    if (draw < floor) {
        const double shrink = (1.0 - floor) / (home + away);
        home *= shrink;
        away *= shrink;
        draw = floor;
        clamped = true;
    }
    return {{home, draw, away}, clamped};
}

struct MatchResult {
    MatchData data;
    MatchTruth truth;
    long clamps = 0;
};

// Scorer (or home, for scoreless matches) perspective at minute t.
MinuteObservation observe(const MatchMeta& meta, Side side, int t, double improbpre, double volumediff) {
    MinuteObservation o;
    o.match_id = meta.match_id;
    o.t = t;
    o.mintogoal = meta.first_goal_minute ? *meta.first_goal_minute - t : 0;
    o.improbpre = improbpre;
    for (const auto& rc : meta.red_cards) {
        if (rc.minute > t) continue;
        if (rc.side == side) {
            o.redcardteam = 1;
        } else {
            o.redcardopp = 1;
        }
    }
    for (const auto& x : meta.xg_events) {
        if (x.minute <= t) o.xgdiff += x.side == side ? x.xg : -x.xg;
    }
    o.home = side == Side::home ? 1 : 0;
    o.volumediff = volumediff;
    return o;
}

MatchResult simulate_match(const SimConfig& cfg, int index, const std::string& match_id, int home, int away,
                           const std::vector<std::string>& teams, const std::vector<double>& rating,
                           const std::vector<double>& volume) {
    auto rng = stream(cfg.seed, static_cast<std::uint32_t>(index), 1);
    MatchResult res;
    MatchMeta& meta = res.data.meta;
    meta.match_id = match_id;
    meta.home_team = teams[static_cast<std::size_t>(home)];
    meta.away_team = teams[static_cast<std::size_t>(away)];

    const double ra = rating[static_cast<std::size_t>(home)];
    const double rb = rating[static_cast<std::size_t>(away)];
    const double rate_home = cfg.base_rate * std::exp(cfg.home_advantage + ra - rb);
    const double rate_away = cfg.base_rate * std::exp(rb - ra);
    const ProbTriple raw = poisson_outcome(rate_home, rate_away);
    const double cap = 1.0 / (1.0 + cfg.bookmaker.margin) - 1e-3;
    const ProbTriple pre = bounded_triple(raw.home, raw.away, cfg.bookmaker.prob_floor, cap).first;
    meta.prematch = odds_from_probs(pre, cfg.bookmaker.margin);
    const ProbTriple pre_implied = implied_probs(meta.prematch);

    // Clock.
    std::uniform_int_distribution<int> extra1(1, 3), extra2(2, 6);
    const int first_half = 45 + (cfg.injury_time ? extra1(rng) : 0);
    const int second_half = 45 + (cfg.injury_time ? extra2(rng) : 0);
    const int brk = cfg.half_time_break;
    const int length = first_half + brk + second_half;
    if (brk > 0) meta.half_time = HalfTimeBreak{first_half + 1, first_half + brk};
    auto wall = [&](int played) { return played <= first_half ? played : played + brk; };

    // Events until the first goal.
    std::gamma_distribution<double> shot(cfg.xg_shape, cfg.xg_mean / cfg.xg_shape);
    bool carded[2] = {false, false};
    for (int p = 1; p <= first_half + second_half; ++p) {
        const int w = wall(p);
        double xg[2] = {0.0, 0.0};
        for (int s = 0; s < 2; ++s) {
            const Side side = s == 0 ? Side::home : Side::away;
            if (!carded[s] && uniform(rng) < cfg.red_card_hazard) {
                carded[s] = true;
                meta.red_cards.push_back({w, side});
            }
            if (uniform(rng) < cfg.shot_rate) {
                xg[s] = std::min(shot(rng), 0.95);
                meta.xg_events.push_back({w, side, xg[s]});
            }
        }
        const double boost_h = 1.0 + cfg.xg_goal_boost * xg[0];
        const double boost_a = 1.0 + cfg.xg_goal_boost * xg[1];
        const double hazard = std::min(1.0, cfg.goal_hazard * (1.0 + cfg.xg_goal_boost * (xg[0] + xg[1])));
        if (uniform(rng) < hazard) {
            const double wh = rate_home * boost_h;
            const double wa = rate_away * boost_a;
            meta.first_goal_minute = w;
            meta.first_scorer = uniform(rng) < wh / (wh + wa) ? Side::home : Side::away;
            break;
        }
    }

    const Side team = meta.first_scorer.value_or(Side::home);
    const int last = meta.first_goal_minute ? *meta.first_goal_minute - 1 : length;
    const double vol_team = volume[static_cast<std::size_t>(team == Side::home ? home : away)];
    const double vol_opp = volume[static_cast<std::size_t>(team == Side::home ? away : home)];

    MatchTruth& truth = res.truth;
    truth.match_id = match_id;
    truth.rating_home = ra;
    truth.rating_away = rb;
    truth.prematch = pre;
    truth.volumediff = vol_team - vol_opp;
    truth.states = simulate_state_path(cfg.bettors.state, last, rng);
    truth.eta.resize(static_cast<std::size_t>(last));
    truth.improb.resize(static_cast<std::size_t>(last));

    const BookmakerRule& bk = cfg.bookmaker;
    const BettorRule& bt = cfg.bettors;
    std::normal_distribution<double> noise(0.0, bk.noise_sd);
    std::gamma_distribution<double> total_draw(cfg.stake_shape, 1.0 / cfg.stake_shape);
    Eigen::RowVectorXd xb(bk.spec.columns());
    Eigen::RowVectorXd xs(bt.spec.columns());
    const int tpm = cfg.ticks_per_minute;
    res.data.ticks.reserve(static_cast<std::size_t>(last * tpm));

    for (int t = 1; t <= last; ++t) {
        const auto ts = static_cast<std::size_t>(t - 1);
        // Bookmaker.
        double p[2];
        for (int s = 0; s < 2; ++s) {
            const Side side = s == 0 ? Side::home : Side::away;
            const MinuteObservation o = observe(meta, side, t, side_prob(pre_implied, side), 0.0);
            bk.spec.fill_row(o, xb);
            p[s] = xb.dot(bk.beta) + noise(rng);
            if (side == team && meta.first_goal_minute) p[s] += bk.anticipation / (*meta.first_goal_minute - t);
        }
        const auto [probs, clamped] = bounded_triple(p[0], p[1], bk.prob_floor, cap);
        if (clamped) ++res.clamps;
        const OddsTriple odds = odds_from_probs(probs, bk.margin);
        truth.improb[ts] = side_prob(probs, team);

        // Bettors.
        const MinuteObservation o = observe(meta, team, t, side_prob(pre_implied, team), truth.volumediff);
        bt.spec.fill_row(o, xs);
        const double eta = xs.dot(bt.beta) + truth.states[ts];
        truth.eta[ts] = eta;
        const bool open = !(uniform(rng) < cfg.market_close_prob);
        double stake_team = 0.0, stake_opp = 0.0, stake_draw = 0.0;
        if (open) {
            const BeinfParams bp{std::clamp(mean_from_predictor(eta), 1e-12, 1.0 - 1e-12), bt.gamma, bt.pi,
                                 bt.lambda};
            const double y = sample(bp, rng);
            const double total = (vol_team + vol_opp) * total_draw(rng);
            stake_team = total * y;
            stake_opp = total * (1.0 - y);
            stake_draw = total * cfg.draw_share / (1.0 - cfg.draw_share);
        }
        const double sh = team == Side::home ? stake_team : stake_opp;
        const double sa = team == Side::home ? stake_opp : stake_team;
        for (int k = 0; k < tpm; ++k) {
            TickRecord tick;
            tick.match_id = match_id;
            tick.t_sec = 60L * (t - 1) + (60L * k) / tpm;
            tick.odds = odds;
            tick.stake_home = sh / tpm;
            tick.stake_draw = stake_draw / tpm;
            tick.stake_away = sa / tpm;
            tick.market_open = open;
            res.data.ticks.push_back(std::move(tick));
        }
    }
    return res;
}

}  // namespace

Eigen::VectorXd default_bookmaker_beta() {
    Eigen::VectorXd b(8);
    b << -0.004, 1.003, 0.001, -0.000013, -0.004, -0.120, 0.173, 0.163;
    return b;
}

Eigen::VectorXd default_bettor_beta(std::string_view spec_name) {
    if (spec_name == "final") {
        Eigen::VectorXd b(9);
        b << -0.762, 1.753, 0.000, -0.767, 0.681, -0.005, 0.047, 3.627, 0.096;
        return b;
    }
    if (spec_name == "basic") {
        Eigen::VectorXd b(9);
        b << -1.785, 4.520, 0.002, 0.00001, -0.004, -0.630, 0.661, 3.497, 0.089;
        return b;
    }
    if (spec_name == "noss") {
        Eigen::VectorXd b(9);
        b << -1.700, 4.333, 0.008, -0.00001, -0.014, -0.591, 0.418, 7.961, -0.109;
        return b;
    }
    if (spec_name == "full") {
        Eigen::VectorXd b(11);
        b << -0.842, 1.929, 0.004, 0.0, -0.007, -0.777, 0.682, 3.640, -0.009, 0.047, 0.095;
        return b;
    }
    if (spec_name == "intercept") return Eigen::VectorXd::Constant(1, 0.33);
    throw std::invalid_argument("no default coefficients for bettors spec '" + std::string(spec_name) + "'");
}

void SimConfig::validate() {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("invalid simulation config: ") + what);
    };
    require(n_matches >= 0, "n_matches must be >= 0");
    require(n_teams >= 2, "n_teams must be >= 2");
    require(base_rate > 0.0 && std::isfinite(base_rate), "base_rate must be > 0");
    require(strength_sd >= 0.0, "strength_sd must be >= 0");
    require(goal_hazard >= 0.0 && goal_hazard <= 1.0, "goal_hazard must lie in [0,1]");
    require(xg_goal_boost >= 0.0, "xg_goal_boost must be >= 0");
    require(red_card_hazard >= 0.0 && red_card_hazard <= 1.0, "red_card_hazard must lie in [0,1]");
    require(shot_rate >= 0.0 && shot_rate <= 1.0, "shot_rate must lie in [0,1]");
    require(xg_shape > 0.0 && xg_mean > 0.0, "xG shape and mean must be > 0");
    require(half_time_break >= 0, "half_time_break must be >= 0");
    require(volume_log_sd >= 0.0 && stake_shape > 0.0, "stake parameters must be positive");
    require(draw_share >= 0.0 && draw_share < 1.0, "draw_share must lie in [0,1)");
    require(market_close_prob >= 0.0 && market_close_prob <= 1.0, "market_close_prob must lie in [0,1]");
    require(ticks_per_minute >= 1 && ticks_per_minute <= 60, "ticks_per_minute must lie in 1..60");
    require(bookmaker.margin >= 0.0, "margin must be >= 0");
    require(bookmaker.noise_sd >= 0.0, "bookmaker noise_sd must be >= 0");
    require(bookmaker.prob_floor > 0.0 && 3.0 * bookmaker.prob_floor < 1.0 / (1.0 + bookmaker.margin) - 1e-3,
            "prob_floor too large for the margin");
    if (bookmaker.beta.size() == 0) {
        require(bookmaker.spec.covariates == bookmaker_model(3).covariates,
                "bookmaker coefficients are required for a non-default rule");
        bookmaker.beta = default_bookmaker_beta();
    }
    require(bookmaker.beta.size() == bookmaker.spec.columns(), "bookmaker coefficient count mismatch");
    if (bettors.beta.size() == 0) bettors.beta = default_bettor_beta(bettors.spec.name);
    require(bettors.beta.size() == bettors.spec.columns(), "bettor coefficient count mismatch");
    bettors.state.validate();
    require(bettors.gamma > 0.0, "bettor precision must be > 0");
    require(bettors.pi >= 0.0 && bettors.lambda >= 0.0 && bettors.pi + bettors.lambda < 1.0,
            "bettor inflation probabilities invalid");
}

std::vector<double> simulate_state_path(const StateParams& state, int n, std::mt19937_64& rng) {
    state.validate();
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> s(static_cast<std::size_t>(std::max(n, 0)));
    for (std::size_t t = 0; t < s.size(); ++t) {
        s[t] = t == 0 ? state.stationary_sd() * z(rng) : state.phi * s[t - 1] + state.sigma * z(rng);
    }
    return s;
}

SimOutput simulate_season(SimConfig config, int threads) {
    config.validate();
    SimOutput out;
    SimTruth& truth = out.truth;
    const int width = config.n_teams >= 100 ? 3 : 2;
    auto league = stream(config.seed, 0xffffffffu, 2);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> rating;
    for (int k = 0; k < config.n_teams; ++k) {
        truth.teams.push_back(padded_id("Team", k + 1, width));
        rating.push_back(config.strength_sd * z(league));
        truth.team_volume.push_back(std::exp(config.volume_log_mean + config.volume_log_sd * z(league)));
    }

    // Double round robin, repeated as often as needed.
    std::vector<std::pair<int, int>> fixtures;
    for (int h = 0; h < config.n_teams; ++h) {
        for (int a = 0; a < config.n_teams; ++a) {
            if (h != a) fixtures.emplace_back(h, a);
        }
    }
    int id_width = 4;
    for (int n = config.n_matches; n >= 10000; n /= 10) ++id_width;

    std::vector<MatchResult> results(static_cast<std::size_t>(config.n_matches));
    detail::parallel_for(results.size(), threads, [&](std::size_t i) {
        const auto& [h, a] = fixtures[i % fixtures.size()];
        results[i] = simulate_match(config, static_cast<int>(i), padded_id("M", static_cast<int>(i) + 1, id_width), h,
                                    a, truth.teams, rating, truth.team_volume);
    });
    for (auto& r : results) {
        truth.clamp_events += r.clamps;
        out.matches.push_back(std::move(r.data));
        truth.matches.push_back(std::move(r.truth));
    }
    truth.config = std::move(config);
    return out;
}

std::vector<std::string> fixture_names() { return {"two_team_equal", "dortmund_like", "redcard_min12"}; }

std::vector<MatchData> make_fixture(std::string_view name) {
    struct Recipe {
        ProbTriple prematch;
        int goal_minute;
        std::vector<RedCardEvent> red_cards;
        double team_share;  // of the stakes on the two teams
        double drift;       // per-minute change of the scorer's probability
    };
    Recipe r;
    std::string home = "Alpha", away = "Beta";
    if (name == "two_team_equal") {
        r = {{0.4, 0.2, 0.4}, 11, {}, 0.5, 0.0};
    } else if (name == "dortmund_like") {
        r = {{0.747, 0.158, 0.095}, 11, {}, 0.7, -0.002};
        home = "Favourite";
        away = "Underdog";
    } else if (name == "redcard_min12") {
        r = {{0.45, 0.27, 0.28}, 20, {{12, Side::away}}, 0.6, 0.0};
    } else {
        throw std::invalid_argument("unknown fixture '" + std::string(name) + "'");
    }
    constexpr double kMargin = 0.05;
    constexpr int kTicks = 2;
    std::vector<MatchData> out;
    for (int i = 1; i <= 3; ++i) {
        MatchData m;
        m.meta.match_id = std::string(name) + "_" + std::to_string(i);
        m.meta.home_team = i % 2 ? home : away;
        m.meta.away_team = i % 2 ? away : home;
        const bool flipped = i % 2 == 0;
        ProbTriple pre = r.prematch;
        if (flipped) std::swap(pre.home, pre.away);
        m.meta.prematch = odds_from_probs(pre, kMargin);
        m.meta.first_goal_minute = r.goal_minute;
        m.meta.first_scorer = flipped ? Side::away : Side::home;
        for (auto rc : r.red_cards) {
            if (flipped) rc.side = other(rc.side);
            m.meta.red_cards.push_back(rc);
        }
        for (int t = 1; t < r.goal_minute; ++t) {
            ProbTriple p = r.prematch;
            p.home += r.drift * (t - 1);
            p.draw -= r.drift * (t - 1);
            if (flipped) std::swap(p.home, p.away);
            const double team = 10.0 * r.team_share;
            const double opp = 10.0 - team;
            for (int k = 0; k < kTicks; ++k) {
                TickRecord tick;
                tick.match_id = m.meta.match_id;
                tick.t_sec = 60L * (t - 1) + 30L * k;
                tick.odds = odds_from_probs(p, kMargin);
                tick.stake_home = flipped ? opp : team;
                tick.stake_away = flipped ? team : opp;
                tick.stake_draw = 1.0;
                m.ticks.push_back(tick);
            }
        }
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace inplay
