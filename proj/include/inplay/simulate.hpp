#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "inplay/covariates.hpp"
#include "inplay/panel.hpp"
#include "inplay/ssm.hpp"

namespace inplay {

// Bookmaker odds: the scorer-perspective Model 3 predictor evaluated for each
// side plus N(0, noise_sd) noise, draw probability taking the remainder.
struct BookmakerRule {
    DesignSpec spec = bookmaker_model(3);
    Eigen::VectorXd beta;        // defaults to the reference Model 3 coefficients
    double noise_sd = 0.026;
    double anticipation = 0.0;   // coefficient on 1/mintogoal for the eventual scorer
    double margin = 0.05;
    double prob_floor = 0.005;   // per-outcome lower bound before odds are formed
};

// Bettors: stakerel ~ BEINF(logistic(x'beta + s_t), gamma, pi, lambda) with
// s_t an AR(1) started from its stationary law.
struct BettorRule {
    DesignSpec spec = bettors_spec("final");
    Eigen::VectorXd beta;        // defaults to the reference final-spec coefficients
    StateParams state{0.974, 0.183};
    double gamma = 16.065;
    double pi = 0.00096;
    double lambda = 0.00053;
};

struct SimConfig {
    int n_matches = 306;
    std::uint64_t seed = 1;
    int n_teams = 18;

    // Pre-match strength: log scoring rates log(base_rate) + home_advantage +
    // a_home - a_away, with team ratings a ~ N(0, strength_sd).
    double base_rate = 1.35;
    double strength_sd = 0.3;
    double home_advantage = 0.2;

    // Hazards per played minute.
    double goal_hazard = 0.03;
    double xg_goal_boost = 1.0;   // hazard multiplier 1 + boost * xG created that minute
    double red_card_hazard = 0.0004;  // per team; at most one red card per team
    double shot_rate = 0.12;          // per team
    double xg_shape = 1.2;            // Gamma shape of one shot's xG
    double xg_mean = 0.1;

    // Clock: 45 + U{1..3} and 45 + U{2..6} played minutes around a break.
    int half_time_break = 15;
    bool injury_time = true;

    // Stakes: team sentiment volumes per minute are lognormal; minute totals
    // on the two teams are (v_home + v_away) * Gamma(stake_shape)/stake_shape.
    double volume_log_mean = 3.7;
    double volume_log_sd = 0.3;
    double stake_shape = 4.0;
    double draw_share = 0.13;
    double market_close_prob = 0.007;  // per minute
    int ticks_per_minute = 60;

    BookmakerRule bookmaker;
    BettorRule bettors;

    /// Fills empty coefficient vectors with the defaults and checks every
    /// invariant; throws std::invalid_argument on violation.
    void validate();
};

Eigen::VectorXd default_bookmaker_beta();
Eigen::VectorXd default_bettor_beta(std::string_view spec_name);

struct MatchTruth {
    std::string match_id;
    double rating_home = 0.0;
    double rating_away = 0.0;
    ProbTriple prematch;
    double volumediff = 0.0;      // configured sentiment gap, scorer minus opponent
    std::vector<double> states;   // s_t for t = 1..T-1 (whole match if scoreless)
    std::vector<double> eta;      // x'beta + s_t of the bettors' rule
    std::vector<double> improb;   // scorer-side bookmaker probability per minute
};

struct SimTruth {
    SimConfig config;
    std::vector<std::string> teams;
    std::vector<double> team_volume;  // sentiment volume per team
    std::vector<MatchTruth> matches;
    long clamp_events = 0;            // minutes where probabilities hit prob_floor
};

struct SimOutput {
    std::vector<MatchData> matches;  // sorted by match_id, ticks sorted by t_sec
    SimTruth truth;
};

/// Generates one synthetic season. Matches use independent RNG streams
/// derived from (seed, match index), so output does not depend on `threads`.
/// Throws std::domain_error if generated odds are not > 1.
SimOutput simulate_season(SimConfig config, int threads = 1);

/// Minute-level AR(1) path of length n started from the stationary law.
std::vector<double> simulate_state_path(const StateParams& state, int n, std::mt19937_64& rng);

/// Canned datasets: "two_team_equal", "dortmund_like", "redcard_min12".
/// Throws std::invalid_argument for other names.
std::vector<MatchData> make_fixture(std::string_view name);
std::vector<std::string> fixture_names();

}  // namespace inplay
