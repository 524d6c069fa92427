#include "inplay/json_io.hpp"

#include <cmath>
#include <limits>

#include "inplay/error.hpp"

namespace inplay {
namespace {

Json vec(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Json mat(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec(m.row(i).transpose()));
    return rows;
}

Json opt(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

double num(const Json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw DataError(std::string("fit record lacks field '") + key + "'");
    if (it->is_null()) return std::numeric_limits<double>::quiet_NaN();
    return it->get<double>();
}

std::optional<double> opt_num(const Json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
}

Eigen::VectorXd to_vec(const Json& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = a[i].is_null() ? std::numeric_limits<double>::quiet_NaN() : a[i].get<double>();
    }
    return v;
}

Json spec_json(const DesignSpec& spec) {
    Json c = Json::array();
    for (auto cov : spec.covariates) c.push_back(std::string(key(cov)));
    return {{"name", spec.name}, {"covariates", c}};
}

Json state_json(const StateParams& s) { return {{"phi", s.phi}, {"sigma_s", s.sigma}}; }

}  // namespace

Json to_json(const RegressionFit& fit) {
    Json coefs = Json::array();
    for (std::size_t j = 0; j < fit.columns.size(); ++j) {
        const auto i = static_cast<Eigen::Index>(j);
        coefs.push_back({{"name", fit.columns[j]},
                         {"label", fit.labels[j]},
                         {"estimate", fit.beta(i)},
                         {"se", fit.se(i)},
                         {"lower", fit.ci_lower(i)},
                         {"upper", fit.ci_upper(i)}});
    }
    return {{"kind", "regression"},
            {"model", fit.model},
            {"n", fit.n},
            {"k", fit.k},
            {"clusters", fit.clusters},
            {"rss", fit.rss},
            {"residual_variance", fit.residual_variance},
            {"loglik", fit.loglik},
            {"aic", fit.aic},
            {"coefficients", coefs},
            {"covariance", mat(fit.covariance)}};
}

Json to_json(const FitResult& fit) {
    Json params = Json::array();
    for (const auto& p : fit.params) {
        params.push_back({{"name", p.name},
                          {"label", p.label},
                          {"estimate", p.estimate},
                          {"se_working", opt(p.se_working)},
                          {"lower", opt(p.lower)},
                          {"upper", opt(p.upper)}});
    }
    Json trace = Json::array();
    for (const auto& t : fit.trace) trace.push_back({t.iteration, t.value, t.grad_norm});
    return {{"kind", "bettors"},
            {"model", fit.model},
            {"spec", fit.spec},
            {"with_state", fit.with_state},
            {"grid", {{"m", fit.grid.m}, {"lower", fit.grid.lower}, {"upper", fit.grid.upper}}},
            {"n", fit.n_obs},
            {"n_params", fit.n_params},
            {"loglik", fit.loglik},
            {"aic", fit.aic},
            {"converged", fit.converged},
            {"iterations", fit.iterations},
            {"evaluations", fit.evaluations},
            {"grad_norm", fit.grad_norm},
            {"message", fit.message},
            {"hessian_pd", fit.hessian_pd},
            {"parameters", params},
            {"working", vec(fit.working)},
            {"working_covariance", mat(fit.working_cov)},
            {"trace", trace}};
}

Json to_json(const FilterCounts& c) {
    return {{"input_matches", c.input_matches},
            {"scoreless", c.scoreless},
            {"early_goal", c.early_goal},
            {"retained", c.retained},
            {"observations", c.observations}};
}

Json to_json(const SimConfig& c) {
    return {{"n_matches", c.n_matches},
            {"seed", c.seed},
            {"n_teams", c.n_teams},
            {"base_rate", c.base_rate},
            {"strength_sd", c.strength_sd},
            {"home_advantage", c.home_advantage},
            {"goal_hazard", c.goal_hazard},
            {"xg_goal_boost", c.xg_goal_boost},
            {"red_card_hazard", c.red_card_hazard},
            {"shot_rate", c.shot_rate},
            {"xg_shape", c.xg_shape},
            {"xg_mean", c.xg_mean},
            {"half_time_break", c.half_time_break},
            {"injury_time", c.injury_time},
            {"volume_log_mean", c.volume_log_mean},
            {"volume_log_sd", c.volume_log_sd},
            {"stake_shape", c.stake_shape},
            {"draw_share", c.draw_share},
            {"market_close_prob", c.market_close_prob},
            {"ticks_per_minute", c.ticks_per_minute},
            {"bookmaker",
             {{"spec", spec_json(c.bookmaker.spec)},
              {"beta", vec(c.bookmaker.beta)},
              {"noise_sd", c.bookmaker.noise_sd},
              {"anticipation", c.bookmaker.anticipation},
              {"margin", c.bookmaker.margin},
              {"prob_floor", c.bookmaker.prob_floor}}},
            {"bettors",
             {{"spec", spec_json(c.bettors.spec)},
              {"beta", vec(c.bettors.beta)},
              {"state", state_json(c.bettors.state)},
              {"gamma", c.bettors.gamma},
              {"pi", c.bettors.pi},
              {"lambda", c.bettors.lambda}}}};
}

Json to_json(const SimTruth& t) {
    Json teams = Json::array();
    for (std::size_t k = 0; k < t.teams.size(); ++k) {
        teams.push_back({{"team", t.teams[k]}, {"volume", t.team_volume[k]}});
    }
    Json matches = Json::array();
    for (const auto& m : t.matches) {
        matches.push_back({{"match_id", m.match_id},
                           {"rating_home", m.rating_home},
                           {"rating_away", m.rating_away},
                           {"prematch", {m.prematch.home, m.prematch.draw, m.prematch.away}},
                           {"volumediff", m.volumediff},
                           {"states", m.states},
                           {"eta", m.eta},
                           {"improb", m.improb}});
    }
    return {{"config", to_json(t.config)}, {"clamp_events", t.clamp_events}, {"teams", teams}, {"matches", matches}};
}

RegressionFit regression_from_json(const Json& j) {
    try {
        RegressionFit f;
        f.model = j.at("model").get<std::string>();
        f.n = j.at("n").get<Eigen::Index>();
        f.k = j.at("k").get<Eigen::Index>();
        f.clusters = j.at("clusters").get<Eigen::Index>();
        f.rss = num(j, "rss");
        f.residual_variance = num(j, "residual_variance");
        f.loglik = num(j, "loglik");
        f.aic = num(j, "aic");
        const auto& coefs = j.at("coefficients");
        const auto k = static_cast<Eigen::Index>(coefs.size());
        f.beta.resize(k);
        f.se.resize(k);
        f.ci_lower.resize(k);
        f.ci_upper.resize(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            const auto& c = coefs[static_cast<std::size_t>(i)];
            f.columns.push_back(c.at("name").get<std::string>());
            f.labels.push_back(c.at("label").get<std::string>());
            f.beta(i) = num(c, "estimate");
            f.se(i) = num(c, "se");
            f.ci_lower(i) = num(c, "lower");
            f.ci_upper(i) = num(c, "upper");
        }
        const auto& cov = j.at("covariance");
        f.covariance.resize(static_cast<Eigen::Index>(cov.size()), static_cast<Eigen::Index>(cov.size()));
        for (std::size_t r = 0; r < cov.size(); ++r) f.covariance.row(static_cast<Eigen::Index>(r)) = to_vec(cov[r]).transpose();
        return f;
    } catch (const Json::exception& e) {
        throw DataError(std::string("malformed regression fit record: ") + e.what());
    }
}

FitResult fit_result_from_json(const Json& j) {
    try {
        FitResult f;
        f.model = j.at("model").get<std::string>();
        f.spec = j.at("spec").get<std::string>();
        f.with_state = j.at("with_state").get<bool>();
        const auto& g = j.at("grid");
        f.grid = {g.at("m").get<int>(), g.at("lower").get<double>(), g.at("upper").get<double>()};
        f.n_obs = j.at("n").get<Eigen::Index>();
        f.n_params = j.at("n_params").get<Eigen::Index>();
        f.loglik = num(j, "loglik");
        f.aic = num(j, "aic");
        f.converged = j.at("converged").get<bool>();
        f.iterations = j.at("iterations").get<int>();
        f.evaluations = j.at("evaluations").get<long>();
        f.grad_norm = num(j, "grad_norm");
        f.message = j.at("message").get<std::string>();
        f.hessian_pd = j.at("hessian_pd").get<bool>();
        for (const auto& p : j.at("parameters")) {
            f.params.push_back({p.at("name").get<std::string>(), p.at("label").get<std::string>(), num(p, "estimate"),
                                opt_num(p, "se_working"), opt_num(p, "lower"), opt_num(p, "upper")});
        }
        f.working = to_vec(j.at("working"));
        const auto& cov = j.at("working_covariance");
        if (!cov.empty()) {
            f.working_cov.resize(static_cast<Eigen::Index>(cov.size()), static_cast<Eigen::Index>(cov.size()));
            for (std::size_t r = 0; r < cov.size(); ++r) {
                f.working_cov.row(static_cast<Eigen::Index>(r)) = to_vec(cov[r]).transpose();
            }
        }
        const Eigen::Index n_beta = f.working.size() - (f.with_state ? 5 : 3);
        if (n_beta < 0) throw DataError("fit record has a short working vector");
        f.estimate = from_working(f.working, n_beta, f.with_state);
        for (const auto& p : f.params) {
            if (p.name == "phi" || p.name == "sigma_s" || p.name == "gamma" || p.name == "pi" || p.name == "lambda") {
                continue;
            }
            f.columns.push_back(p.name);
            f.labels.push_back(p.label);
        }
        for (const auto& t : j.at("trace")) f.trace.push_back({t[0].get<int>(), t[1].get<double>(), t[2].is_null() ? 0.0 : t[2].get<double>()});
        return f;
    } catch (const Json::exception& e) {
        throw DataError(std::string("malformed bettors fit record: ") + e.what());
    }
}

ModelSummary model_summary_from_json(const Json& j) {
    const auto it = j.find("kind");
    if (it == j.end()) throw DataError("fit record lacks field 'kind'");
    if (*it == "regression") return model_summary(regression_from_json(j));
    if (*it == "bettors") return model_summary(fit_result_from_json(j));
    throw DataError("unknown fit record kind " + it->dump());
}

}  // namespace inplay
