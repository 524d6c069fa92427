#include "commands.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "inplay/csv.hpp"
#include "inplay/error.hpp"
#include "inplay/estimate.hpp"
#include "inplay/json_io.hpp"
#include "inplay/linreg.hpp"
#include "inplay/panel.hpp"
#include "inplay/report.hpp"
#include "inplay/simulate.hpp"

namespace inplay::cli {
namespace {

namespace fs = std::filesystem;
using csv::format_double;

constexpr const char* kToolVersion = "inplay 0.1.0";

// Output directory plus the bookkeeping needed for the run manifest.
class Run {
public:
    Run(std::string command, std::string out_dir) : command_(std::move(command)), dir_(std::move(out_dir)) {}

    void input(const std::string& path) { inputs_.push_back({{"path", path}, {"sha256", sha256_file(path)}}); }

    template <typename Fn>
    void write(const std::string& name, Fn&& fn) {
        fs::create_directories(dir_);
        const fs::path path = dir_ / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw DataError("cannot open '" + path.string() + "' for writing");
        fn(f);
        f.flush();
        if (!f) throw DataError("failed writing '" + path.string() + "'");
        outputs_.push_back(name);
    }

    void write_json(const std::string& name, const Json& j) {
        write(name, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
    }

    void manifest(const std::string& tag, const std::string& config, std::optional<std::uint64_t> seed) {
        Json m = {{"command", command_}, {"tool", kToolVersion}};
        m["seed"] = seed ? Json(*seed) : Json(nullptr);
        m["config"] = config;
        m["inputs"] = inputs_;
        m["outputs"] = outputs_;
        write_json("manifest_" + tag + ".json", m);
    }

private:
    std::string command_;
    fs::path dir_;
    Json inputs_ = Json::array();
    std::vector<std::string> outputs_;
};

std::uint64_t replication_seed(std::uint64_t seed, int r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r), 0x7265u};
    std::mt19937_64 gen(seq);
    return gen();
}

StateParams default_state(const std::string& spec) {
    if (spec == "basic" || spec == "noss") return {0.984, 0.176};
    return {0.974, 0.183};
}

// ----------------------------------------------------------------- simulate

struct SimulateArgs {
    SimConfig cfg;
    std::string out;
    std::string fixture;
    std::string bettors = "final";
    std::optional<double> phi, sigma;
    int threads = 1;
};

void add_simulate(CLI::App& app, SimulateArgs& a) {
    app.add_option("--out", a.out, "Output directory")->required();
    app.add_option("--fixture", a.fixture, "Write a canned dataset instead of simulating")
        ->check(CLI::IsMember(fixture_names()));
    app.add_option("--matches", a.cfg.n_matches, "Number of matches")->capture_default_str();
    app.add_option("--seed", a.cfg.seed, "Master seed")->capture_default_str();
    app.add_option("--teams", a.cfg.n_teams, "Number of teams")->capture_default_str();
    app.add_option("--ticks-per-minute", a.cfg.ticks_per_minute, "Ticks per minute (1..60)")->capture_default_str();
    app.add_option("--goal-hazard", a.cfg.goal_hazard, "First-goal hazard per played minute")->capture_default_str();
    app.add_option("--xg-goal-boost", a.cfg.xg_goal_boost, "Hazard multiplier per unit xG")->capture_default_str();
    app.add_option("--red-card-hazard", a.cfg.red_card_hazard, "Red-card hazard per team and minute")
        ->capture_default_str();
    app.add_option("--market-close-prob", a.cfg.market_close_prob, "Per-minute market suspension probability")
        ->capture_default_str();
    app.add_option("--half-time-break", a.cfg.half_time_break, "Wall-clock minutes of the break")
        ->capture_default_str();
    app.add_option("--margin", a.cfg.bookmaker.margin, "Bookmaker margin")->capture_default_str();
    app.add_option("--noise-sd", a.cfg.bookmaker.noise_sd, "Bookmaker probability noise sd")->capture_default_str();
    app.add_option("--anticipation", a.cfg.bookmaker.anticipation, "Bookmaker coefficient on 1/mintogoal")
        ->capture_default_str();
    app.add_option("--bettors-spec", a.bettors, "Bettors' generating specification")
        ->check(CLI::IsMember({"basic", "final", "full", "intercept"}))
        ->capture_default_str();
    app.add_option("--phi", a.phi, "State persistence (default depends on --bettors-spec)");
    app.add_option("--sigma-s", a.sigma, "State noise sd (default depends on --bettors-spec)");
    app.add_option("--gamma", a.cfg.bettors.gamma, "Beta precision")->capture_default_str();
    app.add_option("--pi", a.cfg.bettors.pi, "Point mass at 0")->capture_default_str();
    app.add_option("--lambda", a.cfg.bettors.lambda, "Point mass at 1")->capture_default_str();
    app.add_option("--threads", a.threads, "Worker threads")->capture_default_str();
}

int cmd_simulate(SimulateArgs& a, const std::string& config, std::ostream& out) {
    Run run("simulate", a.out);
    std::vector<MatchData> matches;
    std::optional<SimTruth> truth;
    if (!a.fixture.empty()) {
        matches = make_fixture(a.fixture);
    } else {
        a.cfg.bettors.spec = bettors_spec(a.bettors);
        a.cfg.bettors.beta.resize(0);
        a.cfg.bettors.state = default_state(a.bettors);
        if (a.phi) a.cfg.bettors.state.phi = *a.phi;
        if (a.sigma) a.cfg.bettors.state.sigma = *a.sigma;
        auto sim = simulate_season(a.cfg, a.threads);
        matches = std::move(sim.matches);
        truth = std::move(sim.truth);
    }
    std::vector<MatchMeta> metas;
    for (const auto& m : matches) metas.push_back(m.meta);
    run.write("ticks.csv", [&](std::ostream& o) {
        bool header = true;
        for (const auto& m : matches) {
            write_ticks_csv(o, m.ticks, header);
            header = false;
        }
        if (header) write_ticks_csv(o, {}, true);
    });
    run.write("meta.csv", [&](std::ostream& o) { write_meta_csv(o, metas); });
    if (truth) run.write_json("truth.json", to_json(*truth));
    run.manifest("simulate", config, a.fixture.empty() ? std::optional(a.cfg.seed) : std::nullopt);
    out << "wrote " << matches.size() << " matches to " << a.out << '\n';
    return kOk;
}

// ------------------------------------------------------------------ prepare

struct PrepareArgs {
    std::string ticks, meta, out;
    int min_goal_minute = 6;
};

void add_prepare(CLI::App& app, PrepareArgs& a) {
    app.add_option("--ticks", a.ticks, "ticks.csv")->required()->check(CLI::ExistingFile);
    app.add_option("--meta", a.meta, "meta.csv")->required()->check(CLI::ExistingFile);
    app.add_option("--out", a.out, "Output directory")->required();
    app.add_option("--min-goal-minute", a.min_goal_minute, "Drop matches whose first goal is earlier")
        ->capture_default_str();
}

int cmd_prepare(const PrepareArgs& a, const std::string& config, std::ostream& out) {
    Run run("prepare", a.out);
    run.input(a.ticks);
    run.input(a.meta);
    const auto matches = join_matches(read_meta_csv(a.meta), read_ticks_csv(a.ticks));
    const auto prepared = prepare_panel(matches, a.min_goal_minute);
    const Panel bettors = exclude_closed_market(prepared.panel);
    run.write("panel.csv", [&](std::ostream& o) { write_panel_csv(o, prepared.panel); });
    run.write("volumes.csv", [&](std::ostream& o) { write_volumes_csv(o, prepared.volumes); });
    Json counts = to_json(prepared.counts);
    counts["bookmaker_observations"] = prepared.panel.observation_count();
    counts["closed_market_minutes"] = prepared.panel.observation_count() - bettors.observation_count();
    counts["bettors_observations"] = bettors.observation_count();
    run.write_json("filters.json", counts);
    run.manifest("prepare", config, std::nullopt);
    out << "retained " << prepared.counts.retained << " of " << prepared.counts.input_matches << " matches, "
        << prepared.panel.observation_count() << " minutes\n";
    return kOk;
}

// ------------------------------------------------------------ fit-bookmaker

struct BookmakerArgs {
    std::string panel, out;
    int model = 3;
    bool no_xg = false;
};

void add_fit_bookmaker(CLI::App& app, BookmakerArgs& a) {
    app.add_option("--panel", a.panel, "panel.csv from prepare")->required()->check(CLI::ExistingFile);
    app.add_option("--out", a.out, "Output directory")->required();
    app.add_option("--model", a.model, "Model 1..4")->check(CLI::Range(1, 4))->capture_default_str();
    app.add_flag("--no-xg", a.no_xg, "Drop the xgdiff-per-minute regressor");
}

int cmd_fit_bookmaker(const BookmakerArgs& a, const std::string& config, std::ostream& out) {
    Run run("fit-bookmaker", a.out);
    run.input(a.panel);
    const DesignSpec spec = bookmaker_model(a.model, !a.no_xg);
    const Design design = build_design(read_panel_csv(a.panel), spec);
    RegressionFit fit;
    try {
        fit = fit_regression(design);
    } catch (const std::exception& e) {
        run.write_json("bookmaker_" + spec.name + "_error.json",
                       {{"command", "fit-bookmaker"}, {"model", spec.name}, {"error", e.what()}});
        throw EstimationError(e.what());
    }
    run.write_json("bookmaker_" + spec.name + ".json", to_json(fit));
    run.write("bookmaker_" + spec.name + ".md", [&](std::ostream& o) {
        write_regression_table(o, std::span<const RegressionFit>(&fit, 1));
    });
    run.manifest("fit-bookmaker_" + spec.name, config, std::nullopt);
    out << spec.name << ": n = " << fit.n << ", AIC = " << format_double(fit.aic) << '\n';
    return kOk;
}

// -------------------------------------------------------------- fit-bettors

struct BettorsArgs {
    std::string panel, out;
    std::string spec = "final";
    int grid_m = 95;
    double bound = 3.0;
    int max_iter = 500;
    int threads = 1;
    int restarts = 0;
    std::uint64_t seed = 1;
    bool trace = false;
    bool decode = false;
    bool bridge_gaps = false;
};

void add_fit_bettors(CLI::App& app, BettorsArgs& a) {
    app.add_option("--panel", a.panel, "panel.csv from prepare")->required()->check(CLI::ExistingFile);
    app.add_option("--out", a.out, "Output directory")->required();
    app.add_option("--spec", a.spec, "noss (no state), basic, final or full")
        ->check(CLI::IsMember({"noss", "basic", "final", "full", "intercept"}))
        ->capture_default_str();
    app.add_option("--grid-m", a.grid_m, "Number of state intervals")->check(CLI::Range(2, 2000))->capture_default_str();
    app.add_option("--grid-bound", a.bound, "State grid covers [-bound, bound]")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--max-iter", a.max_iter, "BFGS iteration limit")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--threads", a.threads, "Likelihood worker threads")->capture_default_str();
    app.add_option("--restarts", a.restarts, "Additional jittered starts")->capture_default_str();
    app.add_option("--seed", a.seed, "Seed for restart jitter")->capture_default_str();
    app.add_flag("--trace", a.trace, "Write the optimizer trace");
    app.add_flag("--decode", a.decode, "Write decoded state paths");
    app.add_flag("--bridge-gaps", a.bridge_gaps, "Advance the state through dropped minutes instead of one step per row");
}

int cmd_fit_bettors(const BettorsArgs& a, const std::string& config, std::ostream& out, std::ostream& err) {
    Run run("fit-bettors", a.out);
    run.input(a.panel);
    const Panel panel = exclude_closed_market(read_panel_csv(a.panel));
    const DesignSpec spec = bettors_spec(a.spec);
    FitOptions opt;
    opt.grid = {a.grid_m, -a.bound, a.bound};
    opt.optim.max_iter = a.max_iter;
    opt.threads = a.threads;
    opt.restarts = a.restarts;
    opt.seed = a.seed;
    opt.bridge_gaps = a.bridge_gaps;
    const bool state = a.spec != "noss";
    const auto seqs = build_sequences(panel, spec, opt.bridge_gaps);
    const std::string stem = "bettors_" + a.spec;
    FitResult fit;
    try {
        fit = state ? fit_ssm(seqs, spec, opt) : fit_beinf_glm(seqs, spec, opt);
    } catch (const std::exception& e) {
        run.write_json(stem + "_error.json", {{"command", "fit-bettors"}, {"spec", a.spec}, {"error", e.what()}});
        throw EstimationError(e.what());
    }
    run.write_json(stem + ".json", to_json(fit));
    run.write(stem + ".md", [&](std::ostream& o) { write_ssm_table(o, std::span<const FitResult>(&fit, 1)); });
    if (a.trace) {
        run.write(stem + "_trace.csv", [&](std::ostream& o) {
            o << "iteration,objective,grad_norm\n";
            for (const auto& t : fit.trace) {
                o << t.iteration << ',' << format_double(t.value) << ',' << format_double(t.grad_norm) << '\n';
            }
        });
    }
    if (a.decode && state) {
        run.write(stem + "_states.csv", [&](std::ostream& o) {
            o << "match_id,t,viterbi,smoothed_mean\n";
            for (const auto& seq : seqs) {
                const auto d = decode_states(seq, fit.estimate, opt.grid);
                for (std::size_t i = 0; i < seq.t.size(); ++i) {
                    o << csv::quote_if_needed(seq.match_id) << ',' << seq.t[i] << ',' << format_double(d.viterbi[i])
                      << ',' << format_double(d.smoothed_mean[i]) << '\n';
                }
            }
        });
    }
    run.manifest("fit-bettors_" + a.spec, config, opt.restarts > 0 ? std::optional(a.seed) : std::nullopt);
    out << stem << ": n = " << fit.n_obs << ", loglik = " << format_double(fit.loglik)
        << ", AIC = " << format_double(fit.aic) << '\n';
    if (!fit.converged) {
        err << "estimation did not converge: " << fit.message << '\n';
        return kEstimationError;
    }
    if (!fit.hessian_pd) err << "warning: observed information is not positive definite; no intervals reported\n";
    return kOk;
}

// ------------------------------------------------------------------- report

struct ReportArgs {
    std::string panel, out;
    std::vector<std::string> fits;
    std::vector<std::string> matches;
};

void add_report(CLI::App& app, ReportArgs& a) {
    app.add_option("--panel", a.panel, "panel.csv from prepare")->required()->check(CLI::ExistingFile);
    app.add_option("--out", a.out, "Output directory")->required();
    app.add_option("--fit", a.fits, "Fit JSON files to tabulate and compare")->check(CLI::ExistingFile);
    app.add_option("--match", a.matches, "Match ids to export (default: first match)");
}

int cmd_report(const ReportArgs& a, const std::string& config, std::ostream& out) {
    Run run("report", a.out);
    run.input(a.panel);
    const Panel panel = read_panel_csv(a.panel);
    run.write("summary.md", [&](std::ostream& o) {
        o << "# Summary statistics\n\n";
        write_summary_markdown(o, summarize(panel));
    });
    run.write("correlations.csv", [&](std::ostream& o) { write_correlations_csv(o, correlations(panel)); });

    std::vector<RegressionFit> regressions;
    std::vector<FitResult> bettors;
    std::vector<ModelSummary> summaries;
    for (const auto& path : a.fits) {
        run.input(path);
        std::ifstream f(path);
        Json j;
        try {
            j = Json::parse(f);
        } catch (const Json::exception& e) {
            throw DataError("cannot parse '" + path + "': " + e.what());
        }
        const std::string kind = j.value("kind", "");
        if (kind == "regression") {
            regressions.push_back(regression_from_json(j));
            summaries.push_back(model_summary(regressions.back()));
        } else if (kind == "bettors") {
            bettors.push_back(fit_result_from_json(j));
            summaries.push_back(model_summary(bettors.back()));
        } else {
            throw DataError("'" + path + "' is not a fit record");
        }
    }
    if (!summaries.empty()) {
        const auto rows = compare_models(summaries);
        run.write("model_comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, rows); });
        run.write("tables.md", [&](std::ostream& o) {
            if (!regressions.empty()) {
                o << "# Bookmaker models\n\n";
                write_regression_table(o, regressions);
                o << '\n';
            }
            if (!bettors.empty()) {
                o << "# Bettors' models\n\n";
                write_ssm_table(o, bettors);
            }
        });
    }
    std::vector<std::string> ids = a.matches;
    if (ids.empty() && !panel.matches.empty()) ids.push_back(panel.matches.front().match_id);
    for (const auto& id : ids) {
        run.write("match_" + id + "_series.csv", [&](std::ostream& o) { export_match_series(o, panel, id); });
    }
    run.manifest("report", config, std::nullopt);
    out << "report written to " << a.out << '\n';
    return kOk;
}

// ------------------------------------------------------------------ recover

struct RecoverArgs {
    std::string out;
    std::string target = "bettors";
    std::string spec = "basic";
    int model = 3;
    int replications = 20;
    std::uint64_t seed = 1;
    int matches = 250;
    int ticks = 1;
    double anticipation = 0.0;
    double red_card_hazard = SimConfig{}.red_card_hazard;
    int grid_m = 95;
    double bound = 3.0;
    int max_iter = 500;
    int threads = 1;
};

void add_recover(CLI::App& app, RecoverArgs& a) {
    app.add_option("--out", a.out, "Output directory")->required();
    app.add_option("--target", a.target, "bettors (SSM) or bookmaker (OLS)")
        ->check(CLI::IsMember({"bettors", "bookmaker"}))
        ->capture_default_str();
    app.add_option("--spec", a.spec, "Bettors' specification")
        ->check(CLI::IsMember({"basic", "final", "full"}))
        ->capture_default_str();
    app.add_option("--model", a.model, "Bookmaker model (3 or 4)")->check(CLI::IsMember({3, 4}))->capture_default_str();
    app.add_option("--replications", a.replications, "Monte Carlo replications")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--seed", a.seed, "Master seed")->capture_default_str();
    app.add_option("--matches", a.matches, "Matches per replication")->capture_default_str();
    app.add_option("--ticks-per-minute", a.ticks, "Simulated ticks per minute")->capture_default_str();
    app.add_option("--anticipation", a.anticipation, "Bookmaker coefficient on 1/mintogoal")->capture_default_str();
    app.add_option("--red-card-hazard", a.red_card_hazard, "Red-card hazard per team and minute")
        ->capture_default_str();
    app.add_option("--grid-m", a.grid_m, "Number of state intervals")->capture_default_str();
    app.add_option("--grid-bound", a.bound, "State grid bound")->capture_default_str();
    app.add_option("--max-iter", a.max_iter, "BFGS iteration limit")->capture_default_str();
    app.add_option("--threads", a.threads, "Worker threads")->capture_default_str();
}

struct RecoveryRow {
    int replication;
    std::string parameter;
    double truth;
    double estimate;
    std::optional<double> lower, upper;
    bool converged;
};

int cmd_recover(const RecoverArgs& a, const std::string& config, std::ostream& out) {
    Run run("recover", a.out);
    std::vector<RecoveryRow> rows;
    for (int r = 0; r < a.replications; ++r) {
        SimConfig cfg;
        cfg.n_matches = a.matches;
        cfg.seed = replication_seed(a.seed, r);
        cfg.ticks_per_minute = a.ticks;
        cfg.red_card_hazard = a.red_card_hazard;
        cfg.bookmaker.anticipation = a.anticipation;
        if (a.target == "bettors") {
            cfg.bettors.spec = bettors_spec(a.spec);
            cfg.bettors.state = default_state(a.spec);
        }
        const auto sim = simulate_season(cfg, a.threads);
        const SimConfig& truth = sim.truth.config;
        const auto prepared = prepare_panel(sim.matches);
        if (a.target == "bookmaker") {
            const DesignSpec spec = bookmaker_model(a.model);
            const auto fit = fit_regression(build_design(prepared.panel, spec));
            for (std::size_t j = 0; j < fit.columns.size(); ++j) {
                const auto i = static_cast<Eigen::Index>(j);
                const double t = i < truth.bookmaker.beta.size() ? truth.bookmaker.beta(i) : a.anticipation;
                rows.push_back({r, fit.columns[j], t, fit.beta(i), fit.ci_lower(i), fit.ci_upper(i), true});
            }
        } else {
            const DesignSpec spec = bettors_spec(a.spec);
            FitOptions opt;
            opt.grid = {a.grid_m, -a.bound, a.bound};
            opt.optim.max_iter = a.max_iter;
            opt.threads = a.threads;
            const auto fit = fit_ssm(exclude_closed_market(prepared.panel), spec, opt);
            std::map<std::string, double> t{{"phi", truth.bettors.state.phi},
                                            {"sigma_s", truth.bettors.state.sigma},
                                            {"gamma", truth.bettors.gamma},
                                            {"pi", truth.bettors.pi},
                                            {"lambda", truth.bettors.lambda}};
            const auto keys = spec.column_keys();
            for (std::size_t j = 0; j < keys.size(); ++j) t[keys[j]] = truth.bettors.beta(static_cast<Eigen::Index>(j));
            for (const auto& p : fit.params) {
                rows.push_back({r, p.name, t.at(p.name), p.estimate, p.lower, p.upper, fit.converged});
            }
        }
        out << "replication " << r + 1 << "/" << a.replications << " done\n";
    }
    run.write("recovery.csv", [&](std::ostream& o) {
        o << "replication,parameter,truth,estimate,lower,upper,covered,converged\n";
        for (const auto& x : rows) {
            const bool covered = x.lower && x.upper && *x.lower <= x.truth && x.truth <= *x.upper;
            o << x.replication << ',' << x.parameter << ',' << format_double(x.truth) << ','
              << format_double(x.estimate) << ',' << csv::format_optional(x.lower) << ','
              << csv::format_optional(x.upper) << ',' << (covered ? 1 : 0) << ',' << (x.converged ? 1 : 0) << '\n';
        }
    });
    run.write("coverage.csv", [&](std::ostream& o) {
        o << "parameter,truth,replications,with_interval,coverage,mean_estimate,bias,rmse\n";
        std::vector<std::string> order;
        for (const auto& x : rows) {
            if (std::find(order.begin(), order.end(), x.parameter) == order.end()) order.push_back(x.parameter);
        }
        for (const auto& name : order) {
            int n = 0, with_ci = 0, covered = 0;
            double truth = 0.0, sum = 0.0, sq = 0.0;
            for (const auto& x : rows) {
                if (x.parameter != name) continue;
                ++n;
                truth = x.truth;
                sum += x.estimate;
                sq += (x.estimate - x.truth) * (x.estimate - x.truth);
                if (x.lower && x.upper) {
                    ++with_ci;
                    if (*x.lower <= x.truth && x.truth <= *x.upper) ++covered;
                }
            }
            const double mean = sum / n;
            o << name << ',' << format_double(truth) << ',' << n << ',' << with_ci << ','
              << format_double(with_ci ? static_cast<double>(covered) / with_ci : 0.0) << ',' << format_double(mean)
              << ',' << format_double(mean - truth) << ',' << format_double(std::sqrt(sq / n)) << '\n';
        }
    });
    run.manifest("recover", config, a.seed);
    return kOk;
}

}  // namespace

std::string sha256_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot read '" + path + "'");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("SHA-256 initialisation failed");
    }
    char buf[1 << 16];
    while (f) {
        f.read(buf, sizeof buf);
        if (f.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(f.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static constexpr char hex[] = "0123456789abcdef";
    std::string outs;
    for (unsigned int i = 0; i < len; ++i) {
        outs += hex[md[i] >> 4];
        outs += hex[md[i] & 15];
    }
    return outs;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"In-play football betting: simulate, prepare, fit and report", "inplay"};
    app.set_config("--config", "", "TOML or INI configuration file; command-line flags take precedence");
    app.require_subcommand(1, 1);

    SimulateArgs sim;
    PrepareArgs prep;
    BookmakerArgs book;
    BettorsArgs bet;
    ReportArgs rep;
    RecoverArgs rec;
    auto* s_sim = app.add_subcommand("simulate", "Generate a synthetic season (ticks.csv, meta.csv, truth.json)");
    auto* s_prep = app.add_subcommand("prepare", "Aggregate ticks into the minute panel");
    auto* s_book = app.add_subcommand("fit-bookmaker", "OLS with match-clustered errors for Models 1-4");
    auto* s_bet = app.add_subcommand("fit-bettors", "BEINF state-space model for relative stakes");
    auto* s_rep = app.add_subcommand("report", "Summary tables, correlations, model comparison, match series");
    auto* s_rec = app.add_subcommand("recover", "Monte Carlo parameter recovery study");
    add_simulate(*s_sim, sim);
    add_prepare(*s_prep, prep);
    add_fit_bookmaker(*s_book, book);
    add_fit_bettors(*s_bet, bet);
    add_report(*s_rep, rep);
    add_recover(*s_rec, rec);

    try {
        // --config belongs to the top-level app but is accepted anywhere on the line
        std::vector<std::string> front, rest;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--config" && i + 1 < args.size()) {
                front.push_back(args[i]);
                front.push_back(args[++i]);
            } else if (args[i].rfind("--config=", 0) == 0) {
                front.push_back(args[i]);
            } else {
                rest.push_back(args[i]);
            }
        }
        front.insert(front.end(), rest.begin(), rest.end());
        std::vector<std::string> reversed(front.rbegin(), front.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kUsage;
    }

    try {
        if (s_sim->parsed()) return cmd_simulate(sim, s_sim->config_to_str(true), out);
        if (s_prep->parsed()) return cmd_prepare(prep, s_prep->config_to_str(true), out);
        if (s_book->parsed()) return cmd_fit_bookmaker(book, s_book->config_to_str(true), out);
        if (s_bet->parsed()) return cmd_fit_bettors(bet, s_bet->config_to_str(true), out, err);
        if (s_rep->parsed()) return cmd_report(rep, s_rep->config_to_str(true), out);
        if (s_rec->parsed()) return cmd_recover(rec, s_rec->config_to_str(true), out);
    } catch (const EstimationError& e) {
        err << "estimation failed: " << e.what() << '\n';
        return kEstimationError;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::domain_error& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::invalid_argument& e) {
        err << "invalid configuration: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsage;
}

}  // namespace inplay::cli
