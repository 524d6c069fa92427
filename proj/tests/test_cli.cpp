#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using inplay::cli::run;

namespace {

int call(std::vector<std::string> args, std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    if (err_text) *err_text = err.str();
    return code;
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(testing::read_file(p)); }

}  // namespace

TEST_CASE("usage errors") {
    CHECK(call({}) == 2);
    CHECK(call({"bogus"}) == 2);
    CHECK(call({"simulate"}) == 2);
    CHECK(call({"fit-bettors", "--panel", "no_such.csv", "--out", "x"}) == 2);
    CHECK(call({"--help"}) == 0);
    const auto dir = testing::scratch_dir("cli_usage");
    CHECK(call({"simulate", "--out", dir.string(), "--goal-hazard", "2"}) == 2);
}

TEST_CASE("malformed input is a data error") {
    const auto dir = testing::scratch_dir("cli_bad");
    {
        std::ofstream t(dir / "ticks.csv");
        t << "match_id,t_sec\nA,oops\n";
        std::ofstream m(dir / "meta.csv");
        m << "match_id\nA\n";
    }
    std::string err;
    CHECK(call({"prepare", "--ticks", (dir / "ticks.csv").string(), "--meta", (dir / "meta.csv").string(), "--out",
                (dir / "out").string()},
               &err) == 3);
    CHECK(err.find("data error") != std::string::npos);
}

TEST_CASE("pipeline from simulation to report") {
    const auto dir = testing::scratch_dir("cli_pipeline");
    const auto d = dir.string();
    REQUIRE(call({"simulate", "--out", d, "--matches", "60", "--seed", "4", "--ticks-per-minute", "2",
                  "--red-card-hazard", "0.004"}) == 0);
    CHECK(fs::exists(dir / "ticks.csv"));
    CHECK(fs::exists(dir / "meta.csv"));
    CHECK(fs::exists(dir / "truth.json"));
    const auto man = load(dir / "manifest_simulate.json");
    CHECK(man["command"] == "simulate");
    CHECK(man["seed"] == 4);
    CHECK(man["outputs"].size() == 3);

    REQUIRE(call({"prepare", "--ticks", d + "/ticks.csv", "--meta", d + "/meta.csv", "--out", d}) == 0);
    const auto filters = load(dir / "filters.json");
    CHECK(filters["input_matches"] == 60);
    const auto pman = load(dir / "manifest_prepare.json");
    CHECK(pman["inputs"].size() == 2);
    CHECK(pman["inputs"][0]["sha256"].get<std::string>() == inplay::cli::sha256_file(d + "/ticks.csv"));
    CHECK(pman["inputs"][0]["sha256"].get<std::string>().size() == 64);

    REQUIRE(call({"fit-bookmaker", "--panel", d + "/panel.csv", "--out", d, "--model", "4"}) == 0);
    const auto m4 = load(dir / "bookmaker_model4.json");
    CHECK(m4["coefficients"].back()["name"] == "mintogoal_inv");
    REQUIRE(call({"fit-bookmaker", "--panel", d + "/panel.csv", "--out", d, "--model", "3"}) == 0);

    REQUIRE(call({"fit-bettors", "--panel", d + "/panel.csv", "--out", d, "--spec", "noss"}) == 0);
    const auto noss = load(dir / "bettors_noss.json");
    CHECK(noss["model"] == "beinf_glm");
    CHECK(noss["with_state"] == false);

    REQUIRE(call({"report", "--panel", d + "/panel.csv", "--out", d, "--fit", d + "/bookmaker_model3.json", "--fit",
                  d + "/bookmaker_model4.json"}) == 0);
    CHECK(fs::exists(dir / "summary.md"));
    CHECK(fs::exists(dir / "correlations.csv"));
    CHECK(fs::exists(dir / "model_comparison.csv"));
    CHECK(fs::exists(dir / "tables.md"));
    bool series = false;
    for (const auto& e : fs::directory_iterator(dir)) {
        series |= e.path().filename().string().rfind("match_", 0) == 0;
    }
    CHECK(series);

    // bookmaker and bettors' fits use different observation sets
    CHECK(call({"report", "--panel", d + "/panel.csv", "--out", d, "--fit", d + "/bookmaker_model3.json", "--fit",
                d + "/bettors_noss.json"}) == 2);
    CHECK(call({"report", "--panel", d + "/panel.csv", "--out", d, "--match", "nope"}) == 2);
}

TEST_CASE("final specification swaps the quadratic terms for home and volumediff") {
    const auto dir = testing::scratch_dir("cli_final");
    const auto d = dir.string();
    REQUIRE(call({"simulate", "--out", d, "--matches", "40", "--ticks-per-minute", "1", "--red-card-hazard", "0.01"}) == 0);
    REQUIRE(call({"prepare", "--ticks", d + "/ticks.csv", "--meta", d + "/meta.csv", "--out", d}) == 0);
    const int code = call({"fit-bettors", "--panel", d + "/panel.csv", "--out", d, "--spec", "final", "--max-iter", "3",
                           "--grid-m", "15", "--trace", "--decode"});
    CHECK((code == 0 || code == 4));
    const auto fit = load(dir / "bettors_final.json");
    std::vector<std::string> names;
    for (const auto& p : fit["parameters"]) names.push_back(p["name"]);
    auto has = [&](const char* n) { return std::find(names.begin(), names.end(), n) != names.end(); };
    CHECK(has("home"));
    CHECK(has("volumediff"));
    CHECK(has("phi"));
    CHECK_FALSE(has("minute2"));
    CHECK_FALSE(has("improbpre_minute"));
    CHECK(fs::exists(dir / "bettors_final_trace.csv"));
    CHECK(fs::exists(dir / "bettors_final_states.csv"));
}

TEST_CASE("estimation failure writes a diagnostic record") {
    const auto dir = testing::scratch_dir("cli_fail");
    const auto d = dir.string();
    // no red cards anywhere: Model 3 is rank deficient
    REQUIRE(call({"simulate", "--out", d, "--matches", "20", "--ticks-per-minute", "1", "--red-card-hazard", "0"}) == 0);
    REQUIRE(call({"prepare", "--ticks", d + "/ticks.csv", "--meta", d + "/meta.csv", "--out", d}) == 0);
    std::string err;
    CHECK(call({"fit-bookmaker", "--panel", d + "/panel.csv", "--out", d, "--model", "3"}, &err) == 4);
    CHECK(fs::exists(dir / "bookmaker_model3_error.json"));
    CHECK(load(dir / "bookmaker_model3_error.json")["error"].get<std::string>().find("redcard") != std::string::npos);
}

TEST_CASE("recover is deterministic") {
    const auto a = testing::scratch_dir("cli_recover_a");
    const auto b = testing::scratch_dir("cli_recover_b");
    for (const auto& dir : {a, b}) {
        REQUIRE(call({"recover", "--target", "bookmaker", "--replications", "2", "--seed", "7", "--matches", "40",
                      "--red-card-hazard", "0.004", "--out", dir.string()}) == 0);
    }
    CHECK(testing::read_file(a / "recovery.csv") == testing::read_file(b / "recovery.csv"));
    CHECK(testing::read_file(a / "coverage.csv") == testing::read_file(b / "coverage.csv"));
    CHECK(testing::read_file(a / "recovery.csv").find("redcardopp") != std::string::npos);
}

TEST_CASE("fixtures through the command line") {
    const auto dir = testing::scratch_dir("cli_fixture");
    const auto d = dir.string();
    REQUIRE(call({"simulate", "--fixture", "dortmund_like", "--out", d}) == 0);
    REQUIRE(call({"prepare", "--ticks", d + "/ticks.csv", "--meta", d + "/meta.csv", "--out", d}) == 0);
    REQUIRE(call({"report", "--panel", d + "/panel.csv", "--out", d, "--match", "dortmund_like_1"}) == 0);
    const auto series = testing::read_file(dir / "match_dortmund_like_1_series.csv");
    CHECK(series.find("\n1,0.747,") != std::string::npos);
    CHECK(call({"simulate", "--fixture", "nope", "--out", d}) == 2);
}

TEST_CASE("config file values yield to flags") {
    const auto dir = testing::scratch_dir("cli_config");
    {
        std::ofstream c(dir / "sim.toml");
        c << "[simulate]\nmatches = 5\nseed = 9\nticks-per-minute = 1\n";
    }
    REQUIRE(call({"simulate", "--config", (dir / "sim.toml").string(), "--seed", "11", "--out", dir.string()}) == 0);
    const auto man = load(dir / "manifest_simulate.json");
    CHECK(man["seed"] == 11);
    CHECK(load(dir / "truth.json")["config"]["n_matches"] == 5);
}
