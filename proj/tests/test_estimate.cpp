#include <doctest.h>

#include <cmath>
#include <random>

#include "inplay/beinf.hpp"
#include "inplay/estimate.hpp"
#include "inplay/optimize.hpp"
#include "inplay/simulate.hpp"
#include "support.hpp"

using namespace inplay;

namespace {

// Intercept-only matches of fixed length drawn from the state model; phi = 0
// with sigma = 0 handled as the no-state generator.
std::vector<MatchSequence> simulate_intercept(std::uint64_t seed, int matches, int length, double beta0,
                                              StateParams state, bool with_state, double gamma, double pi,
                                              double lambda) {
    std::mt19937_64 rng(seed);
    std::vector<MatchSequence> out;
    for (int i = 0; i < matches; ++i) {
        const auto s = with_state ? simulate_state_path(state, length, rng) : std::vector<double>(length, 0.0);
        std::vector<std::optional<double>> y;
        for (int t = 0; t < length; ++t) {
            y.push_back(sample({mean_from_predictor(beta0 + s[t]), gamma, pi, lambda}, rng));
        }
        char id[16];
        std::snprintf(id, sizeof id, "M%04d", i);
        out.push_back(testing::make_sequence(id, Eigen::MatrixXd::Ones(length, 1), y));
    }
    return out;
}

const DesignSpec kIntercept = bettors_spec("intercept");

}  // namespace

TEST_CASE("finite-difference derivatives of a quadratic") {
    Eigen::Matrix3d A;
    A << 4, 1, 0, 1, 3, -1, 0, -1, 2;
    const Eigen::Vector3d b(1, -2, 0.5);
    const Objective f = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(A * x) - b.dot(x); };
    const Eigen::Vector3d x(0.3, -0.7, 1.1);
    CHECK((central_gradient(f, x, 1e-5) - (A * x - b)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((central_hessian(f, x, 1e-4) - A).cwiseAbs().maxCoeff() < 1e-6);
    const std::vector<Eigen::Index> order{2, 0, 1};
    CHECK((central_hessian(f, x, 1e-4, order) - A).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("BFGS minimises the Rosenbrock function") {
    const Objective f = [](const Eigen::VectorXd& x) {
        return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
    };
    const auto r = minimize_bfgs(f, Eigen::Vector2d(-1.2, 1.0), OptimOptions{});
    CHECK(r.converged);
    CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(!r.trace.empty());
}

TEST_CASE("BFGS treats non-finite values as infeasible") {
    const Objective f = [](const Eigen::VectorXd& x) {
        return x(0) <= 0.0 ? std::nan("") : x(0) - std::log(x(0));
    };
    const auto r = minimize_bfgs(f, Eigen::VectorXd::Constant(1, 3.0), OptimOptions{});
    CHECK(r.converged);
    CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("working-scale transforms") {
    SUBCASE("zero vector") {
        const auto p = from_working(Eigen::VectorXd::Zero(6), 1, true);
        CHECK(p.state.phi == 0.0);
        CHECK(p.state.sigma == 1.0);
        CHECK(p.gamma == 1.0);
        CHECK(p.pi == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(p.lambda == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("persistence") {
        SsmParams p;
        p.state = {0.984, 0.176};
        p.beta = Eigen::VectorXd::Zero(1);
        p.gamma = 16.065;
        p.pi = 0.00096;
        p.lambda = 0.00053;
        const auto w = to_working(p);
        const WorkingLayout layout{1, true};
        CHECK(w(layout.phi()) == doctest::Approx(2.410).epsilon(1e-3));
        CHECK(w(layout.phi()) == doctest::Approx(0.5 * std::log(1.984 / 0.016)).epsilon(1e-13));
        CHECK(w(layout.sigma()) == doctest::Approx(std::log(0.176)).epsilon(1e-14));
        CHECK(w(layout.gamma()) == doctest::Approx(std::log(16.065)).epsilon(1e-14));
    }
    SUBCASE("round trip") {
        std::mt19937_64 rng(61);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::normal_distribution<double> z;
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            SsmParams p;
            p.state = {-0.999 + 1.998 * u(rng), std::exp(3.0 * z(rng))};
            p.beta = Eigen::VectorXd(3);
            for (int j = 0; j < 3; ++j) p.beta(j) = 5.0 * z(rng);
            p.gamma = std::exp(4.0 * z(rng));
            const double a = 1e-6 + u(rng), b = 1e-6 + u(rng), c = 1e-6 + u(rng);
            p.pi = a / (a + b + c);
            p.lambda = b / (a + b + c);
            const auto q = from_working(to_working(p), 3, true);
            worst = std::max({worst, std::abs(q.state.phi - p.state.phi), std::abs(q.state.sigma - p.state.sigma),
                              (q.beta - p.beta).cwiseAbs().maxCoeff(), std::abs(q.gamma - p.gamma),
                              std::abs(q.pi - p.pi), std::abs(q.lambda - p.lambda)});
        }
        CHECK(worst < 1e-10);
    }
    SUBCASE("invalid natural parameters") {
        SsmParams p;
        p.beta = Eigen::VectorXd::Zero(1);
        p.pi = 0.6;
        p.lambda = 0.5;
        CHECK_THROWS_AS(to_working(p), std::invalid_argument);
        CHECK_THROWS_AS(from_working(Eigen::VectorXd::Zero(3), 1, true), std::invalid_argument);
    }
}

TEST_CASE("intercept-only BEINF regression") {
    const double mu = 0.62, pi = 0.03, lambda = 0.02;
    const auto seqs = simulate_intercept(71, 100, 40, logit(mu), {}, false, 16.0, pi, lambda);
    FitOptions opt;
    const auto fit = fit_beinf_glm(seqs, kIntercept, opt);
    REQUIRE(fit.converged);
    REQUIRE(fit.hessian_pd);
    const auto* b0 = fit.find("constant");
    REQUIRE(b0 != nullptr);
    REQUIRE(b0->se_working.has_value());
    CHECK(std::abs(b0->estimate - logit(mu)) < 3.0 * *b0->se_working);

    // the inflation masses are estimated by the empirical boundary fractions
    double zeros = 0, ones = 0, n = 0;
    for (const auto& s : seqs) {
        for (const auto& y : s.y) {
            zeros += *y == 0.0;
            ones += *y == 1.0;
            n += 1;
        }
    }
    const double pz = zeros / n, po = ones / n;
    CHECK(std::abs(fit.estimate.pi - pz) < 3.0 * std::sqrt(pz * (1 - pz) / n));
    CHECK(std::abs(fit.estimate.lambda - po) < 3.0 * std::sqrt(po * (1 - po) / n));
    CHECK(fit.n_obs == 4000);
    CHECK(fit.n_params == 4);
    CHECK(fit.aic == doctest::Approx(2.0 * 4 - 2.0 * fit.loglik));
    CHECK(fit.find("pi")->lower.value() < fit.estimate.pi);
    CHECK(fit.find("pi")->upper.value() > fit.estimate.pi);
}

TEST_CASE("a direction without information is flagged and gets no interval") {
    auto seqs = simulate_intercept(73, 30, 20, 0.3, {}, false, 10.0, 0.02, 0.02);
    for (auto& s : seqs) {
        Eigen::MatrixXd X(s.length(), 2);
        X.col(0).setOnes();
        X.col(1).setZero();
        s.X = X;
    }
    DesignSpec spec{"dead", {Covariate::redcardteam}};
    const auto fit = fit_beinf_glm(seqs, spec, FitOptions{});
    CHECK_FALSE(fit.hessian_pd);
    for (const auto& p : fit.params) {
        CHECK_FALSE(p.lower.has_value());
        CHECK_FALSE(p.upper.has_value());
    }

    const WorkingLayout layout{1, false};
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(4, 4) * 0.01;
    cov(1, 1) = 0.0;
    const std::vector<std::string> names{"constant"};
    const auto cis = wald_cis(Eigen::VectorXd::Constant(4, -1.0), cov, layout, names, names);
    CHECK(cis[0].lower.has_value());
    const auto gamma_ci = std::find_if(cis.begin(), cis.end(), [](const auto& p) { return p.name == "gamma"; });
    REQUIRE(gamma_ci != cis.end());
    CHECK_FALSE(gamma_ci->lower.has_value());
}

TEST_CASE("Wald intervals map through the inverse transforms") {
    const WorkingLayout layout{1, true};
    Eigen::VectorXd w(6);
    w << std::atanh(0.9), std::log(0.2), 0.5, std::log(10.0), std::log(0.01 / 0.98), std::log(0.01 / 0.98);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(6, 6) * 0.04;
    const std::vector<std::string> names{"constant"};
    const auto cis = wald_cis(w, cov, layout, names, names);
    auto get = [&](const char* n) { return *std::find_if(cis.begin(), cis.end(), [&](const auto& p) { return p.name == n; }); };
    CHECK(get("phi").lower.value() == doctest::Approx(std::tanh(std::atanh(0.9) - 1.96 * 0.2)));
    CHECK(get("phi").upper.value() == doctest::Approx(std::tanh(std::atanh(0.9) + 1.96 * 0.2)));
    CHECK(get("sigma_s").lower.value() == doctest::Approx(0.2 * std::exp(-1.96 * 0.2)));
    CHECK(get("gamma").upper.value() == doctest::Approx(10.0 * std::exp(1.96 * 0.2)));
    CHECK(get("constant").lower.value() == doctest::Approx(0.5 - 1.96 * 0.2));
    // pi: logit-scale delta method with gradient (1, -lambda/(1-pi))
    const double pi = 0.01, lam = 0.01;
    const double var = 0.04 * (1.0 + std::pow(lam / (1.0 - pi), 2));
    const double lp = std::log(pi / (1 - pi));
    CHECK(get("pi").lower.value() == doctest::Approx(testing::logistic(lp - 1.96 * std::sqrt(var))).epsilon(1e-10));
    CHECK(get("pi").upper.value() == doctest::Approx(testing::logistic(lp + 1.96 * std::sqrt(var))).epsilon(1e-10));
}

TEST_CASE("state model on data without a state") {
    const auto seqs = simulate_intercept(79, 60, 35, 0.33, {}, false, 16.065, 0.01, 0.01);
    FitOptions opt;
    const auto glm = fit_beinf_glm(seqs, kIntercept, opt);
    const auto ssm = fit_ssm(seqs, kIntercept, opt);
    CHECK(ssm.estimate.state.sigma < 0.1);
    // two extra parameters and no gain in fit cost at most 4
    CHECK(ssm.aic - glm.aic <= 4.0 + 1e-6);
    CHECK(ssm.loglik >= glm.loglik - 1e-4);
}

TEST_CASE("interval width shrinks with the square root of the sample size") {
    const StateParams truth{0.9, 0.3};
    FitOptions opt;
    opt.grid = {45, -3.0, 3.0};
    const auto small = fit_ssm(simulate_intercept(83, 50, 40, 0.33, truth, true, 16.065, 0.001, 0.001), kIntercept, opt);
    const auto large = fit_ssm(simulate_intercept(89, 200, 40, 0.33, truth, true, 16.065, 0.001, 0.001), kIntercept, opt);
    REQUIRE(small.hessian_pd);
    REQUIRE(large.hessian_pd);
    auto width = [](const FitResult& f, const char* n) {
        const auto* p = f.find(n);
        return *p->upper - *p->lower;
    };
    for (const char* n : {"constant", "sigma_s"}) {
        const double ratio = width(small, n) / width(large, n);
        CHECK_MESSAGE(std::abs(ratio / 2.0 - 1.0) < 0.2, n << " width ratio " << ratio);
    }
}

TEST_CASE("fit on a simulated panel reports every parameter") {
    SimConfig cfg;
    cfg.n_matches = 60;
    cfg.ticks_per_minute = 1;
    const auto sim = simulate_season(cfg);
    const auto panel = exclude_closed_market(prepare_panel(sim.matches).panel);
    FitOptions opt;
    opt.optim.max_iter = 5;
    opt.compute_hessian = false;
    const auto fit = fit_ssm(panel, bettors_spec("final"), opt);
    CHECK(fit.model == "ssm");
    CHECK(fit.spec == "final");
    CHECK(fit.params.size() == 9 + 5);
    CHECK(fit.find("phi") != nullptr);
    CHECK(fit.find("volumediff") != nullptr);
    CHECK(fit.find("minute2") == nullptr);
    long observed = 0;
    for (const auto& m : panel.matches) {
        for (const auto& r : m.rows) observed += r.stakerel ? 1 : 0;
    }
    CHECK(fit.n_obs == observed);
}

TEST_CASE("optimum dominates the truth, is stationary, and evaluates deterministically") {
    const StateParams state{0.9, 0.3};
    const auto seqs = simulate_intercept(97, 60, 40, 0.33, state, true, 16.065, 0.002, 0.002);
    FitOptions opt;
    opt.grid = {45, -3.0, 3.0};
    opt.compute_hessian = false;
    const auto fit = fit_ssm(seqs, kIntercept, opt);
    REQUIRE(fit.converged);

    SsmParams truth;
    truth.state = state;
    truth.beta = Eigen::VectorXd::Constant(1, 0.33);
    truth.gamma = 16.065;
    truth.pi = truth.lambda = 0.002;
    CHECK(fit.loglik >= total_loglik(seqs, truth, opt.grid) - 1e-6);

    // the intercept column has unit RMS, so the working scale is the optimizer's
    const Objective f = [&](const Eigen::VectorXd& th) { return -total_loglik(seqs, from_working(th, 1), opt.grid); };
    const Eigen::VectorXd g = central_gradient(f, fit.working, opt.optim.fd_step);
    CHECK(g.lpNorm<Eigen::Infinity>() < opt.optim.grad_tol);

    const double a = total_loglik(seqs, fit.estimate, opt.grid);
    const double b = total_loglik(seqs, fit.estimate, opt.grid);
    const double c = total_loglik(seqs, fit.estimate, opt.grid, 3);
    CHECK(a == b);
    CHECK(a == c);
}

// Slow: 300 fits of an intercept-only state model.
TEST_CASE("Wald interval for phi covers the truth at the nominal rate") {
    const StateParams state{0.9, 0.3};
    FitOptions opt;
    opt.grid = {45, -3.0, 3.0};
    int covered = 0, with_ci = 0;
    const int reps = 300;
    for (int r = 0; r < reps; ++r) {
        // inflation masses large enough that every sample has zeros and ones;
        // otherwise pi or lambda runs to the boundary and no interval exists
        const auto seqs = simulate_intercept(20000 + r, 60, 40, 0.33, state, true, 16.065, 0.01, 0.01);
        const auto fit = fit_ssm(seqs, kIntercept, opt);
        const auto* phi = fit.find("phi");
        if (phi->lower && phi->upper) {
            ++with_ci;
            covered += *phi->lower <= state.phi && state.phi <= *phi->upper;
        }
    }
    const double rate = static_cast<double>(covered) / reps;
    MESSAGE("phi coverage " << rate << " (" << with_ci << " fits with an interval)");
    CHECK(rate >= 0.93);
    CHECK(rate <= 0.97);
}
