#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "inplay/linreg.hpp"
#include "inplay/simulate.hpp"

using namespace inplay;

namespace {

// Heteroskedasticity-robust sandwich with the HC1 factor n/(n-k), written
// observation by observation.
Eigen::MatrixXd hc1(const Eigen::MatrixXd& X, const Eigen::VectorXd& u) {
    const auto n = X.rows(), k = X.cols();
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < n; ++i) meat += u(i) * u(i) * X.row(i).transpose() * X.row(i);
    const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
    return static_cast<double>(n) / static_cast<double>(n - k) * bread * meat * bread;
}

Eigen::MatrixXd random_design(std::mt19937_64& rng, Eigen::Index n, Eigen::Index k) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd X(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        for (Eigen::Index j = 1; j < k; ++j) X(i, j) = z(rng);
    }
    return X;
}

}  // namespace

TEST_CASE("perfect fit") {
    Eigen::VectorXd y(2);
    y << 1, 2;
    Eigen::MatrixXd X(2, 2);
    X << 1, 0, 1, 1;
    const auto f = ols_fit(y, X);
    CHECK(f.beta(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.beta(1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.residuals.norm() < 1e-14);
}

TEST_CASE("noise symmetric around the line leaves the coefficients unchanged") {
    Eigen::VectorXd y(8);
    Eigen::MatrixXd X(8, 2);
    const double xs[4] = {0.0, 1.0, 2.0, 3.0};
    for (int i = 0; i < 4; ++i) {
        X.row(2 * i) << 1.0, xs[i];
        X.row(2 * i + 1) << 1.0, xs[i];
        y(2 * i) = 0.5 + 2.0 * xs[i] + 0.3;
        y(2 * i + 1) = 0.5 + 2.0 * xs[i] - 0.3;
    }
    const auto f = ols_fit(y, X);
    CHECK(f.beta(0) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(f.beta(1) == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("OLS agrees with the normal equations on random instances") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::MatrixXd X = random_design(rng, 50, 3);
        Eigen::VectorXd y(50);
        for (int i = 0; i < 50; ++i) y(i) = 1.0 - 0.5 * X(i, 1) + 2.0 * X(i, 2) + z(rng);
        const Eigen::VectorXd oracle = (X.transpose() * X).llt().solve(X.transpose() * y);
        const auto f = ols_fit(y, X);
        CHECK((f.beta - oracle).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("rank-deficient designs name the collinear columns") {
    Eigen::MatrixXd X(4, 3);
    X << 1, 0, 0, 1, 1, 0, 1, 0, 0, 1, 1, 0;
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 4;
    const std::vector<std::string> names{"constant", "a", "zero"};
    CHECK_THROWS_WITH_AS(ols_fit(y, X, names), doctest::Contains("zero"), std::invalid_argument);
}

TEST_CASE("two-cluster hand example") {
    Eigen::MatrixXd X(4, 2);
    X << 1, 0, 1, 1, 1, 0, 1, 1;
    Eigen::VectorXd y(4);
    y << 0, 1, 1, 2;
    const std::vector<int> cl{0, 0, 1, 1};
    const auto f = ols_fit(y, X);
    CHECK(f.beta(0) == doctest::Approx(0.5));
    CHECK(f.beta(1) == doctest::Approx(1.0));
    const Eigen::MatrixXd v0 = cluster_covariance(X, f.residuals, cl, false);
    CHECK(v0(0, 0) == doctest::Approx(0.125).epsilon(1e-14));
    CHECK(std::abs(v0(0, 1)) < 1e-15);
    CHECK(std::abs(v0(1, 0)) < 1e-15);
    CHECK(std::abs(v0(1, 1)) < 1e-15);
    const Eigen::MatrixXd v1 = cluster_covariance(X, f.residuals, cl, true);
    CHECK(v1(0, 0) == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(std::sqrt(v1(0, 0)) == doctest::Approx(0.6124).epsilon(1e-4));
    CHECK(std::sqrt(std::max(v1(1, 1), 0.0)) < 1e-7);
}

TEST_CASE("singleton clusters reproduce the HC1 sandwich") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> z;
    std::uniform_int_distribution<int> size(5, 60), cols(1, 5);
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::Index k = cols(rng);
        const Eigen::Index n = std::max<Eigen::Index>(size(rng), k + 2);
        const Eigen::MatrixXd X = random_design(rng, n, k);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) y(i) = X.row(i).sum() + (1.0 + std::abs(X(i, 0))) * z(rng);
        const auto f = ols_fit(y, X);
        std::vector<int> cl(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) cl[static_cast<std::size_t>(i)] = static_cast<int>(i);
        const Eigen::MatrixXd a = cluster_covariance(X, f.residuals, cl, true);
        const Eigen::MatrixXd b = hc1(X, f.residuals);
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-10 * b.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("zero residuals give zero covariance; one cluster is rejected") {
    Eigen::MatrixXd X(4, 2);
    X << 1, 0, 1, 1, 1, 2, 1, 3;
    const Eigen::VectorXd u = Eigen::VectorXd::Zero(4);
    CHECK(cluster_covariance(X, u, std::vector<int>{0, 0, 1, 1}).isZero(0.0));
    CHECK_THROWS_AS(cluster_covariance(X, u, std::vector<int>{0, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("Gaussian AIC closed form") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> z;
    const Eigen::MatrixXd X = random_design(rng, 100, 3);
    Eigen::VectorXd y(100);
    for (int i = 0; i < 100; ++i) y(i) = X.row(i).sum() + z(rng);
    const auto f = ols_fit(y, X);
    const double rss = f.residuals.squaredNorm();
    const double n = 100.0;
    const double oracle = n * (std::log(2.0 * std::numbers::pi * rss / n) + 1.0) + 2.0 * (3 + 1);
    CHECK(gaussian_aic(rss, 100, 3) == doctest::Approx(oracle).epsilon(1e-13));
    CHECK(gaussian_loglik(rss, 100) == doctest::Approx(-0.5 * (oracle - 8.0)).epsilon(1e-13));
    CHECK_THROWS_AS(gaussian_aic(0.0, 100, 3), std::domain_error);
    CHECK_THROWS_AS(gaussian_aic(1.0, 4, 3), std::invalid_argument);
}

TEST_CASE("a pure-noise regressor raises AIC on average") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> z;
    int worse = 0;
    double mean_diff = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const Eigen::MatrixXd X = random_design(rng, 120, 3);
        Eigen::VectorXd y(120);
        for (int i = 0; i < 120; ++i) y(i) = 0.2 + X(i, 1) - X(i, 2) + z(rng);
        Eigen::MatrixXd Xbig(120, 4);
        Xbig << X, random_design(rng, 120, 2).col(1);
        const double a0 = gaussian_aic(ols_fit(y, X).residuals.squaredNorm(), 120, 3);
        const double a1 = gaussian_aic(ols_fit(y, Xbig).residuals.squaredNorm(), 120, 4);
        worse += a1 > a0 ? 1 : 0;
        mean_diff += (a1 - a0) / 200.0;
    }
    CHECK(mean_diff > 0.0);
    CHECK(worse >= 100);
}

TEST_CASE("shifting an orthogonalised regressor only moves the intercept") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> z;
    const Eigen::MatrixXd X = random_design(rng, 40, 3);
    Eigen::VectorXd y(40);
    for (int i = 0; i < 40; ++i) y(i) = 1.0 + X(i, 1) + 0.5 * X(i, 2) + z(rng);
    Eigen::MatrixXd shifted = X;
    shifted.col(2).array() += 7.5;
    const auto a = ols_fit(y, X);
    const auto b = ols_fit(y, shifted);
    CHECK(b.beta(1) == doctest::Approx(a.beta(1)).epsilon(1e-12));
    CHECK(b.beta(2) == doctest::Approx(a.beta(2)).epsilon(1e-12));
    CHECK(b.beta(0) == doctest::Approx(a.beta(0) - 7.5 * a.beta(2)).epsilon(1e-12));
}

TEST_CASE("fit_regression on a simulated panel") {
    SimConfig cfg;
    cfg.n_matches = 120;
    cfg.red_card_hazard = 0.004;
    cfg.ticks_per_minute = 1;
    const auto sim = simulate_season(cfg);
    const auto panel = prepare_panel(sim.matches).panel;
    const auto d = build_design(panel, bookmaker_model(3));
    Eigen::Index with_odds = 0;
    for (const auto& m : panel.matches) {
        for (const auto& r : m.rows) with_odds += r.improb ? 1 : 0;
    }
    CHECK(d.X.rows() == with_odds);
    CHECK(d.cluster_labels.size() == panel.matches.size());
    const auto f = fit_regression(d);
    CHECK(f.model == "model3");
    CHECK(f.columns.front() == "constant");
    CHECK(f.n == d.X.rows());
    CHECK(f.k == 8);
    for (Eigen::Index j = 0; j < f.k; ++j) {
        CHECK(f.se(j) == doctest::Approx(std::sqrt(f.covariance(j, j))));
        CHECK(f.ci_lower(j) == doctest::Approx(f.beta(j) - 1.96 * f.se(j)));
        CHECK(f.ci_upper(j) == doctest::Approx(f.beta(j) + 1.96 * f.se(j)));
    }
    CHECK(f.aic == doctest::Approx(gaussian_aic(f.rss, f.n, f.k)));
    CHECK(f.beta(1) == doctest::Approx(1.003).epsilon(0.05));
}
