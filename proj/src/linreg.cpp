#include "inplay/linreg.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace inplay {

Design build_design(const Panel& panel, const DesignSpec& spec) {
    std::size_t n = 0;
    for (const auto& m : panel.matches) {
        for (const auto& row : m.rows) n += row.improb.has_value();
    }
    Design d;
    d.spec = spec;
    d.y.resize(static_cast<Eigen::Index>(n));
    d.X.resize(static_cast<Eigen::Index>(n), spec.columns());
    d.cluster.reserve(n);
    Eigen::Index i = 0;
    for (const auto& m : panel.matches) {
        const int g = static_cast<int>(d.cluster_labels.size());
        bool used = false;
        for (const auto& row : m.rows) {
            if (!row.improb) continue;
            d.y(i) = *row.improb;
            spec.fill_row(row, d.X.row(i));
            d.cluster.push_back(g);
            used = true;
            ++i;
        }
        if (used) d.cluster_labels.push_back(m.match_id);
    }
    return d;
}

OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, std::span<const std::string> names) {
    if (y.size() != X.rows()) throw std::invalid_argument("ols_fit: y and X row counts differ");
    if (X.rows() < X.cols()) throw std::invalid_argument("ols_fit: fewer rows than columns");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols()) {
        std::string cols;
        const auto perm = qr.colsPermutation().indices();
        for (Eigen::Index j = qr.rank(); j < X.cols(); ++j) {
            const auto c = perm(j);
            if (!cols.empty()) cols += ", ";
            cols += c < static_cast<Eigen::Index>(names.size()) ? names[static_cast<std::size_t>(c)]
                                                                : "column " + std::to_string(c);
        }
        throw std::invalid_argument("design matrix is rank deficient; collinear: " + cols);
    }
    OlsFit fit;
    fit.beta = qr.solve(y);
    fit.fitted = X * fit.beta;
    fit.residuals = y - fit.fitted;
    return fit;
}

Eigen::MatrixXd cluster_covariance(const Eigen::MatrixXd& X, const Eigen::VectorXd& u,
                                   std::span<const int> cluster, bool cr1) {
    const Eigen::Index n = X.rows();
    const Eigen::Index k = X.cols();
    if (static_cast<Eigen::Index>(cluster.size()) != n || u.size() != n) {
        throw std::invalid_argument("cluster_covariance: every row needs a residual and a cluster");
    }
    std::map<int, Eigen::VectorXd> scores;
    for (Eigen::Index i = 0; i < n; ++i) {
        auto [it, inserted] = scores.try_emplace(cluster[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(k));
        it->second += X.row(i).transpose() * u(i);
    }
    const auto G = static_cast<Eigen::Index>(scores.size());
    if (G < 2) throw std::invalid_argument("cluster_covariance: need at least two clusters");

    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (const auto& [g, s] : scores) meat.noalias() += s * s.transpose();
    const Eigen::MatrixXd bread = (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd V = bread * meat * bread;
    if (cr1) {
        const double gd = static_cast<double>(G);
        const double nd = static_cast<double>(n);
        V *= gd / (gd - 1.0) * (nd - 1.0) / (nd - static_cast<double>(k));
    }
    return 0.5 * (V + V.transpose());
}

double gaussian_loglik(double rss, Eigen::Index n) {
    const double nd = static_cast<double>(n);
    return -0.5 * nd * (std::log(2.0 * std::numbers::pi * rss / nd) + 1.0);
}

double gaussian_aic(double rss, Eigen::Index n, Eigen::Index n_coef) {
    const Eigen::Index k = n_coef + 1;
    if (n <= k) throw std::invalid_argument("gaussian_aic: need more observations than parameters");
    if (!(rss > 0.0)) throw std::domain_error("gaussian_aic: zero residual sum of squares, degenerate likelihood");
    return 2.0 * static_cast<double>(k) - 2.0 * gaussian_loglik(rss, n);
}

RegressionFit fit_regression(const Design& d) {
    RegressionFit r;
    r.model = d.spec.name;
    r.columns = d.spec.column_keys();
    r.labels = d.spec.column_labels();
    const auto ols = ols_fit(d.y, d.X, r.columns);
    r.beta = ols.beta;
    r.n = d.X.rows();
    r.k = d.X.cols();
    r.clusters = static_cast<Eigen::Index>(d.cluster_labels.size());
    r.covariance = cluster_covariance(d.X, ols.residuals, d.cluster, true);
    r.se = r.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    r.ci_lower = r.beta - kZ95 * r.se;
    r.ci_upper = r.beta + kZ95 * r.se;
    r.rss = ols.residuals.squaredNorm();
    r.residual_variance = r.rss / static_cast<double>(r.n - r.k);
    r.loglik = gaussian_loglik(r.rss, r.n);
    r.aic = gaussian_aic(r.rss, r.n, r.k);
    return r;
}

}  // namespace inplay
