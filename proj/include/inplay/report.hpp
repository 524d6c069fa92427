#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inplay/estimate.hpp"
#include "inplay/linreg.hpp"
#include "inplay/panel.hpp"

namespace inplay {

struct ColumnSummary {
    std::string variable;
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample (n - 1) standard deviation; 0 when n == 1
    double min = 0.0;
    double max = 0.0;
    double median = 0.0;
};

struct SummaryTable {
    std::vector<ColumnSummary> rows;
};

/// t, mintogoal, improb, improbpre, redcardteam, redcardopp, xgdiff, home,
/// volumediff, stakerel.
std::vector<std::string> summary_variables();

/// Non-missing values of one variable over all panel rows.
std::vector<double> panel_column(const Panel& panel, std::string_view variable);

/// Throws std::invalid_argument on empty input.
ColumnSummary summarize_values(std::string variable, std::span<const double> values);

/// Throws std::invalid_argument when the panel has no observations.
SummaryTable summarize(const Panel& panel);

struct CorrelationMatrix {
    std::vector<std::string> variables;
    std::vector<std::vector<std::optional<double>>> r;  // nullopt where undefined
};

/// Pearson correlation; nullopt when fewer than two pairs or a zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Pairwise-complete correlations over panel rows.
CorrelationMatrix correlations(const Panel& panel, const std::vector<std::string>& variables = summary_variables());

struct ModelSummary {
    std::string id;
    double loglik = 0.0;
    double aic = 0.0;
    long n = 0;
    long n_params = 0;
};

ModelSummary model_summary(const RegressionFit& fit);
ModelSummary model_summary(const FitResult& fit);

struct ComparisonRow {
    ModelSummary model;
    double delta_aic = 0.0;
};

/// Sorted by AIC (ties by id); delta against the smallest AIC. Throws
/// std::invalid_argument on empty input or differing observation counts.
std::vector<ComparisonRow> compare_models(std::vector<ModelSummary> models);

/// Columns t, improb_team, improb_opp, stakerel, halftime; one row per panel
/// minute, missing values left empty. Throws std::invalid_argument for an
/// unknown match.
void export_match_series(std::ostream& out, const Panel& panel, std::string_view match_id);

void write_summary_markdown(std::ostream& out, const SummaryTable& table);
void write_correlations_csv(std::ostream& out, const CorrelationMatrix& m);
void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows);

/// Coefficient tables with 95% intervals, one column per fit.
void write_regression_table(std::ostream& out, std::span<const RegressionFit> fits);
void write_ssm_table(std::ostream& out, std::span<const FitResult> fits);

}  // namespace inplay
