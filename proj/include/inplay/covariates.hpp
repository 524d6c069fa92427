#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "inplay/panel.hpp"

namespace inplay {

// Regressors built from a MinuteObservation. The intercept is implicit and
// always occupies column 0 of a design matrix.
enum class Covariate {
    improbpre,
    minute,
    minute_sq,
    improbpre_x_minute,
    redcardteam,
    redcardopp,
    xgdiff_per_minute,
    home,
    volumediff,
    inv_mintogoal,  // 0 when no goal follows (scoreless matches)
};

std::string_view key(Covariate c);    // machine name, e.g. "xgdiff_per_minute"
std::string_view label(Covariate c);  // table label, e.g. "xgdiff per minute"
Covariate parse_covariate(std::string_view key);
double covariate_value(Covariate c, const MinuteObservation& obs);

// Column recipe mapping a MinuteObservation to a regressor row.
struct DesignSpec {
    std::string name;
    std::vector<Covariate> covariates;

    Eigen::Index columns() const { return static_cast<Eigen::Index>(covariates.size()) + 1; }
    std::vector<std::string> column_keys() const;    // "constant" first
    std::vector<std::string> column_labels() const;  // "Constant" first
    void fill_row(const MinuteObservation& obs, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) const;
};

/// Bookmaker Models 1-4. With include_xg = false the xgdiff-per-minute
/// regressor is dropped (robustness variant of Models 3 and 4).
DesignSpec bookmaker_model(int model_id, bool include_xg = true);

/// Bettors' specifications: "noss" and "basic" share the Model 4 regressors,
/// "final" drops minute^2 and the interaction and adds home and volumediff,
/// "full" uses every covariate.
DesignSpec bettors_spec(std::string_view name);

}  // namespace inplay
