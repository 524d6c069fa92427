#include "inplay/covariates.hpp"

#include <stdexcept>

namespace inplay {
namespace {

constexpr Covariate kAll[] = {
    Covariate::improbpre,   Covariate::minute,     Covariate::minute_sq,
    Covariate::improbpre_x_minute, Covariate::redcardteam, Covariate::redcardopp,
    Covariate::xgdiff_per_minute,  Covariate::home,        Covariate::volumediff,
    Covariate::inv_mintogoal,
};

}  // namespace

std::string_view key(Covariate c) {
    switch (c) {
        case Covariate::improbpre: return "improbpre";
        case Covariate::minute: return "minute";
        case Covariate::minute_sq: return "minute2";
        case Covariate::improbpre_x_minute: return "improbpre_minute";
        case Covariate::redcardteam: return "redcardteam";
        case Covariate::redcardopp: return "redcardopp";
        case Covariate::xgdiff_per_minute: return "xgdiff_per_minute";
        case Covariate::home: return "home";
        case Covariate::volumediff: return "volumediff";
        case Covariate::inv_mintogoal: return "mintogoal_inv";
    }
    return "?";
}

std::string_view label(Covariate c) {
    switch (c) {
        case Covariate::improbpre: return "Implied probability pre-match";
        case Covariate::minute: return "Minute";
        case Covariate::minute_sq: return "Minute^2";
        case Covariate::improbpre_x_minute: return "Implied probability pre-match x Minute";
        case Covariate::redcardteam: return "Red card team";
        case Covariate::redcardopp: return "Red card opponent";
        case Covariate::xgdiff_per_minute: return "xgdiff per minute";
        case Covariate::home: return "home";
        case Covariate::volumediff: return "volumediff";
        case Covariate::inv_mintogoal: return "mintogoal^-1";
    }
    return "?";
}

Covariate parse_covariate(std::string_view k) {
    for (Covariate c : kAll) {
        if (key(c) == k) return c;
    }
    throw std::invalid_argument("unknown covariate '" + std::string(k) + "'");
}

double covariate_value(Covariate c, const MinuteObservation& o) {
    const double t = o.t;
    switch (c) {
        case Covariate::improbpre: return o.improbpre;
        case Covariate::minute: return t;
        case Covariate::minute_sq: return t * t;
        case Covariate::improbpre_x_minute: return o.improbpre * t;
        case Covariate::redcardteam: return o.redcardteam;
        case Covariate::redcardopp: return o.redcardopp;
        case Covariate::xgdiff_per_minute: return o.xgdiff / t;
        case Covariate::home: return o.home;
        case Covariate::volumediff: return o.volumediff;
        case Covariate::inv_mintogoal: return o.mintogoal > 0 ? 1.0 / o.mintogoal : 0.0;
    }
    return 0.0;
}

std::vector<std::string> DesignSpec::column_keys() const {
    std::vector<std::string> out{"constant"};
    for (Covariate c : covariates) out.emplace_back(key(c));
    return out;
}

std::vector<std::string> DesignSpec::column_labels() const {
    std::vector<std::string> out{"Constant"};
    for (Covariate c : covariates) out.emplace_back(label(c));
    return out;
}

void DesignSpec::fill_row(const MinuteObservation& obs, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) const {
    row(0) = 1.0;
    for (std::size_t j = 0; j < covariates.size(); ++j) {
        row(static_cast<Eigen::Index>(j) + 1) = covariate_value(covariates[j], obs);
    }
}

DesignSpec bookmaker_model(int model_id, bool include_xg) {
    using C = Covariate;
    DesignSpec spec;
    spec.name = "model" + std::to_string(model_id);
    switch (model_id) {
        case 1: spec.covariates = {C::improbpre}; break;
        case 2: spec.covariates = {C::improbpre, C::minute, C::minute_sq, C::improbpre_x_minute}; break;
        case 3:
            spec.covariates = {C::improbpre,   C::minute,     C::minute_sq,         C::improbpre_x_minute,
                               C::redcardteam, C::redcardopp, C::xgdiff_per_minute};
            break;
        case 4:
            spec.covariates = {C::improbpre,  C::minute,      C::minute_sq,
                               C::improbpre_x_minute, C::redcardteam, C::redcardopp,
                               C::xgdiff_per_minute,  C::inv_mintogoal};
            break;
        default: throw std::invalid_argument("bookmaker model id must be 1..4, got " + std::to_string(model_id));
    }
    if (!include_xg) {
        std::erase(spec.covariates, C::xgdiff_per_minute);
        spec.name += "_noxg";
    }
    return spec;
}

DesignSpec bettors_spec(std::string_view name) {
    using C = Covariate;
    DesignSpec spec;
    spec.name = std::string(name);
    if (name == "noss" || name == "basic") {
        spec.covariates = bookmaker_model(4).covariates;
    } else if (name == "final") {
        spec.covariates = {C::improbpre,  C::minute, C::redcardteam,       C::redcardopp,
                           C::home,       C::volumediff, C::xgdiff_per_minute, C::inv_mintogoal};
    } else if (name == "full") {
        spec.covariates = {C::improbpre,  C::minute,     C::minute_sq,  C::improbpre_x_minute,
                           C::redcardteam, C::redcardopp, C::xgdiff_per_minute, C::home,
                           C::volumediff,  C::inv_mintogoal};
    } else if (name == "intercept") {
        spec.covariates = {};
    } else {
        throw std::invalid_argument("unknown bettors spec '" + std::string(name) +
                                    "' (expected noss, basic, final, full or intercept)");
    }
    return spec;
}

}  // namespace inplay
