#include "inplay/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "inplay/csv.hpp"

namespace inplay {
namespace {

std::optional<double> row_value(const MinuteObservation& o, std::string_view v) {
    if (v == "t") return o.t;
    if (v == "mintogoal") return o.mintogoal;
    if (v == "improb") return o.improb;
    if (v == "improb_opp") return o.improb_opp;
    if (v == "improbpre") return o.improbpre;
    if (v == "redcardteam") return o.redcardteam;
    if (v == "redcardopp") return o.redcardopp;
    if (v == "xgdiff") return o.xgdiff;
    if (v == "home") return o.home;
    if (v == "volumediff") return o.volumediff;
    if (v == "stakerel") return o.stakerel;
    throw std::invalid_argument("unknown panel variable '" + std::string(v) + "'");
}

// Fixed decimals for ordinary magnitudes, significant digits for tiny ones.
std::string table_number(double x) {
    char buf[64];
    if (x != 0.0 && std::abs(x) < 0.01) {
        std::snprintf(buf, sizeof buf, "%.2g", x);
    } else {
        std::snprintf(buf, sizeof buf, "%.3f", x);
    }
    return buf;
}

std::string interval(const std::optional<double>& lo, const std::optional<double>& hi) {
    if (!lo || !hi) return "";
    return "[" + table_number(*lo) + ", " + table_number(*hi) + "]";
}

}  // namespace

std::vector<std::string> summary_variables() {
    return {"t", "mintogoal", "improb", "improbpre", "redcardteam", "redcardopp",
            "xgdiff", "home", "volumediff", "stakerel"};
}

std::vector<double> panel_column(const Panel& panel, std::string_view variable) {
    std::vector<double> out;
    out.reserve(panel.observation_count());
    for (const auto& m : panel.matches) {
        for (const auto& row : m.rows) {
            if (const auto v = row_value(row, variable)) out.push_back(*v);
        }
    }
    return out;
}

ColumnSummary summarize_values(std::string variable, std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("cannot summarize an empty column: " + variable);
    ColumnSummary s;
    s.variable = std::move(variable);
    s.n = values.size();
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    const std::size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return s;
}

SummaryTable summarize(const Panel& panel) {
    if (panel.observation_count() == 0) throw std::invalid_argument("cannot summarize an empty panel");
    SummaryTable table;
    for (const auto& v : summary_variables()) {
        const auto values = panel_column(panel, v);
        if (values.empty()) continue;
        table.rows.push_back(summarize_values(v, values));
    }
    return table;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    if (x.size() < 2) return std::nullopt;
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix correlations(const Panel& panel, const std::vector<std::string>& variables) {
    CorrelationMatrix m;
    m.variables = variables;
    const std::size_t k = variables.size();
    m.r.assign(k, std::vector<std::optional<double>>(k));
    std::vector<const MinuteObservation*> rows;
    for (const auto& match : panel.matches) {
        for (const auto& row : match.rows) rows.push_back(&row);
    }
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a; b < k; ++b) {
            std::vector<double> x, y;
            for (const auto* row : rows) {
                const auto va = row_value(*row, variables[a]);
                const auto vb = row_value(*row, variables[b]);
                if (!va || !vb) continue;
                x.push_back(*va);
                y.push_back(*vb);
            }
            auto r = pearson(x, y);
            if (a == b && r) r = 1.0;
            m.r[a][b] = r;
            m.r[b][a] = r;
        }
    }
    return m;
}

ModelSummary model_summary(const RegressionFit& fit) {
    return {fit.model, fit.loglik, fit.aic, static_cast<long>(fit.n), static_cast<long>(fit.k + 1)};
}

ModelSummary model_summary(const FitResult& fit) {
    return {fit.model + "_" + fit.spec, fit.loglik, fit.aic, static_cast<long>(fit.n_obs),
            static_cast<long>(fit.n_params)};
}

std::vector<ComparisonRow> compare_models(std::vector<ModelSummary> models) {
    if (models.empty()) throw std::invalid_argument("compare_models needs at least one fit");
    for (const auto& m : models) {
        if (m.n != models.front().n) {
            throw std::invalid_argument("compare_models: fits use different observation counts (" +
                                        std::to_string(models.front().n) + " vs " + std::to_string(m.n) + ")");
        }
    }
    std::sort(models.begin(), models.end(), [](const ModelSummary& a, const ModelSummary& b) {
        if (a.aic != b.aic) return a.aic < b.aic;
        return a.id < b.id;
    });
    std::vector<ComparisonRow> out;
    const double best = models.front().aic;
    for (auto& m : models) {
        const double delta = m.aic - best;
        out.push_back({std::move(m), delta});
    }
    return out;
}

void export_match_series(std::ostream& out, const Panel& panel, std::string_view match_id) {
    const MatchPanel* m = panel.find(match_id);
    if (!m) throw std::invalid_argument("match '" + std::string(match_id) + "' is not in the panel");
    out << "t,improb_team,improb_opp,stakerel,halftime\n";
    for (const auto& row : m->rows) {
        out << row.t << ',' << csv::format_optional(row.improb) << ',' << csv::format_optional(row.improb_opp) << ','
            << csv::format_optional(row.stakerel) << ',' << (row.halftime ? 1 : 0) << '\n';
    }
}

void write_summary_markdown(std::ostream& out, const SummaryTable& table) {
    out << "| Variable | N | Mean | Standard deviation | Minimum | Maximum | Median |\n";
    out << "|---|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& r : table.rows) {
        out << "| " << r.variable << " | " << r.n << " | " << table_number(r.mean) << " | " << table_number(r.sd)
            << " | " << table_number(r.min) << " | " << table_number(r.max) << " | " << table_number(r.median)
            << " |\n";
    }
}

void write_correlations_csv(std::ostream& out, const CorrelationMatrix& m) {
    out << "variable";
    for (const auto& v : m.variables) out << ',' << v;
    out << '\n';
    for (std::size_t a = 0; a < m.variables.size(); ++a) {
        out << m.variables[a];
        for (std::size_t b = 0; b < m.variables.size(); ++b) out << ',' << csv::format_optional(m.r[a][b]);
        out << '\n';
    }
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
    out << "model,n,n_params,loglik,aic,delta_aic\n";
    for (const auto& r : rows) {
        out << csv::quote_if_needed(r.model.id) << ',' << r.model.n << ',' << r.model.n_params << ','
            << csv::format_double(r.model.loglik) << ',' << csv::format_double(r.model.aic) << ','
            << csv::format_double(r.delta_aic) << '\n';
    }
}

void write_regression_table(std::ostream& out, std::span<const RegressionFit> fits) {
    // Row order: union of columns, intercept last.
    std::vector<std::pair<std::string, std::string>> rows;
    for (const auto& f : fits) {
        for (std::size_t j = 0; j < f.columns.size(); ++j) {
            const bool seen = std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r.first == f.columns[j]; });
            if (!seen && f.columns[j] != "constant") rows.emplace_back(f.columns[j], f.labels[j]);
        }
    }
    rows.emplace_back("constant", "Constant");
    out << "|";
    for (const auto& f : fits) out << " | " << f.model;
    out << " |\n|---";
    for (std::size_t i = 0; i < fits.size(); ++i) out << "|---:";
    out << "|\n";
    for (const auto& [key, lab] : rows) {
        std::string est = "| " + lab, ci = "| ";
        for (const auto& f : fits) {
            const auto it = std::find(f.columns.begin(), f.columns.end(), key);
            if (it == f.columns.end()) {
                est += " | ";
                ci += " | ";
                continue;
            }
            const auto j = static_cast<Eigen::Index>(it - f.columns.begin());
            est += " | " + table_number(f.beta(j));
            ci += " | " + interval(f.ci_lower(j), f.ci_upper(j));
        }
        out << est << " |\n" << ci << " |\n";
    }
    out << "| Observations";
    for (const auto& f : fits) out << " | " << f.n;
    out << " |\n| AIC";
    for (const auto& f : fits) out << " | " << table_number(f.aic);
    out << " |\n";
}

void write_ssm_table(std::ostream& out, std::span<const FitResult> fits) {
    std::vector<std::pair<std::string, std::string>> rows;
    auto add = [&](const std::string& name, const std::string& lab) {
        const bool seen = std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r.first == name; });
        if (!seen) rows.emplace_back(name, lab);
    };
    for (const auto& f : fits) {
        if (f.with_state) {
            add("phi", "phi");
            add("sigma_s", "sigma_s");
        }
    }
    for (const auto& f : fits) {
        for (const auto& p : f.params) {
            if (p.name != "constant" && p.name != "phi" && p.name != "sigma_s") add(p.name, p.label);
        }
    }
    add("constant", "Constant");
    out << "|";
    for (const auto& f : fits) out << " | " << f.model << " " << f.spec;
    out << " |\n|---";
    for (std::size_t i = 0; i < fits.size(); ++i) out << "|---:";
    out << "|\n";
    for (const auto& [name, lab] : rows) {
        std::string est = "| " + lab, ci = "| ";
        for (const auto& f : fits) {
            const ParameterEstimate* p = f.find(name);
            est += " | " + (p ? table_number(p->estimate) : std::string());
            ci += " | " + (p ? interval(p->lower, p->upper) : std::string());
        }
        out << est << " |\n" << ci << " |\n";
    }
    out << "| Observations";
    for (const auto& f : fits) out << " | " << f.n_obs;
    out << " |\n| AIC";
    for (const auto& f : fits) out << " | " << table_number(f.aic);
    out << " |\n";
}

}  // namespace inplay
