#include "segkit/eda.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "segkit/error.hpp"
#include "segkit/rng.hpp"

namespace segkit {

MissingReport compute_missing_rates(const ColumnTable& table) {
    if (table.n_rows() == 0) {
        throw ContractError("missing-rate report needs at least one row");
    }
    MissingReport report;
    for (std::size_t c = 0; c < table.n_columns(); ++c) {
        auto mask = table.missing(c);
        const auto missing = std::count(mask.begin(), mask.end(), std::uint8_t{1});
        report.columns.push_back({table.schema()[c].name, static_cast<double>(missing) / static_cast<double>(table.n_rows())});
    }
    return report;
}

namespace {

std::vector<double> present_values(const ColumnTable& table, std::size_t c) {
    std::vector<double> out;
    auto values = table.numbers(c);
    auto missing = table.missing(c);
    for (std::size_t r = 0; r < values.size(); ++r) {
        if (!missing[r]) {
            out.push_back(values[r]);
        }
    }
    return out;
}

std::size_t continuous_column(const ColumnTable& table, std::string_view column) {
    const std::size_t c = table.schema().index_of(column);
    if (table.schema()[c].kind != ColumnKind::continuous) {
        throw ContractError("column '" + std::string(column) + "' is not continuous");
    }
    return c;
}

} // namespace

OutlierEntry flag_outliers(const ColumnTable& table, std::string_view column, double k_sigma) {
    const std::size_t c = continuous_column(table, column);
    auto values = table.numbers(c);
    auto missing = table.missing(c);

    OutlierEntry entry;
    entry.column = std::string(column);
    double sum = 0.0;
    for (std::size_t r = 0; r < values.size(); ++r) {
        if (!missing[r]) {
            sum += values[r];
            ++entry.n_present;
        }
    }
    if (entry.n_present < 2) {
        throw ContractError("outlier rule needs at least two values in '" + entry.column + "'");
    }
    const double n = static_cast<double>(entry.n_present);
    entry.mean = sum / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < values.size(); ++r) {
        if (!missing[r]) {
            const double d = values[r] - entry.mean;
            ss += d * d;
        }
    }
    entry.std_dev = std::sqrt(ss / n);
    if (entry.std_dev == 0.0) {
        entry.degenerate_spread = true;
        return entry;
    }
    const double limit = k_sigma * entry.std_dev;
    for (std::size_t r = 0; r < values.size(); ++r) {
        if (!missing[r] && std::abs(values[r] - entry.mean) > limit) {
            entry.rows.push_back(r);
        }
    }
    entry.fraction = static_cast<double>(entry.rows.size()) / n;
    return entry;
}

OutlierReport outlier_report(const ColumnTable& table, double k_sigma) {
    OutlierReport report;
    for (std::size_t c = 0; c < table.n_columns(); ++c) {
        const auto& spec = table.schema()[c];
        if (spec.kind != ColumnKind::continuous) {
            continue;
        }
        auto missing = table.missing(c);
        if (std::count(missing.begin(), missing.end(), std::uint8_t{0}) < 2) {
            continue;
        }
        report.columns.push_back(flag_outliers(table, spec.name, k_sigma));
    }
    return report;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw ContractError("quantile of an empty sample");
    }
    const double h = static_cast<double>(sorted.size() - 1) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

DenseInterval dense_interval(std::span<const double> values, double central_mass) {
    if (values.size() < 10) {
        throw ContractError("dense interval needs at least 10 values");
    }
    if (!(central_mass > 0.0 && central_mass <= 1.0)) {
        throw ContractError("central mass must lie in (0, 1]");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double tail = (1.0 - central_mass) / 2.0;
    return {"", quantile_sorted(sorted, tail), quantile_sorted(sorted, 1.0 - tail)};
}

DenseInterval estimate_dense_interval(const ColumnTable& table, std::string_view column, double central_mass) {
    const std::size_t c = continuous_column(table, column);
    DenseInterval interval = dense_interval(present_values(table, c), central_mass);
    interval.column = std::string(column);
    return interval;
}

double ImportanceVector::operator[](std::string_view variable) const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (variables[i] == variable) {
            return values[i];
        }
    }
    throw LookupError("no importance for '" + std::string(variable) + "'");
}

ImportanceVector aggregate_importances(const std::vector<std::string>& variables,
                                       const std::vector<ImportanceProblem>& problems) {
    std::vector<double> sum(variables.size(), 0.0);
    std::vector<double> count(variables.size(), 0.0);
    for (const auto& p : problems) {
        if (p.skipped) {
            continue;
        }
        for (std::size_t i = 0; i < p.predictors.size(); ++i) {
            auto it = std::find(variables.begin(), variables.end(), p.predictors[i]);
            if (it == variables.end()) {
                continue;
            }
            const auto v = static_cast<std::size_t>(it - variables.begin());
            sum[v] += p.importances[i];
            count[v] += 1.0;
        }
    }
    ImportanceVector out{variables, std::vector<double>(variables.size(), 0.0)};
    for (std::size_t v = 0; v < variables.size(); ++v) {
        if (count[v] > 0.0) {
            out.values[v] = sum[v] / count[v];
        }
    }
    const double total = std::accumulate(out.values.begin(), out.values.end(), 0.0);
    if (total > 0.0) {
        for (auto& x : out.values) {
            x /= total;
        }
    } else if (!variables.empty()) {
        std::fill(out.values.begin(), out.values.end(), 1.0 / static_cast<double>(variables.size()));
    }
    return out;
}

namespace {

// Numeric view of one column: raw values for continuous, frequency-rank codes
// for categorical (most frequent = 0, ties by label). Missing stays NaN.
std::vector<double> column_codes(const ColumnTable& table, std::size_t c) {
    const std::size_t n = table.n_rows();
    auto missing = table.missing(c);
    if (table.schema()[c].kind == ColumnKind::continuous) {
        auto values = table.numbers(c);
        return {values.begin(), values.end()};
    }
    auto labels = table.labels(c);
    std::map<std::string, std::size_t> freq;
    for (std::size_t r = 0; r < n; ++r) {
        if (!missing[r]) {
            ++freq[labels[r]];
        }
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::map<std::string, double> code;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        code[ranked[i].first] = static_cast<double>(i);
    }
    std::vector<double> out(n, std::nan(""));
    for (std::size_t r = 0; r < n; ++r) {
        if (!missing[r]) {
            out[r] = code[labels[r]];
        }
    }
    return out;
}

double fill_value(const std::vector<double>& codes, std::span<const std::size_t> rows, bool categorical) {
    std::vector<double> present;
    for (auto r : rows) {
        if (!std::isnan(codes[r])) {
            present.push_back(codes[r]);
        }
    }
    if (present.empty()) {
        return 0.0;
    }
    std::sort(present.begin(), present.end());
    if (!categorical) {
        return quantile_sorted(present, 0.5);
    }
    // mode; codes are frequency ranks so the smallest code wins ties
    double best = present.front();
    std::size_t best_run = 0;
    for (std::size_t i = 0; i < present.size();) {
        std::size_t j = i;
        while (j < present.size() && present[j] == present[i]) {
            ++j;
        }
        if (j - i > best_run) {
            best_run = j - i;
            best = present[i];
        }
        i = j;
    }
    return best;
}

} // namespace

ImportanceResult rank_variable_importance(const ColumnTable& table, const std::vector<std::string>& targets,
                                          const std::vector<std::string>& variables, const ForestConfig& forest,
                                          const ImportanceOptions& options) {
    forest.validate();
    std::vector<std::size_t> var_cols;
    for (const auto& v : variables) {
        var_cols.push_back(table.schema().index_of(v));
    }
    std::vector<std::vector<double>> codes;
    for (auto c : var_cols) {
        codes.push_back(column_codes(table, c));
    }

    ImportanceResult result;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const auto& target = targets[t];
        ImportanceProblem problem;
        problem.target = target;
        auto it = std::find(variables.begin(), variables.end(), target);
        const std::size_t target_col = table.schema().index_of(target);
        const bool categorical_target = table.schema()[target_col].kind == ColumnKind::categorical;
        const std::vector<double> target_codes =
            it != variables.end() ? codes[static_cast<std::size_t>(it - variables.begin())] : column_codes(table, target_col);

        std::vector<std::size_t> predictors;
        for (std::size_t v = 0; v < variables.size(); ++v) {
            if (variables[v] != target) {
                predictors.push_back(v);
                problem.predictors.push_back(variables[v]);
            }
        }

        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            if (!table.is_missing(target_col, r)) {
                rows.push_back(r);
            }
        }
        if (predictors.empty()) {
            problem.skipped = true;
            problem.reason = "no predictors";
        } else if (rows.size() < std::max<std::size_t>(options.min_rows, 2)) {
            problem.skipped = true;
            problem.reason = "only " + std::to_string(rows.size()) + " rows with the target present";
        }
        if (problem.skipped) {
            result.problems.push_back(std::move(problem));
            continue;
        }

        const std::uint64_t problem_seed = derive_seed(forest.seed, stable_hash(target));
        if (options.sample_rows > 0 && rows.size() > options.sample_rows) {
            Rng rng(derive_seed(problem_seed, 0x5A));
            std::shuffle(rows.begin(), rows.end(), rng);
            rows.resize(options.sample_rows);
            std::sort(rows.begin(), rows.end());
        }
        problem.n_rows = rows.size();

        const std::size_t p = predictors.size();
        std::vector<double> x(rows.size() * p);
        for (std::size_t j = 0; j < p; ++j) {
            const std::size_t v = predictors[j];
            const bool categorical = table.schema()[var_cols[v]].kind == ColumnKind::categorical;
            const double fill = fill_value(codes[v], rows, categorical);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const double value = codes[v][rows[i]];
                x[i * p + j] = std::isnan(value) ? fill : value;
            }
        }
        std::vector<double> y(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            y[i] = target_codes[rows[i]];
        }

        ForestConfig cfg = forest;
        cfg.seed = problem_seed;
        auto model = RandomForest::fit(x, p, y, categorical_target ? ForestTask::classification : ForestTask::regression, cfg);
        problem.importances = model.feature_importances();
        result.problems.push_back(std::move(problem));
    }
    result.importance = aggregate_importances(variables, result.problems);
    return result;
}

nlohmann::json to_json(const MissingReport& report) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : report.columns) {
        out.push_back({{"column", c.column}, {"missing_fraction", c.fraction}});
    }
    return out;
}

nlohmann::json to_json(const OutlierReport& report) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : report.columns) {
        out.push_back({{"column", c.column},
                       {"n_present", c.n_present},
                       {"mean", c.mean},
                       {"std", c.std_dev},
                       {"n_outliers", c.rows.size()},
                       {"outlier_fraction", c.fraction},
                       {"degenerate_spread", c.degenerate_spread}});
    }
    return out;
}

nlohmann::json to_json(const ImportanceResult& result) {
    nlohmann::json importance = nlohmann::json::object();
    for (std::size_t i = 0; i < result.importance.variables.size(); ++i) {
        importance[result.importance.variables[i]] = result.importance.values[i];
    }
    nlohmann::json problems = nlohmann::json::array();
    for (const auto& p : result.problems) {
        nlohmann::json entry = {{"target", p.target}, {"skipped", p.skipped}, {"n_rows", p.n_rows}};
        if (p.skipped) {
            entry["reason"] = p.reason;
        } else {
            nlohmann::json imp = nlohmann::json::object();
            for (std::size_t i = 0; i < p.predictors.size(); ++i) {
                imp[p.predictors[i]] = p.importances[i];
            }
            entry["importances"] = imp;
        }
        problems.push_back(std::move(entry));
    }
    return {{"aggregate", importance}, {"problems", problems}};
}

} // namespace segkit
