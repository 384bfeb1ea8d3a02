#ifndef SEGKIT_EDA_HPP
#define SEGKIT_EDA_HPP

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "segkit/dataset.hpp"
#include "segkit/forest.hpp"

/**
 * @file eda.hpp
 * @brief Exploratory statistics: missing rates, k-sigma outliers, dense
 * intervals and variable importance from artificial supervised problems.
 */

namespace segkit {

struct MissingRate {
    std::string column;
    double fraction = 0.0;
};

struct MissingReport {
    std::vector<MissingRate> columns;
};

/// Throws ContractError for a table without rows.
MissingReport compute_missing_rates(const ColumnTable& table);

struct OutlierEntry {
    std::string column;
    std::size_t n_present = 0;
    double mean = 0.0;
    /// Population standard deviation over non-missing values.
    double std_dev = 0.0;
    double fraction = 0.0;
    std::vector<std::size_t> rows;
    /// Set when std_dev == 0; no rows are flagged then.
    bool degenerate_spread = false;
};

struct OutlierReport {
    std::vector<OutlierEntry> columns;
};

/// Rows with |x - mean| > k_sigma * std. Column must be continuous with at least two values.
OutlierEntry flag_outliers(const ColumnTable& table, std::string_view column, double k_sigma = 3.0);
/// flag_outliers over every continuous column that has at least two values.
OutlierReport outlier_report(const ColumnTable& table, double k_sigma = 3.0);

struct DenseInterval {
    std::string column;
    double lo = 0.0;
    double hi = 0.0;
};

/// Linear-interpolation quantile of sorted data (h = (n-1)p).
double quantile_sorted(std::span<const double> sorted, double p);

/// Central `central_mass` of the values. Needs at least 10 values.
DenseInterval dense_interval(std::span<const double> values, double central_mass = 0.98);
DenseInterval estimate_dense_interval(const ColumnTable& table, std::string_view column, double central_mass = 0.98);

struct ImportanceVector {
    std::vector<std::string> variables;
    /// Non-negative, sums to one.
    std::vector<double> values;

    double operator[](std::string_view variable) const;
};

struct ImportanceOptions {
    /// An artificial problem needs at least this many rows with the target present.
    std::size_t min_rows = 50;
    /// Rows used per problem are capped at this count (0 = all), sampled deterministically.
    std::size_t sample_rows = 0;
};

struct ImportanceProblem {
    std::string target;
    bool skipped = false;
    std::string reason;
    std::size_t n_rows = 0;
    /// Normalized importances of the predictors, in `variables` order with the target excluded.
    std::vector<std::string> predictors;
    std::vector<double> importances;
};

struct ImportanceResult {
    ImportanceVector importance;
    std::vector<ImportanceProblem> problems;
};

/**
 * One random forest per target, predicting it from every other variable in
 * `variables`. Regression for continuous targets, classification for
 * categorical ones. Missing predictor cells are filled with the training
 * median (continuous) or mode (categorical); categorical predictors enter as
 * frequency-rank codes. A variable's aggregate importance is the mean of its
 * normalized importances over the problems where it was a predictor.
 */
ImportanceResult rank_variable_importance(const ColumnTable& table, const std::vector<std::string>& targets,
                                          const std::vector<std::string>& variables, const ForestConfig& forest,
                                          const ImportanceOptions& options = {});

/// Average of per-problem importances over the problems each variable took part in, renormalized.
ImportanceVector aggregate_importances(const std::vector<std::string>& variables,
                                       const std::vector<ImportanceProblem>& problems);

nlohmann::json to_json(const MissingReport& report);
nlohmann::json to_json(const OutlierReport& report);
nlohmann::json to_json(const ImportanceResult& result);

} // namespace segkit

#endif
