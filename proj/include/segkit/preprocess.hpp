#ifndef SEGKIT_PREPROCESS_HPP
#define SEGKIT_PREPROCESS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "segkit/dataset.hpp"
#include "segkit/eda.hpp"
#include "segkit/matrix.hpp"

/**
 * @file preprocess.hpp
 * @brief Per-region feature construction: density-aware normalization of
 * continuous columns, label encoding of categorical columns, and imputation.
 */

namespace segkit {

/**
 * Midrank empirical-CDF normalizer.
 *
 * Training values are clamped into the dense interval [lo, hi]. For a query x,
 * clamped the same way, the raw score is y(x) = (L + E/2) / n where L counts
 * training values strictly below x and E counts ties. The output rescales y
 * so the smallest training value maps to 0 and the largest to 1, saturating
 * outside that range. Dense regions of the data therefore get stretched and
 * sparse tails get compressed.
 *
 * A constant training sample gives a degenerate model that returns 0.5.
 */
class NormalizerModel {
public:
    NormalizerModel() = default;

    /// Needs at least two finite values.
    static NormalizerModel fit(std::span<const double> values, const DenseInterval& interval);
    /// Degenerate model for a column with a single observed value.
    static NormalizerModel constant(std::string column, double value);

    /// Throws ContractError for non-finite input.
    double apply(double x) const;
    double raw_score(double x) const;

    const std::string& column() const noexcept { return column_; }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    bool degenerate() const noexcept { return degenerate_; }
    std::size_t n_train() const noexcept { return n_; }

    nlohmann::json to_json() const;
    static NormalizerModel from_json(const nlohmann::json& doc);

private:
    std::string column_;
    double lo_ = 0.0;
    double hi_ = 0.0;
    // Distinct clamped training values and the cumulative count up to each.
    std::vector<double> values_;
    std::vector<std::size_t> cumulative_;
    std::size_t n_ = 0;
    double y_min_ = 0.0;
    double y_max_ = 1.0;
    bool degenerate_ = false;
};

/**
 * Label encoder. Categories are ranked by descending training frequency, ties
 * broken lexicographically, and rank i embeds as i / (C - 1) (0 when C = 1).
 * Unseen labels map to 1.0.
 */
class EncoderModel {
public:
    EncoderModel() = default;

    /// Needs at least one label.
    static EncoderModel fit(std::span<const std::string> labels, std::string column = {});

    double encode(std::string_view label) const;
    /// Same, incrementing `unseen` when the label was not seen during fitting.
    double encode(std::string_view label, std::size_t& unseen) const;

    std::optional<std::size_t> index_of(std::string_view label) const;
    std::size_t cardinality() const noexcept { return labels_.size(); }
    /// Labels in index order.
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::string& column() const noexcept { return column_; }

    nlohmann::json to_json() const;
    static EncoderModel from_json(const nlohmann::json& doc);

private:
    std::string column_;
    std::vector<std::string> labels_;
};

struct ImputeResult {
    ColumnTable table;
    /// Columns with no values in this table; they are left missing and must not become features.
    std::vector<std::string> dropped;
};

/// Median for continuous, mode (lexicographic tie-break) for categorical.
ImputeResult impute_missing(const ColumnTable& region_table);

struct ColumnTransform {
    std::string column;
    ColumnKind kind = ColumnKind::continuous;
    NormalizerModel normalizer;
    EncoderModel encoder;
};

/// Fitted transforms for one region; feature order is the order of `columns`.
class TransformBundle {
public:
    std::vector<ColumnTransform> columns;

    std::vector<std::string> feature_names() const;
    /// `table` must have no missing cells in the feature columns. Unseen labels are counted in `unseen`.
    FeatureMatrix apply(const ColumnTable& table, std::size_t* unseen = nullptr) const;

    nlohmann::json to_json() const;
    static TransformBundle from_json(const nlohmann::json& doc);
};

/**
 * Fit one transform per feature on the observed (pre-imputation) values of the
 * region. Continuous columns with at least 10 values clamp to their dense
 * interval; smaller samples use their full range.
 */
TransformBundle fit_transforms(const ColumnTable& region_table, const std::vector<std::string>& features,
                               double central_mass = 0.98);

struct RegionFeatures {
    std::vector<std::string> features;
    std::vector<std::string> dropped;
    TransformBundle transforms;
    FeatureMatrix matrix;
};

/// impute_missing, drop empty candidates, fit transforms and build the feature matrix.
RegionFeatures prepare_region(const ColumnTable& region_table, const std::vector<std::string>& candidates,
                              double central_mass = 0.98);

} // namespace segkit

#endif
