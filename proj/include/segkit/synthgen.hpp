#ifndef SEGKIT_SYNTHGEN_HPP
#define SEGKIT_SYNTHGEN_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "segkit/dataset.hpp"

/**
 * @file synthgen.hpp
 * @brief Seeded generator for corpora with calibrated missingness, injected
 * outliers and planted cluster structure per availability pattern.
 */

namespace segkit {

enum class DistributionKind { heavy_tail, bounded_normal, categorical };

/**
 * Marginal family of a generated column.
 *
 * - heavy_tail: log-normal, `location`/`scale` are the log-space mean and sd.
 * - bounded_normal: normal with mean `location`, sd `scale`, clamped to [lo, hi].
 * - categorical: labels drawn from `frequencies` (normalized internally).
 */
struct Distribution {
    DistributionKind kind = DistributionKind::bounded_normal;
    double location = 0.0;
    double scale = 1.0;
    double lo = -1e300;
    double hi = 1e300;
    std::vector<std::string> categories;
    std::vector<double> frequencies;
};

struct GeneratedColumn {
    ColumnSpec spec;
    /// Ignored for split columns when joint split patterns are configured.
    double missing_rate = 0.0;
    Distribution distribution;
    double outlier_rate = 0.0;
    /// Spread of planted cluster centres, in units of the column's scale.
    double separation = 2.0;
};

/// Joint presence probability of one split-variable pattern, e.g. "101".
struct SplitPattern {
    std::string key;
    double probability = 0.0;
};

struct GeneratorSpec {
    std::size_t n_rows = 0;
    std::vector<GeneratedColumn> columns;
    /// Optional; when empty, split columns go missing independently at their missing_rate.
    std::vector<SplitPattern> split_patterns;
    std::size_t default_clusters = 3;
    std::map<std::string, std::size_t> clusters_by_pattern;
    /// Outlier cells are the drawn value multiplied by this factor.
    double outlier_factor = 10.0;
    std::uint64_t seed = 0;

    TableSchema schema() const;
    std::size_t planted_clusters(const std::string& pattern) const;
    /// Throws ContractError/SchemaError on invalid rates, patterns or distributions.
    void validate() const;
    /// Target missing rate of a column, derived from split_patterns for split columns.
    double target_missing_rate(std::size_t column) const;
};

GeneratorSpec generator_spec_from_json(const nlohmann::json& doc);
GeneratorSpec load_generator_spec(const std::filesystem::path& path);

struct SyntheticCorpus {
    ColumnTable table;
    /// Split-variable presence pattern per row, bits in split-column order.
    std::vector<std::string> pattern;
    /// Planted cluster index within the row's pattern.
    std::vector<int> cluster;
};

ColumnTable generate_corpus(const GeneratorSpec& spec);
SyntheticCorpus generate_corpus_with_truth(const GeneratorSpec& spec);

} // namespace segkit

#endif
