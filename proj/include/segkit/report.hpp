#ifndef SEGKIT_REPORT_HPP
#define SEGKIT_REPORT_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace segkit {

/// One segment: cluster `cluster` (1-based) of region `region`. Shares are fractions.
struct SegmentRow {
    std::size_t region = 0;
    std::size_t cluster = 0;
    double region_share = 0.0;
    double global_share = 0.0;
    bool relevant = true;
    std::size_t n_rows = 0;
};

struct SegmentTotals {
    std::size_t n_segments = 0;
    std::size_t n_relevant = 0;
    /// Global share of the segments marked not relevant.
    double discarded_global_share = 0.0;
};

struct SegmentReport {
    std::vector<SegmentRow> rows;

    SegmentTotals totals() const;
    /// Sum of the global shares of every row in `region`.
    double region_global_share(std::size_t region) const;
};

struct PruneThresholds {
    double region_min_global_share = 0.01;
    double cluster_min_global_share = 0.01;

    void validate() const;
};

/**
 * Two passes. Every cluster of a region whose summed global share is below
 * `region_min_global_share` is marked not relevant; then every remaining
 * cluster below `cluster_min_global_share` is. Relevance flags already in the
 * input are reset first, so pruning is idempotent under threshold changes.
 */
SegmentReport prune_segments(SegmentReport report, const PruneThresholds& thresholds);

/// Columns region,cluster,pct_region,pct_global,relevant; percentages to four decimals.
std::string segments_to_csv(const SegmentReport& report);
void write_segments_csv(const SegmentReport& report, const std::filesystem::path& path);

/**
 * Reads the layout written by segments_to_csv. Percent columns may carry a
 * trailing `%`; the `relevant` column is optional and defaults to true.
 */
SegmentReport parse_segments_csv(std::string_view csv_text);
SegmentReport read_segments_csv(const std::filesystem::path& path);

nlohmann::json to_json(const SegmentReport& report);

} // namespace segkit

#endif
