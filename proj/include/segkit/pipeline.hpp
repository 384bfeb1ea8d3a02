#ifndef SEGKIT_PIPELINE_HPP
#define SEGKIT_PIPELINE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "segkit/cluster.hpp"
#include "segkit/dataset.hpp"
#include "segkit/eda.hpp"
#include "segkit/forest.hpp"
#include "segkit/gaopt.hpp"
#include "segkit/partition.hpp"
#include "segkit/preprocess.hpp"
#include "segkit/report.hpp"
#include "segkit/synthgen.hpp"

/**
 * @file pipeline.hpp
 * @brief End-to-end segmentation: EDA, availability partition, and per region
 * preprocessing, k selection, weight optimization and final clustering,
 * followed by segment pruning and report emission.
 */

namespace segkit {

struct PipelineConfig {
    /// Input: either a CSV with `schema_path`, or a generator spec (schema optional).
    std::optional<std::filesystem::path> schema_path;
    std::optional<std::filesystem::path> data_path;
    std::optional<std::filesystem::path> generator_path;
    /// Empty means the schema's split variables.
    std::vector<std::string> split_variables;
    double central_mass = 0.98;

    DbscanConfig dbscan;
    std::size_t k_radius = 2;
    /// Upper bound on k; regions with fewer than 10 * max_k rows are not clustered.
    std::size_t max_k = 8;
    /// Final clustering on the full region.
    KMeansConfig kmeans;
    GaConfig ga;
    /// k-means used inside k selection and fitness evaluation.
    KMeansConfig ga_kmeans{2, 300, 1e-4, 2, 0};
    /// Rows sampled per region for DBSCAN, k selection and the GA (0 = all).
    std::size_t fit_sample_rows = 3000;

    ForestConfig forest;
    /// Importance targets; empty means every column.
    std::vector<std::string> importance_targets;
    ImportanceOptions importance{50, 5000};

    PruneThresholds pruning;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "segkit_out";
    /// Cluster only this region key (others are reported as not selected).
    std::optional<std::string> only_region;

    void validate() const;
    std::size_t min_region_rows() const noexcept { return 10 * max_k; }
};

/// Relative paths in `doc` resolve against `base_dir`.
PipelineConfig pipeline_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const PipelineConfig& cfg);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct EdaArtifacts {
    MissingReport missing;
    OutlierReport outliers;
    ImportanceResult importance;
};

enum class RegionStatus { clustered, empty, too_small, no_features, not_selected };
std::string_view to_string(RegionStatus status);

struct RegionOutcome {
    RegionKey key;
    std::size_t index = 0;
    std::size_t n_rows = 0;
    std::uint64_t seed = 0;
    RegionStatus status = RegionStatus::empty;

    std::vector<std::string> features;
    std::vector<std::string> dropped;
    TransformBundle transforms;
    KSelection selection;
    std::optional<WeightVector> seed_weights;
    GaResult ga;
    /// Davies-Bouldin of the final clustering with uniform weights, for comparison.
    double uniform_db = 0.0;
    ClusteringModel model;
};

struct SegmentationResult {
    EdaArtifacts eda;
    RegionPartition partition;
    std::vector<RegionOutcome> regions;
    /// Pruned.
    SegmentReport report;
    /// Per input row: region index and 1-based cluster (0 when the region was not clustered).
    std::vector<std::size_t> row_region;
    std::vector<std::size_t> row_cluster;
};

EdaArtifacts run_eda(const ColumnTable& table, const PipelineConfig& cfg);

/// Load (or generate) the corpus named by the config and segment it.
SegmentationResult run_segmentation(const PipelineConfig& cfg);
SegmentationResult run_segmentation(const PipelineConfig& cfg, const ColumnTable& table);

/// Segment rows for every clustered region; a region too small to cluster is one segment.
SegmentReport build_segment_report(const std::vector<RegionOutcome>& regions, std::size_t n_rows);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/**
 * Writes segments.csv, assignments.csv, eda.json, partition.json,
 * weights/region_<i>.json, ga_trace/region_<i>.csv, models/region_<i>.json
 * and manifest.json (config, seed, region status and a SHA-256 per file)
 * under `out_dir`. Throws IoError naming the path on failure.
 */
void emit_reports(const SegmentationResult& result, const PipelineConfig& cfg, const std::filesystem::path& out_dir);

/// Build a corpus from the config's generator spec or data file.
ColumnTable load_pipeline_input(const PipelineConfig& cfg);

} // namespace segkit

#endif
