#include "segkit/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "segkit/error.hpp"
#include "segkit/rng.hpp"

namespace segkit {

namespace {

// Stage streams under the master seed.
constexpr std::uint64_t kImportanceStream = 1;
// Stage streams under a region seed.
constexpr std::uint64_t kSampleStream = 1;
constexpr std::uint64_t kSelectStream = 2;
constexpr std::uint64_t kGaStream = 3;
constexpr std::uint64_t kGaKMeansStream = 4;
constexpr std::uint64_t kFinalStream = 5;

template<typename T>
void read_opt(const nlohmann::json& obj, const char* key, T& out) {
    if (obj.contains(key) && !obj.at(key).is_null()) {
        out = obj.at(key).get<T>();
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

void read_kmeans(const nlohmann::json& doc, KMeansConfig& k) {
    read_opt(doc, "max_iter", k.max_iter);
    read_opt(doc, "tol", k.tol);
    read_opt(doc, "n_init", k.n_init);
}

nlohmann::json kmeans_json(const KMeansConfig& k) {
    return {{"max_iter", k.max_iter}, {"tol", k.tol}, {"n_init", k.n_init}};
}

nlohmann::json finite_or_tag(double v) {
    if (std::isfinite(v)) {
        return v;
    }
    return v > 0 ? "inf" : "-inf";
}

/// Sorted sample of m distinct indices from [0, n), or all of them when m is 0 or >= n.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t m, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (m == 0 || m >= n) {
        return idx;
    }
    Rng rng(seed);
    for (std::size_t i = 0; i < m; ++i) {
        std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
    }
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<std::string> region_candidates(const TableSchema& schema, const RegionKey& key,
                                           const std::vector<std::string>& split_vars) {
    std::vector<std::string> out;
    for (const auto& col : schema.columns()) {
        const auto it = std::find(split_vars.begin(), split_vars.end(), col.name);
        if (it == split_vars.end() || key.present(static_cast<std::size_t>(it - split_vars.begin()))) {
            out.push_back(col.name);
        }
    }
    return out;
}

std::optional<WeightVector> importance_seed(const ImportanceVector& importance, const std::vector<std::string>& features) {
    if (importance.variables.empty()) {
        return std::nullopt;
    }
    std::vector<double> raw;
    raw.reserve(features.size());
    for (const auto& f : features) {
        const auto it = std::find(importance.variables.begin(), importance.variables.end(), f);
        raw.push_back(it == importance.variables.end() ? 0.0 : importance.values[it - importance.variables.begin()]);
    }
    return repair(raw);
}

void cluster_region(RegionOutcome& out, const ColumnTable& region_table, const std::vector<std::string>& candidates,
                    const ImportanceVector& importance, const PipelineConfig& cfg) {
    RegionFeatures prepared = prepare_region(region_table, candidates, cfg.central_mass);
    out.features = prepared.features;
    out.dropped = prepared.dropped;
    out.transforms = std::move(prepared.transforms);
    if (out.features.empty()) {
        out.status = RegionStatus::no_features;
        return;
    }
    const FeatureMatrix& x = prepared.matrix;
    const auto sample = sample_indices(x.rows(), cfg.fit_sample_rows, derive_seed(out.seed, kSampleStream));
    const FeatureMatrix xs = x.subset(sample);
    const WeightVector uniform = WeightVector::uniform(x.cols());

    KMeansConfig select_cfg = cfg.ga_kmeans;
    select_cfg.seed = derive_seed(out.seed, kSelectStream);
    out.selection = select_k(xs, uniform, cfg.dbscan, cfg.k_radius, select_cfg, cfg.max_k);
    const std::size_t k = out.selection.k;

    out.seed_weights = importance_seed(importance, out.features);
    GaConfig ga = cfg.ga;
    ga.seed = derive_seed(out.seed, kGaStream);
    KMeansConfig ga_kmeans = cfg.ga_kmeans;
    ga_kmeans.k = k;
    ga_kmeans.seed = derive_seed(out.seed, kGaKMeansStream);
    out.ga = run_ga(xs, k, out.seed_weights, ga, ga_kmeans);

    const ClusteringModel uniform_model = kmeans_fit(xs, uniform, ga_kmeans);
    out.uniform_db = uniform_model.db_score.value_or(std::numeric_limits<double>::infinity());

    KMeansConfig final_cfg = cfg.kmeans;
    final_cfg.k = k;
    final_cfg.seed = derive_seed(out.seed, kFinalStream);
    out.model = kmeans_fit(x, out.ga.best, final_cfg);
    out.status = RegionStatus::clustered;
}

bool single_segment(RegionStatus s) { return s == RegionStatus::too_small || s == RegionStatus::no_features; }

std::string region_file(const char* dir, std::size_t index, const char* ext) {
    return std::string(dir) + "/region_" + std::to_string(index) + ext;
}

} // namespace

void PipelineConfig::validate() const {
    if (data_path && !schema_path) {
        throw ContractError("a data file needs a schema");
    }
    if (!(central_mass > 0.0 && central_mass <= 1.0)) {
        throw ContractError("central_mass must lie in (0, 1]");
    }
    if (max_k < 2) {
        throw ContractError("max_k must be at least 2");
    }
    kmeans.validate();
    ga_kmeans.validate();
    ga.validate();
    forest.validate();
    pruning.validate();
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) {
        throw ContractError("pipeline config must be a JSON object");
    }
    PipelineConfig cfg;
    try {
        if (doc.contains("schema")) {
            cfg.schema_path = resolve(base_dir, doc.at("schema").get<std::string>());
        }
        if (doc.contains("data")) {
            cfg.data_path = resolve(base_dir, doc.at("data").get<std::string>());
        }
        if (doc.contains("generator")) {
            cfg.generator_path = resolve(base_dir, doc.at("generator").get<std::string>());
        }
        if (doc.contains("output_dir")) {
            cfg.output_dir = resolve(base_dir, doc.at("output_dir").get<std::string>());
        }
        read_opt(doc, "split_variables", cfg.split_variables);
        read_opt(doc, "central_mass", cfg.central_mass);
        read_opt(doc, "seed", cfg.seed);
        read_opt(doc, "k_radius", cfg.k_radius);
        read_opt(doc, "max_k", cfg.max_k);
        read_opt(doc, "fit_sample_rows", cfg.fit_sample_rows);
        if (doc.contains("dbscan")) {
            const auto& d = doc.at("dbscan");
            if (d.contains("eps") && !d.at("eps").is_null()) {
                cfg.dbscan.eps = d.at("eps").get<double>();
            }
            if (d.contains("min_pts") && !d.at("min_pts").is_null()) {
                cfg.dbscan.min_pts = d.at("min_pts").get<std::size_t>();
            }
        }
        if (doc.contains("kmeans")) {
            read_kmeans(doc.at("kmeans"), cfg.kmeans);
        }
        if (doc.contains("ga_kmeans")) {
            read_kmeans(doc.at("ga_kmeans"), cfg.ga_kmeans);
        }
        if (doc.contains("ga")) {
            const auto& g = doc.at("ga");
            read_opt(g, "population", cfg.ga.population);
            read_opt(g, "generations", cfg.ga.generations);
            read_opt(g, "tournament_size", cfg.ga.tournament_size);
            read_opt(g, "crossover_prob", cfg.ga.crossover_prob);
            read_opt(g, "blend_alpha", cfg.ga.blend_alpha);
            read_opt(g, "mutation_sigma", cfg.ga.mutation_sigma);
            read_opt(g, "gene_mutation_prob", cfg.ga.gene_mutation_prob);
            read_opt(g, "elites", cfg.ga.elites);
        }
        if (doc.contains("forest")) {
            const auto& f = doc.at("forest");
            read_opt(f, "n_trees", cfg.forest.n_trees);
            read_opt(f, "max_depth", cfg.forest.max_depth);
            read_opt(f, "min_leaf", cfg.forest.min_leaf);
            read_opt(f, "features_per_split", cfg.forest.features_per_split);
        }
        if (doc.contains("importance")) {
            const auto& i = doc.at("importance");
            read_opt(i, "targets", cfg.importance_targets);
            read_opt(i, "min_rows", cfg.importance.min_rows);
            read_opt(i, "sample_rows", cfg.importance.sample_rows);
        }
        if (doc.contains("pruning")) {
            const auto& p = doc.at("pruning");
            read_opt(p, "region_min_global_share", cfg.pruning.region_min_global_share);
            read_opt(p, "cluster_min_global_share", cfg.pruning.cluster_min_global_share);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("invalid pipeline config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

nlohmann::json to_json(const PipelineConfig& cfg) {
    nlohmann::json doc;
    doc["spec_version"] = 1;
    if (cfg.schema_path) {
        doc["schema"] = cfg.schema_path->generic_string();
    }
    if (cfg.data_path) {
        doc["data"] = cfg.data_path->generic_string();
    }
    if (cfg.generator_path) {
        doc["generator"] = cfg.generator_path->generic_string();
    }
    doc["output_dir"] = cfg.output_dir.generic_string();
    doc["split_variables"] = cfg.split_variables;
    doc["central_mass"] = cfg.central_mass;
    doc["seed"] = cfg.seed;
    doc["k_radius"] = cfg.k_radius;
    doc["max_k"] = cfg.max_k;
    doc["fit_sample_rows"] = cfg.fit_sample_rows;
    doc["dbscan"] = {{"eps", cfg.dbscan.eps ? nlohmann::json(*cfg.dbscan.eps) : nlohmann::json(nullptr)},
                     {"min_pts", cfg.dbscan.min_pts ? nlohmann::json(*cfg.dbscan.min_pts) : nlohmann::json(nullptr)}};
    doc["kmeans"] = kmeans_json(cfg.kmeans);
    doc["ga_kmeans"] = kmeans_json(cfg.ga_kmeans);
    doc["ga"] = {{"population", cfg.ga.population},
                 {"generations", cfg.ga.generations},
                 {"tournament_size", cfg.ga.tournament_size},
                 {"crossover_prob", cfg.ga.crossover_prob},
                 {"blend_alpha", cfg.ga.blend_alpha},
                 {"mutation_sigma", cfg.ga.mutation_sigma},
                 {"gene_mutation_prob", cfg.ga.gene_mutation_prob},
                 {"elites", cfg.ga.elites}};
    doc["forest"] = {{"n_trees", cfg.forest.n_trees},
                     {"max_depth", cfg.forest.max_depth},
                     {"min_leaf", cfg.forest.min_leaf},
                     {"features_per_split", cfg.forest.features_per_split}};
    doc["importance"] = {{"targets", cfg.importance_targets},
                         {"min_rows", cfg.importance.min_rows},
                         {"sample_rows", cfg.importance.sample_rows}};
    doc["pruning"] = {{"region_min_global_share", cfg.pruning.region_min_global_share},
                      {"cluster_min_global_share", cfg.pruning.cluster_min_global_share}};
    return doc;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config " + path.string());
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ContractError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return pipeline_config_from_json(doc, path.parent_path());
}

std::string_view to_string(RegionStatus status) {
    switch (status) {
    case RegionStatus::clustered: return "clustered";
    case RegionStatus::empty: return "empty";
    case RegionStatus::too_small: return "too_small";
    case RegionStatus::no_features: return "no_features";
    case RegionStatus::not_selected: return "not_selected";
    }
    return "unknown";
}

ColumnTable load_pipeline_input(const PipelineConfig& cfg) {
    if (cfg.data_path) {
        return load_table(*cfg.data_path, load_schema(*cfg.schema_path));
    }
    if (cfg.generator_path) {
        return generate_corpus(load_generator_spec(*cfg.generator_path));
    }
    throw ContractError("pipeline config has no input");
}

EdaArtifacts run_eda(const ColumnTable& table, const PipelineConfig& cfg) {
    EdaArtifacts eda;
    eda.missing = compute_missing_rates(table);
    eda.outliers = outlier_report(table);
    const auto variables = table.schema().names();
    const auto targets = cfg.importance_targets.empty() ? variables : cfg.importance_targets;
    ForestConfig forest = cfg.forest;
    forest.seed = derive_seed(cfg.seed, kImportanceStream);
    eda.importance = rank_variable_importance(table, targets, variables, forest, cfg.importance);
    return eda;
}

SegmentReport build_segment_report(const std::vector<RegionOutcome>& regions, std::size_t n_rows) {
    SegmentReport report;
    const double total = static_cast<double>(n_rows);
    for (const auto& r : regions) {
        if (r.status == RegionStatus::clustered) {
            const auto sizes = r.model.cluster_sizes();
            for (std::size_t c = 0; c < sizes.size(); ++c) {
                SegmentRow row;
                row.region = r.index;
                row.cluster = c + 1;
                row.n_rows = sizes[c];
                row.region_share = static_cast<double>(sizes[c]) / static_cast<double>(r.n_rows);
                row.global_share = static_cast<double>(sizes[c]) / total;
                report.rows.push_back(row);
            }
        } else if (single_segment(r.status)) {
            report.rows.push_back({r.index, 1, 1.0, static_cast<double>(r.n_rows) / total, true, r.n_rows});
        }
    }
    return report;
}

SegmentationResult run_segmentation(const PipelineConfig& cfg) {
    cfg.validate();
    const ColumnTable table = load_pipeline_input(cfg);
    return run_segmentation(cfg, table);
}

SegmentationResult run_segmentation(const PipelineConfig& cfg, const ColumnTable& table) {
    cfg.validate();
    if (table.n_rows() == 0) {
        throw ContractError("cannot segment an empty table");
    }
    SegmentationResult result;
    const auto split_vars = cfg.split_variables.empty() ? table.schema().split_variables() : cfg.split_variables;
    if (cfg.only_region) {
        RegionKey::parse(*cfg.only_region); // validates the text
        if (cfg.only_region->size() != split_vars.size()) {
            throw ContractError("region key " + *cfg.only_region + " does not match " +
                                std::to_string(split_vars.size()) + " split variables");
        }
    }

    result.eda = run_eda(table, cfg);
    result.partition = partition_regions(table, split_vars);
    result.row_region.assign(table.n_rows(), 0);
    result.row_cluster.assign(table.n_rows(), 0);

    for (const Region& region : result.partition.regions) {
        RegionOutcome out;
        out.key = region.key;
        out.index = region.index();
        out.n_rows = region.rows.size();
        out.seed = derive_seed(cfg.seed, stable_hash(region.key.to_string()));
        for (std::size_t row : region.rows) {
            result.row_region[row] = out.index;
        }

        if (cfg.only_region && *cfg.only_region != region.key.to_string()) {
            out.status = RegionStatus::not_selected;
        } else if (region.rows.empty()) {
            out.status = RegionStatus::empty;
        } else if (region.rows.size() < cfg.min_region_rows()) {
            out.status = RegionStatus::too_small;
        } else {
            const ColumnTable region_table = select_rows(table, std::span<const std::size_t>(region.rows));
            cluster_region(out, region_table, region_candidates(table.schema(), region.key, split_vars),
                           result.eda.importance.importance, cfg);
        }

        if (out.status == RegionStatus::clustered) {
            for (std::size_t i = 0; i < region.rows.size(); ++i) {
                result.row_cluster[region.rows[i]] = static_cast<std::size_t>(out.model.assignments[i]) + 1;
            }
        } else if (single_segment(out.status)) {
            for (std::size_t row : region.rows) {
                result.row_cluster[row] = 1;
            }
        }
        result.regions.push_back(std::move(out));
    }

    result.report = prune_segments(build_segment_report(result.regions, table.n_rows()), cfg.pruning);
    return result;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw IoError("SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

void emit_reports(const SegmentationResult& result, const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
    std::vector<std::pair<std::string, std::string>> files;

    files.emplace_back("segments.csv", segments_to_csv(result.report));

    std::ostringstream assignments;
    assignments << "row,region,cluster\n";
    for (std::size_t i = 0; i < result.row_region.size(); ++i) {
        assignments << i << ',' << result.row_region[i] << ',' << result.row_cluster[i] << '\n';
    }
    files.emplace_back("assignments.csv", assignments.str());

    const nlohmann::json eda = {{"spec_version", 1},
                                {"missing", to_json(result.eda.missing)},
                                {"outliers", to_json(result.eda.outliers)},
                                {"importance", to_json(result.eda.importance)}};
    files.emplace_back("eda.json", eda.dump(2) + "\n");
    files.emplace_back("partition.json", to_json(result.partition).dump(2) + "\n");

    nlohmann::json regions = nlohmann::json::array();
    for (const auto& r : result.regions) {
        nlohmann::json entry = {{"region", r.index},
                                {"key", r.key.to_string()},
                                {"n_rows", r.n_rows},
                                {"status", to_string(r.status)}};
        if (r.status != RegionStatus::clustered) {
            entry["reason"] = to_string(r.status);
            regions.push_back(std::move(entry));
            continue;
        }
        entry["k"] = r.selection.k;
        entry["k_dbscan"] = r.selection.k_dbscan;
        entry["features"] = r.features;
        entry["dropped"] = r.dropped;
        regions.push_back(entry);

        files.emplace_back(region_file("weights", r.index, ".json"),
                           weights_to_json(r.ga.best, r.features, r.ga.best_fitness).dump(2) + "\n");
        files.emplace_back(region_file("ga_trace", r.index, ".csv"), trace_to_csv(r.ga.trace));

        nlohmann::json candidates = nlohmann::json::array();
        for (const auto& c : r.selection.candidates) {
            candidates.push_back({{"k", c.k}, {"davies_bouldin", finite_or_tag(c.db)}});
        }
        nlohmann::json seed_weights = nullptr;
        if (r.seed_weights) {
            seed_weights = weights_to_json(*r.seed_weights, r.features, 0.0)["weights"];
        }
        const nlohmann::json model = {{"spec_version", 1},
                                      {"region", r.index},
                                      {"key", r.key.to_string()},
                                      {"transforms", r.transforms.to_json()},
                                      {"k_selection",
                                       {{"k", r.selection.k}, {"k_dbscan", r.selection.k_dbscan}, {"candidates", candidates}}},
                                      {"importance_seed", seed_weights},
                                      {"uniform_weight_davies_bouldin", finite_or_tag(r.uniform_db)},
                                      {"clustering", to_json(r.model, r.features)}};
        files.emplace_back(region_file("models", r.index, ".json"), model.dump(2) + "\n");
    }

    std::error_code ec;
    for (const char* dir : {"", "weights", "ga_trace", "models"}) {
        std::filesystem::create_directories(out_dir / dir, ec);
        if (ec) {
            throw IoError("cannot create directory " + (out_dir / dir).string() + ": " + ec.message());
        }
    }
    nlohmann::json hashes = nlohmann::json::object();
    for (const auto& [name, content] : files) {
        const auto path = out_dir / name;
        std::ofstream out(path, std::ios::binary);
        out << content;
        if (!out) {
            throw IoError("cannot write " + path.string());
        }
        hashes[name] = sha256_hex(content);
    }

    nlohmann::json config = to_json(cfg);
    config.erase("output_dir");
    const SegmentTotals totals = result.report.totals();
    const nlohmann::json manifest = {
        {"spec_version", 1},
        {"seed", cfg.seed},
        {"config", config},
        {"n_rows", result.partition.n_rows},
        {"regions", regions},
        {"totals",
         {{"n_segments", totals.n_segments},
          {"n_relevant", totals.n_relevant},
          {"discarded_global_share", totals.discarded_global_share}}},
        {"files", hashes}};
    const auto manifest_path = out_dir / "manifest.json";
    std::ofstream out(manifest_path, std::ios::binary);
    out << manifest.dump(2) << "\n";
    if (!out) {
        throw IoError("cannot write " + manifest_path.string());
    }
}

} // namespace segkit
