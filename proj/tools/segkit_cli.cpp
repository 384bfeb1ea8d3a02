// segkit command-line front end: synth, eda, segment, report.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "segkit/error.hpp"
#include "segkit/pipeline.hpp"

namespace {

using namespace segkit;

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
}

void print_totals(const SegmentReport& report) {
    const SegmentTotals t = report.totals();
    std::cout << "segments: " << t.n_segments << ", relevant: " << t.n_relevant
              << ", discarded global share: " << format_number(t.discarded_global_share * 100.0) << "%\n";
}

void print_eda(const EdaArtifacts& eda, const RegionPartition& partition) {
    std::printf("%-28s %10s\n", "column", "missing %");
    for (const auto& m : eda.missing.columns) {
        std::printf("%-28s %10.2f\n", m.column.c_str(), 100.0 * m.fraction);
    }
    std::printf("\n%-28s %10s %12s %12s\n", "column", "outlier %", "mean", "std");
    for (const auto& o : eda.outliers.columns) {
        std::printf("%-28s %10.2f %12.4g %12.4g\n", o.column.c_str(), 100.0 * o.fraction, o.mean, o.std_dev);
    }
    const auto& imp = eda.importance.importance;
    std::vector<std::size_t> order(imp.variables.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return imp.values[a] > imp.values[b]; });
    std::printf("\n%-28s %10s\n", "variable", "importance");
    for (std::size_t i : order) {
        std::printf("%-28s %10.4f\n", imp.variables[i].c_str(), imp.values[i]);
    }
    std::printf("\n%-8s %-8s %10s %10s\n", "region", "key", "rows", "share %");
    for (const auto& r : partition.regions) {
        std::printf("%-8zu %-8s %10zu %10.2f\n", r.index(), r.key.to_string().c_str(), r.rows.size(), 100.0 * r.share);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"segkit: availability-partitioned customer segmentation with GA-weighted k-means"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus from a generator spec");
    std::filesystem::path synth_config, synth_out, synth_schema;
    std::optional<std::uint64_t> synth_seed;
    std::optional<std::size_t> synth_rows;
    synth->add_option("--config", synth_config, "Generator spec (JSON)")->required()->check(CLI::ExistingFile);
    synth->add_option("--out", synth_out, "Output CSV")->required();
    synth->add_option("--schema-out", synth_schema, "Also write the corpus schema here");
    synth->add_option("--seed", synth_seed, "Override the generator seed");
    synth->add_option("--rows", synth_rows, "Override the row count");

    // eda / segment share pipeline options
    std::filesystem::path pipe_config, pipe_out;
    std::optional<std::uint64_t> pipe_seed;
    std::optional<std::string> pipe_region;
    auto* eda = app.add_subcommand("eda", "Missing rates, outliers, importance and partition");
    auto* segment = app.add_subcommand("segment", "Run the full segmentation pipeline");
    for (auto* sub : {eda, segment}) {
        sub->add_option("--config", pipe_config, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", pipe_out, "Output directory (overrides the config)");
        sub->add_option("--seed", pipe_seed, "Master seed (overrides the config)");
    }
    segment->add_option("--region", pipe_region, "Cluster only this region key, e.g. 101");

    // report
    auto* report = app.add_subcommand("report", "Re-prune an existing segments.csv");
    std::filesystem::path report_in, report_out;
    PruneThresholds thresholds;
    report->add_option("--segments", report_in, "segments.csv to re-prune")->required()->check(CLI::ExistingFile);
    report->add_option("--region-threshold", thresholds.region_min_global_share, "Minimum region global share")
        ->check(CLI::Range(0.0, 1.0));
    report->add_option("--cluster-threshold", thresholds.cluster_min_global_share, "Minimum cluster global share")
        ->check(CLI::Range(0.0, 1.0));
    report->add_option("--out", report_out, "Write the re-pruned report here (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2; // usage errors exit 2, runtime errors 1
    }
    if (threads > 0) {
        omp_set_num_threads(threads);
    }

    try {
        if (*synth) {
            GeneratorSpec spec = load_generator_spec(synth_config);
            if (synth_seed) {
                spec.seed = *synth_seed;
            }
            if (synth_rows) {
                spec.n_rows = *synth_rows;
            }
            const ColumnTable table = generate_corpus(spec);
            std::ostringstream csv;
            write_csv(csv, table);
            write_text(synth_out, csv.str());
            if (!synth_schema.empty()) {
                write_text(synth_schema, schema_to_json(table.schema()).dump(2) + "\n");
            }
            std::cout << "wrote " << table.n_rows() << " rows to " << synth_out.string() << "\n";
            return 0;
        }

        if (*eda || *segment) {
            PipelineConfig cfg = load_pipeline_config(pipe_config);
            if (!pipe_out.empty()) {
                cfg.output_dir = pipe_out;
            }
            if (pipe_seed) {
                cfg.seed = *pipe_seed;
            }
            cfg.only_region = pipe_region;
            const ColumnTable table = load_pipeline_input(cfg);

            if (*eda) {
                const EdaArtifacts artifacts = run_eda(table, cfg);
                const auto split_vars = cfg.split_variables.empty() ? table.schema().split_variables() : cfg.split_variables;
                const nlohmann::json doc = {{"spec_version", 1},
                                            {"missing", to_json(artifacts.missing)},
                                            {"outliers", to_json(artifacts.outliers)},
                                            {"importance", to_json(artifacts.importance)}};
                write_text(cfg.output_dir / "eda.json", doc.dump(2) + "\n");
                const RegionPartition partition = partition_regions(table, split_vars);
                write_text(cfg.output_dir / "partition.json", to_json(partition).dump(2) + "\n");
                print_eda(artifacts, partition);
                std::cout << "\n";
                std::cout << "wrote eda.json and partition.json to " << cfg.output_dir.string() << "\n";
                return 0;
            }

            const auto start = std::chrono::steady_clock::now();
            const SegmentationResult result = run_segmentation(cfg, table);
            emit_reports(result, cfg, cfg.output_dir);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            for (const auto& r : result.regions) {
                std::cout << "region " << r.index << " [" << r.key.to_string() << "] rows=" << r.n_rows << " "
                          << to_string(r.status);
                if (r.status == RegionStatus::clustered) {
                    std::cout << " k=" << r.selection.k << " fitness=" << format_number(r.ga.best_fitness);
                }
                std::cout << "\n";
            }
            print_totals(result.report);
            std::cout << "outputs in " << cfg.output_dir.string() << " (" << format_number(std::round(secs * 10) / 10)
                      << " s)\n";
            return 0;
        }

        if (*report) {
            const SegmentReport pruned = prune_segments(read_segments_csv(report_in), thresholds);
            if (report_out.empty()) {
                std::cout << segments_to_csv(pruned);
            } else {
                write_segments_csv(pruned, report_out);
            }
            print_totals(pruned);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
