#include "segkit/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "segkit/error.hpp"
#include "segkit/rng.hpp"

namespace segkit {

namespace {

constexpr std::uint64_t kRowStream = 0x524f5753ULL;     // "ROWS"
constexpr std::uint64_t kCentreStream = 0x43454e54ULL;  // "CENT"

std::vector<std::size_t> split_column_indices(const GeneratorSpec& spec) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < spec.columns.size(); ++j) {
        if (spec.columns[j].spec.split_variable) {
            out.push_back(j);
        }
    }
    return out;
}

bool valid_rate(double r) { return r >= 0.0 && r <= 1.0; }

DistributionKind distribution_kind_from_string(const std::string& s) {
    if (s == "heavy_tail" || s == "lognormal") {
        return DistributionKind::heavy_tail;
    }
    if (s == "bounded_normal" || s == "normal") {
        return DistributionKind::bounded_normal;
    }
    if (s == "categorical") {
        return DistributionKind::categorical;
    }
    throw SchemaError("unknown distribution type '" + s + "'");
}

std::uint64_t pattern_value(const std::string& key) {
    std::uint64_t v = 0;
    for (char c : key) {
        v = (v << 1) | (c == '1' ? 1U : 0U);
    }
    return v;
}

// Position of each planted cluster along one column, evenly spaced in [-1, 1]
// and shuffled per (pattern, column) so clusters differ in a different order on each column.
std::vector<double> cluster_offsets(std::uint64_t seed, const std::string& pattern, std::size_t column, std::size_t k) {
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, kCentreStream, pattern_value(pattern) + (std::uint64_t{1} << 32) * pattern.size(), column));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> out(k, 0.0);
    if (k > 1) {
        for (std::size_t c = 0; c < k; ++c) {
            out[c] = -1.0 + 2.0 * static_cast<double>(order[c]) / static_cast<double>(k - 1);
        }
    }
    return out;
}

std::size_t draw_from(const std::vector<double>& cumulative, double u) {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u * cumulative.back());
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

} // namespace

TableSchema GeneratorSpec::schema() const {
    std::vector<ColumnSpec> specs;
    for (const auto& c : columns) {
        specs.push_back(c.spec);
    }
    return TableSchema(std::move(specs));
}

std::size_t GeneratorSpec::planted_clusters(const std::string& pattern) const {
    if (auto it = clusters_by_pattern.find(pattern); it != clusters_by_pattern.end()) {
        return it->second;
    }
    return default_clusters;
}

double GeneratorSpec::target_missing_rate(std::size_t column) const {
    const auto& col = columns.at(column);
    if (!col.spec.split_variable || split_patterns.empty()) {
        return col.missing_rate;
    }
    auto splits = split_column_indices(*this);
    std::size_t bit = static_cast<std::size_t>(std::find(splits.begin(), splits.end(), column) - splits.begin());
    double total = 0.0;
    double absent = 0.0;
    for (const auto& p : split_patterns) {
        total += p.probability;
        if (p.key[bit] == '0') {
            absent += p.probability;
        }
    }
    return absent / total;
}

void GeneratorSpec::validate() const {
    if (n_rows == 0) {
        throw ContractError("generator needs at least one row");
    }
    schema(); // name uniqueness and the non-split requirement
    if (default_clusters == 0) {
        throw ContractError("planted_clusters must be at least 1");
    }
    for (const auto& [key, k] : clusters_by_pattern) {
        if (k == 0) {
            throw ContractError("planted_clusters for pattern " + key + " must be at least 1");
        }
    }
    if (!(outlier_factor > 0.0) || !std::isfinite(outlier_factor)) {
        throw ContractError("outlier_factor must be positive");
    }
    for (const auto& c : columns) {
        if (!valid_rate(c.missing_rate) || !valid_rate(c.outlier_rate)) {
            throw ContractError("column '" + c.spec.name + "': rates must lie in [0, 1]");
        }
        const auto& d = c.distribution;
        const bool categorical_dist = d.kind == DistributionKind::categorical;
        if (categorical_dist != (c.spec.kind == ColumnKind::categorical)) {
            throw SchemaError("column '" + c.spec.name + "': distribution does not match the column kind");
        }
        if (categorical_dist) {
            if (d.categories.empty() || d.categories.size() != d.frequencies.size()) {
                throw SchemaError("column '" + c.spec.name + "': categories and frequencies must be non-empty and equal length");
            }
            double sum = 0.0;
            for (double f : d.frequencies) {
                if (!(f >= 0.0)) {
                    throw ContractError("column '" + c.spec.name + "': negative frequency");
                }
                sum += f;
            }
            if (!(sum > 0.0)) {
                throw ContractError("column '" + c.spec.name + "': frequencies sum to zero");
            }
            for (const auto& label : d.categories) {
                if (label.empty() || label == "NA") {
                    throw SchemaError("column '" + c.spec.name + "': category collides with a missing sentinel");
                }
            }
        } else if (!(d.scale >= 0.0) || !(d.lo <= d.hi)) {
            throw ContractError("column '" + c.spec.name + "': invalid scale or bounds");
        }
    }
    if (!split_patterns.empty()) {
        const std::size_t m = split_column_indices(*this).size();
        double total = 0.0;
        for (const auto& p : split_patterns) {
            if (p.key.size() != m || p.key.find_first_not_of("01") != std::string::npos) {
                throw ContractError("split pattern '" + p.key + "' must have one 0/1 bit per split column");
            }
            if (!(p.probability >= 0.0)) {
                throw ContractError("split pattern probabilities must be non-negative");
            }
            total += p.probability;
        }
        if (!(total > 0.0)) {
            throw ContractError("split pattern probabilities sum to zero");
        }
    }
}

GeneratorSpec generator_spec_from_json(const nlohmann::json& doc) {
    GeneratorSpec spec;
    try {
        spec.n_rows = doc.at("n_rows").get<std::size_t>();
        spec.seed = doc.value("seed", std::uint64_t{0});
        spec.outlier_factor = doc.value("outlier_factor", 10.0);
        const bool has_patterns = doc.contains("split_patterns");
        for (const auto& c : doc.at("columns")) {
            GeneratedColumn col;
            col.spec.name = c.at("name").get<std::string>();
            col.spec.kind = column_kind_from_string(c.at("kind").get<std::string>());
            col.spec.split_variable = c.value("split_variable", false);
            if (col.spec.split_variable && has_patterns && c.contains("missing_rate")) {
                throw SchemaError("column '" + col.spec.name + "': missing_rate of a split column is implied by split_patterns");
            }
            col.missing_rate = c.value("missing_rate", 0.0);
            col.outlier_rate = c.value("outlier_rate", 0.0);
            col.separation = c.value("separation", 2.0);
            const auto& d = c.at("distribution");
            col.distribution.kind = distribution_kind_from_string(d.at("type").get<std::string>());
            if (col.distribution.kind == DistributionKind::categorical) {
                col.distribution.categories = d.at("categories").get<std::vector<std::string>>();
                col.distribution.frequencies = d.at("frequencies").get<std::vector<double>>();
            } else {
                col.distribution.location = d.value("location", 0.0);
                col.distribution.scale = d.value("scale", 1.0);
                col.distribution.lo = d.value("lo", -1e300);
                col.distribution.hi = d.value("hi", 1e300);
            }
            spec.columns.push_back(std::move(col));
        }
        if (has_patterns) {
            for (const auto& [key, p] : doc.at("split_patterns").items()) {
                spec.split_patterns.push_back({key, p.get<double>()});
            }
        }
        if (doc.contains("planted_clusters")) {
            const auto& pc = doc.at("planted_clusters");
            if (pc.is_number()) {
                spec.default_clusters = pc.get<std::size_t>();
            } else {
                spec.default_clusters = pc.value("default", std::size_t{3});
                if (pc.contains("by_pattern")) {
                    for (const auto& [key, k] : pc.at("by_pattern").items()) {
                        spec.clusters_by_pattern[key] = k.get<std::size_t>();
                    }
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed generator spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

GeneratorSpec load_generator_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open generator spec " + path.string());
    }
    try {
        return generator_spec_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("generator spec " + path.string() + " is not valid JSON: " + e.what());
    }
}

SyntheticCorpus generate_corpus_with_truth(const GeneratorSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n_rows;
    const auto splits = split_column_indices(spec);
    const std::size_t m = splits.size();

    SyntheticCorpus out{ColumnTable(spec.schema(), n), std::vector<std::string>(n), std::vector<int>(n)};

    // Row-level draws: split presence pattern, then planted cluster.
    {
        Rng rng(derive_seed(spec.seed, kRowStream));
        std::vector<double> cumulative;
        for (const auto& p : spec.split_patterns) {
            cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + p.probability);
        }
        for (std::size_t r = 0; r < n; ++r) {
            std::string key(m, '1');
            if (!spec.split_patterns.empty()) {
                key = spec.split_patterns[draw_from(cumulative, uniform01(rng))].key;
            } else {
                for (std::size_t b = 0; b < m; ++b) {
                    key[b] = uniform01(rng) < spec.columns[splits[b]].missing_rate ? '0' : '1';
                }
            }
            out.cluster[r] = static_cast<int>(uniform_index(rng, spec.planted_clusters(key)));
            out.pattern[r] = std::move(key);
        }
    }

    // Cluster offsets per (pattern, column), computed up front.
    std::map<std::string, std::vector<std::vector<double>>> offsets;
    for (const auto& key : out.pattern) {
        if (offsets.count(key)) {
            continue;
        }
        std::vector<std::vector<double>> per_column;
        for (std::size_t j = 0; j < spec.columns.size(); ++j) {
            per_column.push_back(cluster_offsets(spec.seed, key, j, spec.planted_clusters(key)));
        }
        offsets.emplace(key, std::move(per_column));
    }

    ColumnTable& table = out.table;
    const auto n_cols = static_cast<std::ptrdiff_t>(spec.columns.size());

    // Each column owns an independent substream, so columns can be filled concurrently.
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t jj = 0; jj < n_cols; ++jj) {
        const auto j = static_cast<std::size_t>(jj);
        const auto& col = spec.columns[j];
        const auto& dist = col.distribution;
        Rng rng(derive_seed(spec.seed, j + 1));
        std::normal_distribution<double> normal(0.0, 1.0);

        std::size_t split_bit = m;
        if (col.spec.split_variable) {
            split_bit = static_cast<std::size_t>(std::find(splits.begin(), splits.end(), j) - splits.begin());
        }

        std::vector<double> cumulative;
        if (dist.kind == DistributionKind::categorical) {
            double acc = 0.0;
            for (double f : dist.frequencies) {
                cumulative.push_back(acc += f);
            }
        }

        for (std::size_t r = 0; r < n; ++r) {
            bool present;
            if (col.spec.split_variable) {
                present = out.pattern[r][split_bit] == '1';
            } else {
                present = !(uniform01(rng) < col.missing_rate);
            }
            if (!present) {
                continue;
            }
            const double offset = offsets.at(out.pattern[r])[j][static_cast<std::size_t>(out.cluster[r])];
            if (dist.kind == DistributionKind::categorical) {
                std::size_t idx = draw_from(cumulative, uniform01(rng));
                // Planted structure: each cluster rotates the frequency ranking.
                if (col.separation > 0.0) {
                    const std::size_t c = dist.categories.size();
                    const auto shift = static_cast<std::size_t>(std::lround((offset + 1.0) * 0.5 * static_cast<double>(c - 1)));
                    idx = (idx + shift) % c;
                }
                table.set_label(j, r, dist.categories[idx]);
                continue;
            }
            const bool outlier = uniform01(rng) < col.outlier_rate;
            const double centre = dist.location + col.separation * dist.scale * offset;
            double value = centre + dist.scale * normal(rng);
            if (dist.kind == DistributionKind::heavy_tail) {
                value = std::exp(value);
            } else {
                value = std::clamp(value, dist.lo, dist.hi);
            }
            if (outlier) {
                value *= spec.outlier_factor;
            }
            table.set_number(j, r, value);
        }
    }
    return out;
}

ColumnTable generate_corpus(const GeneratorSpec& spec) {
    return generate_corpus_with_truth(spec).table;
}

} // namespace segkit
