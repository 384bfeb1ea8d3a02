#include "segkit/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "segkit/dataset.hpp"
#include "segkit/error.hpp"

namespace segkit {

namespace {

std::string percent(double fraction) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", fraction * 100.0);
    return buf;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

double parse_percent(std::string_view field, std::size_t row, const std::string& column) {
    field = trim(field);
    if (!field.empty() && field.back() == '%') {
        field.remove_suffix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || v < 0.0 || v > 100.0) {
        throw ParseError("bad percentage '" + std::string(field) + "' in column " + column, row, column);
    }
    return v / 100.0;
}

std::size_t parse_index(std::string_view field, std::size_t row, const std::string& column) {
    field = trim(field);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || v == 0) {
        throw ParseError("bad index '" + std::string(field) + "' in column " + column, row, column);
    }
    return v;
}

bool parse_flag(std::string_view field, std::size_t row) {
    field = trim(field);
    if (field == "true" || field == "1") {
        return true;
    }
    if (field == "false" || field == "0") {
        return false;
    }
    throw ParseError("bad relevance flag '" + std::string(field) + "'", row, "relevant");
}

} // namespace

SegmentTotals SegmentReport::totals() const {
    SegmentTotals t;
    t.n_segments = rows.size();
    for (const auto& r : rows) {
        if (r.relevant) {
            ++t.n_relevant;
        } else {
            t.discarded_global_share += r.global_share;
        }
    }
    return t;
}

double SegmentReport::region_global_share(std::size_t region) const {
    double total = 0.0;
    for (const auto& r : rows) {
        if (r.region == region) {
            total += r.global_share;
        }
    }
    return total;
}

void PruneThresholds::validate() const {
    const auto ok = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!ok(region_min_global_share) || !ok(cluster_min_global_share)) {
        throw ContractError("pruning thresholds must lie in [0, 1]");
    }
}

SegmentReport prune_segments(SegmentReport report, const PruneThresholds& thresholds) {
    thresholds.validate();
    std::map<std::size_t, double> region_totals;
    for (const auto& r : report.rows) {
        region_totals[r.region] += r.global_share;
    }
    for (auto& r : report.rows) {
        r.relevant = region_totals[r.region] >= thresholds.region_min_global_share;
    }
    for (auto& r : report.rows) {
        if (r.relevant && r.global_share < thresholds.cluster_min_global_share) {
            r.relevant = false;
        }
    }
    return report;
}

std::string segments_to_csv(const SegmentReport& report) {
    std::ostringstream out;
    out << "region,cluster,pct_region,pct_global,relevant\n";
    for (const auto& r : report.rows) {
        out << r.region << ',' << r.cluster << ',' << percent(r.region_share) << ',' << percent(r.global_share) << ','
            << (r.relevant ? "true" : "false") << '\n';
    }
    return out.str();
}

void write_segments_csv(const SegmentReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << segments_to_csv(report);
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

SegmentReport parse_segments_csv(std::string_view csv_text) {
    std::istringstream in{std::string(csv_text)};
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("segments file has no header", 0, "");
    }
    const auto header = split_csv_record(trim(line));
    const auto find = [&](std::string_view name) -> std::ptrdiff_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == name) {
                return static_cast<std::ptrdiff_t>(i);
            }
        }
        return -1;
    };
    const std::ptrdiff_t c_region = find("region");
    const std::ptrdiff_t c_cluster = find("cluster");
    const std::ptrdiff_t c_pr = find("pct_region");
    const std::ptrdiff_t c_pg = find("pct_global");
    const std::ptrdiff_t c_rel = find("relevant");
    if (c_region < 0 || c_cluster < 0 || c_pr < 0 || c_pg < 0) {
        throw ParseError("segments header must contain region, cluster, pct_region, pct_global", 0, "");
    }

    SegmentReport report;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        ++row;
        const auto fields = split_csv_record(trim(line));
        if (fields.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()),
                             row, "");
        }
        SegmentRow r;
        r.region = parse_index(fields[c_region], row, "region");
        r.cluster = parse_index(fields[c_cluster], row, "cluster");
        r.region_share = parse_percent(fields[c_pr], row, "pct_region");
        r.global_share = parse_percent(fields[c_pg], row, "pct_global");
        if (c_rel >= 0) {
            r.relevant = parse_flag(fields[c_rel], row);
        }
        report.rows.push_back(r);
    }
    return report;
}

SegmentReport read_segments_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_segments_csv(buf.str());
}

nlohmann::json to_json(const SegmentReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"region", r.region},
                        {"cluster", r.cluster},
                        {"region_share", r.region_share},
                        {"global_share", r.global_share},
                        {"relevant", r.relevant},
                        {"n_rows", r.n_rows}});
    }
    const SegmentTotals t = report.totals();
    return {{"spec_version", 1},
            {"rows", rows},
            {"totals",
             {{"n_segments", t.n_segments}, {"n_relevant", t.n_relevant}, {"discarded_global_share", t.discarded_global_share}}}};
}

} // namespace segkit
