#include "segkit/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "segkit/error.hpp"

namespace segkit {

NormalizerModel NormalizerModel::fit(std::span<const double> values, const DenseInterval& interval) {
    if (values.size() < 2) {
        throw ContractError("normalizer needs at least two values");
    }
    if (!(interval.lo <= interval.hi)) {
        throw ContractError("normalizer interval has lo > hi");
    }
    NormalizerModel m;
    m.column_ = interval.column;
    m.lo_ = interval.lo;
    m.hi_ = interval.hi;
    m.n_ = values.size();

    std::vector<double> clamped;
    clamped.reserve(values.size());
    bool constant = true;
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ContractError("normalizer training values must be finite");
        }
        constant = constant && v == values.front();
        clamped.push_back(std::clamp(v, m.lo_, m.hi_));
    }
    std::sort(clamped.begin(), clamped.end());
    for (std::size_t i = 0; i < clamped.size(); ++i) {
        if (m.values_.empty() || clamped[i] != m.values_.back()) {
            m.values_.push_back(clamped[i]);
            m.cumulative_.push_back(i + 1);
        } else {
            m.cumulative_.back() = i + 1;
        }
    }
    m.y_min_ = m.raw_score(clamped.front());
    m.y_max_ = m.raw_score(clamped.back());
    m.degenerate_ = constant || !(m.y_max_ > m.y_min_);
    return m;
}

NormalizerModel NormalizerModel::constant(std::string column, double value) {
    NormalizerModel m;
    m.column_ = std::move(column);
    m.lo_ = value;
    m.hi_ = value;
    m.values_ = {value};
    m.cumulative_ = {1};
    m.n_ = 1;
    m.degenerate_ = true;
    return m;
}

double NormalizerModel::raw_score(double x) const {
    x = std::clamp(x, lo_, hi_);
    auto it = std::lower_bound(values_.begin(), values_.end(), x);
    const auto idx = static_cast<std::size_t>(it - values_.begin());
    const std::size_t less = idx > 0 ? cumulative_[idx - 1] : 0;
    const std::size_t equal = (it != values_.end() && *it == x) ? cumulative_[idx] - less : 0;
    return (static_cast<double>(less) + 0.5 * static_cast<double>(equal)) / static_cast<double>(n_);
}

double NormalizerModel::apply(double x) const {
    if (!std::isfinite(x)) {
        throw ContractError("cannot normalize a non-finite value");
    }
    if (degenerate_) {
        return 0.5;
    }
    return std::clamp((raw_score(x) - y_min_) / (y_max_ - y_min_), 0.0, 1.0);
}

nlohmann::json NormalizerModel::to_json() const {
    return {{"column", column_}, {"lo", lo_},         {"hi", hi_},           {"n", n_},
            {"values", values_}, {"cumulative", cumulative_}, {"y_min", y_min_}, {"y_max", y_max_},
            {"degenerate", degenerate_}};
}

NormalizerModel NormalizerModel::from_json(const nlohmann::json& doc) {
    NormalizerModel m;
    m.column_ = doc.at("column").get<std::string>();
    m.lo_ = doc.at("lo").get<double>();
    m.hi_ = doc.at("hi").get<double>();
    m.n_ = doc.at("n").get<std::size_t>();
    m.values_ = doc.at("values").get<std::vector<double>>();
    m.cumulative_ = doc.at("cumulative").get<std::vector<std::size_t>>();
    m.y_min_ = doc.at("y_min").get<double>();
    m.y_max_ = doc.at("y_max").get<double>();
    m.degenerate_ = doc.at("degenerate").get<bool>();
    if (m.values_.size() != m.cumulative_.size() || m.values_.empty()) {
        throw SchemaError("normalizer document has inconsistent rank tables");
    }
    return m;
}

EncoderModel EncoderModel::fit(std::span<const std::string> labels, std::string column) {
    if (labels.empty()) {
        throw ContractError("label encoder needs at least one label");
    }
    std::map<std::string, std::size_t> freq;
    for (const auto& l : labels) {
        ++freq[l];
    }
    // map iteration is lexicographic, and stable_sort keeps that order among equal counts
    std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    EncoderModel m;
    m.column_ = std::move(column);
    for (auto& [label, count] : ranked) {
        m.labels_.push_back(label);
    }
    return m;
}

std::optional<std::size_t> EncoderModel::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == label) {
            return i;
        }
    }
    return std::nullopt;
}

double EncoderModel::encode(std::string_view label, std::size_t& unseen) const {
    auto idx = index_of(label);
    if (!idx) {
        ++unseen;
        return 1.0;
    }
    if (labels_.size() == 1) {
        return 0.0;
    }
    return static_cast<double>(*idx) / static_cast<double>(labels_.size() - 1);
}

double EncoderModel::encode(std::string_view label) const {
    std::size_t ignored = 0;
    return encode(label, ignored);
}

nlohmann::json EncoderModel::to_json() const {
    return {{"column", column_}, {"labels", labels_}};
}

EncoderModel EncoderModel::from_json(const nlohmann::json& doc) {
    EncoderModel m;
    m.column_ = doc.at("column").get<std::string>();
    m.labels_ = doc.at("labels").get<std::vector<std::string>>();
    if (m.labels_.empty()) {
        throw SchemaError("encoder document has no labels");
    }
    return m;
}

namespace {

std::vector<double> observed_numbers(const ColumnTable& table, std::size_t c) {
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

std::vector<std::string> observed_labels(const ColumnTable& table, std::size_t c) {
    std::vector<std::string> out;
    auto labels = table.labels(c);
    auto missing = table.missing(c);
    for (std::size_t r = 0; r < labels.size(); ++r) {
        if (!missing[r]) {
            out.push_back(labels[r]);
        }
    }
    return out;
}

} // namespace

ImputeResult impute_missing(const ColumnTable& region_table) {
    ImputeResult result{region_table, {}};
    ColumnTable& table = result.table;
    for (std::size_t c = 0; c < table.n_columns(); ++c) {
        const auto& spec = table.schema()[c];
        auto missing = region_table.missing(c);
        const auto n_missing = static_cast<std::size_t>(std::count(missing.begin(), missing.end(), std::uint8_t{1}));
        if (n_missing == 0) {
            continue;
        }
        if (n_missing == table.n_rows()) {
            result.dropped.push_back(spec.name);
            continue;
        }
        if (spec.kind == ColumnKind::continuous) {
            auto values = observed_numbers(region_table, c);
            std::sort(values.begin(), values.end());
            const double median = quantile_sorted(values, 0.5);
            for (std::size_t r = 0; r < table.n_rows(); ++r) {
                if (missing[r]) {
                    table.set_number(c, r, median);
                }
            }
        } else {
            std::map<std::string, std::size_t> freq;
            for (auto& l : observed_labels(region_table, c)) {
                ++freq[l];
            }
            std::string mode;
            std::size_t best = 0;
            for (const auto& [label, count] : freq) {
                if (count > best) {
                    best = count;
                    mode = label;
                }
            }
            for (std::size_t r = 0; r < table.n_rows(); ++r) {
                if (missing[r]) {
                    table.set_label(c, r, mode);
                }
            }
        }
    }
    return result;
}

std::vector<std::string> TransformBundle::feature_names() const {
    std::vector<std::string> out;
    for (const auto& c : columns) {
        out.push_back(c.column);
    }
    return out;
}

FeatureMatrix TransformBundle::apply(const ColumnTable& table, std::size_t* unseen) const {
    FeatureMatrix out(table.n_rows(), columns.size());
    std::size_t unseen_count = 0;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const auto& t = columns[j];
        const std::size_t c = table.schema().index_of(t.column);
        if (table.schema()[c].kind != t.kind) {
            throw SchemaError("column '" + t.column + "' changed kind since the transform was fitted");
        }
        auto missing = table.missing(c);
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            if (missing[r]) {
                throw ContractError("feature column '" + t.column + "' still has missing cells");
            }
            out(r, j) = t.kind == ColumnKind::continuous ? t.normalizer.apply(table.numbers(c)[r])
                                                         : t.encoder.encode(table.labels(c)[r], unseen_count);
        }
    }
    if (unseen) {
        *unseen += unseen_count;
    }
    return out;
}

nlohmann::json TransformBundle::to_json() const {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : columns) {
        nlohmann::json entry = {{"column", c.column}, {"kind", to_string(c.kind)}};
        if (c.kind == ColumnKind::continuous) {
            entry["normalizer"] = c.normalizer.to_json();
        } else {
            entry["encoder"] = c.encoder.to_json();
        }
        cols.push_back(std::move(entry));
    }
    return {{"spec_version", 1}, {"columns", cols}};
}

TransformBundle TransformBundle::from_json(const nlohmann::json& doc) {
    TransformBundle bundle;
    for (const auto& entry : doc.at("columns")) {
        ColumnTransform t;
        t.column = entry.at("column").get<std::string>();
        t.kind = column_kind_from_string(entry.at("kind").get<std::string>());
        if (t.kind == ColumnKind::continuous) {
            t.normalizer = NormalizerModel::from_json(entry.at("normalizer"));
        } else {
            t.encoder = EncoderModel::from_json(entry.at("encoder"));
        }
        bundle.columns.push_back(std::move(t));
    }
    return bundle;
}

TransformBundle fit_transforms(const ColumnTable& region_table, const std::vector<std::string>& features,
                               double central_mass) {
    TransformBundle bundle;
    for (const auto& name : features) {
        const std::size_t c = region_table.schema().index_of(name);
        ColumnTransform t;
        t.column = name;
        t.kind = region_table.schema()[c].kind;
        if (t.kind == ColumnKind::continuous) {
            auto values = observed_numbers(region_table, c);
            if (values.empty()) {
                throw ContractError("feature '" + name + "' has no observed values in this region");
            }
            if (values.size() == 1) {
                t.normalizer = NormalizerModel::constant(name, values.front());
            } else {
                DenseInterval interval;
                if (values.size() >= 10) {
                    interval = dense_interval(values, central_mass);
                } else {
                    auto [mn, mx] = std::minmax_element(values.begin(), values.end());
                    interval.lo = *mn;
                    interval.hi = *mx;
                }
                interval.column = name;
                t.normalizer = NormalizerModel::fit(values, interval);
            }
        } else {
            auto labels = observed_labels(region_table, c);
            if (labels.empty()) {
                throw ContractError("feature '" + name + "' has no observed values in this region");
            }
            t.encoder = EncoderModel::fit(labels, name);
        }
        bundle.columns.push_back(std::move(t));
    }
    return bundle;
}

RegionFeatures prepare_region(const ColumnTable& region_table, const std::vector<std::string>& candidates,
                              double central_mass) {
    RegionFeatures out;
    ImputeResult imputed = impute_missing(region_table);
    for (const auto& name : candidates) {
        if (std::find(imputed.dropped.begin(), imputed.dropped.end(), name) != imputed.dropped.end()) {
            out.dropped.push_back(name);
        } else {
            out.features.push_back(name);
        }
    }
    out.transforms = fit_transforms(region_table, out.features, central_mass);
    out.matrix = out.transforms.apply(imputed.table);
    return out;
}

} // namespace segkit
