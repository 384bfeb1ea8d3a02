#include "segkit/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "segkit/error.hpp"

namespace segkit {

std::string_view to_string(ColumnKind kind) {
    return kind == ColumnKind::continuous ? "continuous" : "categorical";
}

ColumnKind column_kind_from_string(std::string_view text) {
    if (text == "continuous") {
        return ColumnKind::continuous;
    }
    if (text == "categorical") {
        return ColumnKind::categorical;
    }
    throw SchemaError("unknown column kind '" + std::string(text) + "'");
}

TableSchema::TableSchema(std::vector<ColumnSpec> columns) : columns_(std::move(columns)) {
    std::unordered_set<std::string> seen;
    bool has_feature = false;
    for (const auto& c : columns_) {
        if (c.name.empty()) {
            throw SchemaError("column with empty name");
        }
        if (!seen.insert(c.name).second) {
            throw SchemaError("duplicate column name '" + c.name + "'");
        }
        has_feature = has_feature || !c.split_variable;
    }
    if (!has_feature) {
        throw SchemaError("schema needs at least one column that is not a split variable");
    }
}

std::optional<std::size_t> TableSchema::find(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t TableSchema::index_of(std::string_view name) const {
    if (auto i = find(name)) {
        return *i;
    }
    throw LookupError("unknown column '" + std::string(name) + "'");
}

std::vector<std::string> TableSchema::split_variables() const {
    std::vector<std::string> out;
    for (const auto& c : columns_) {
        if (c.split_variable) {
            out.push_back(c.name);
        }
    }
    return out;
}

std::vector<std::string> TableSchema::names() const {
    std::vector<std::string> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) {
        out.push_back(c.name);
    }
    return out;
}

TableSchema schema_from_json(const nlohmann::json& doc) {
    const nlohmann::json& cols = doc.is_array() ? doc : doc.at("columns");
    std::vector<ColumnSpec> specs;
    try {
        for (const auto& c : cols) {
            ColumnSpec spec;
            spec.name = c.at("name").get<std::string>();
            spec.kind = column_kind_from_string(c.at("kind").get<std::string>());
            spec.split_variable = c.value("split_variable", false);
            specs.push_back(std::move(spec));
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed schema document: ") + e.what());
    }
    return TableSchema(std::move(specs));
}

nlohmann::json schema_to_json(const TableSchema& schema) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : schema.columns()) {
        cols.push_back({{"name", c.name}, {"kind", to_string(c.kind)}, {"split_variable", c.split_variable}});
    }
    return {{"spec_version", 1}, {"columns", cols}};
}

TableSchema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open schema file " + path.string());
    }
    try {
        return schema_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("schema file " + path.string() + " is not valid JSON: " + e.what());
    }
}

ColumnTable::ColumnTable(TableSchema schema, std::size_t n_rows)
    : schema_(std::move(schema)), n_rows_(n_rows), columns_(schema_.size()) {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        auto& data = columns_[c];
        data.missing.assign(n_rows, 1);
        if (schema_[c].kind == ColumnKind::continuous) {
            data.numbers.assign(n_rows, std::numeric_limits<double>::quiet_NaN());
        } else {
            data.labels.assign(n_rows, std::string());
        }
    }
}

void ColumnTable::check_cell(std::size_t col, std::size_t row, ColumnKind expected) const {
    if (col >= columns_.size() || row >= n_rows_) {
        throw ContractError("cell index out of range");
    }
    if (schema_[col].kind != expected) {
        throw ContractError("column '" + schema_[col].name + "' is " + std::string(to_string(schema_[col].kind)));
    }
}

std::optional<double> ColumnTable::number(std::size_t col, std::size_t row) const {
    check_cell(col, row, ColumnKind::continuous);
    if (columns_[col].missing[row]) {
        return std::nullopt;
    }
    return columns_[col].numbers[row];
}

std::optional<std::string_view> ColumnTable::label(std::size_t col, std::size_t row) const {
    check_cell(col, row, ColumnKind::categorical);
    if (columns_[col].missing[row]) {
        return std::nullopt;
    }
    return std::string_view(columns_[col].labels[row]);
}

void ColumnTable::set_number(std::size_t col, std::size_t row, double value) {
    check_cell(col, row, ColumnKind::continuous);
    if (!std::isfinite(value)) {
        throw ContractError("continuous cells must be finite");
    }
    columns_[col].numbers[row] = value;
    columns_[col].missing[row] = 0;
}

void ColumnTable::set_label(std::size_t col, std::size_t row, std::string value) {
    check_cell(col, row, ColumnKind::categorical);
    if (value.empty() || value == "NA") {
        throw ContractError("label collides with a missing sentinel");
    }
    columns_[col].labels[row] = std::move(value);
    columns_[col].missing[row] = 0;
}

void ColumnTable::set_missing(std::size_t col, std::size_t row) {
    if (col >= columns_.size() || row >= n_rows_) {
        throw ContractError("cell index out of range");
    }
    auto& data = columns_[col];
    data.missing[row] = 1;
    if (schema_[col].kind == ColumnKind::continuous) {
        data.numbers[row] = std::numeric_limits<double>::quiet_NaN();
    } else {
        data.labels[row].clear();
    }
}

bool ColumnTable::operator==(const ColumnTable& other) const {
    if (n_rows_ != other.n_rows_ || schema_.size() != other.schema_.size()) {
        return false;
    }
    for (std::size_t c = 0; c < schema_.size(); ++c) {
        const auto& a = schema_[c];
        const auto& b = other.schema_[c];
        if (a.name != b.name || a.kind != b.kind || a.split_variable != b.split_variable) {
            return false;
        }
        if (columns_[c].missing != other.columns_[c].missing) {
            return false;
        }
        for (std::size_t r = 0; r < n_rows_; ++r) {
            if (columns_[c].missing[r]) {
                continue;
            }
            if (a.kind == ColumnKind::continuous) {
                if (columns_[c].numbers[r] != other.columns_[c].numbers[r]) {
                    return false;
                }
            } else if (columns_[c].labels[r] != other.columns_[c].labels[r]) {
                return false;
            }
        }
    }
    return true;
}

namespace {

// Splits CSV text into records of fields, honoring quotes that may span lines.
class CsvReader {
public:
    explicit CsvReader(std::string_view text) : text_(text) {}

    bool next(std::vector<std::string>& fields) {
        fields.clear();
        if (pos_ >= text_.size()) {
            return false;
        }
        std::string field;
        bool in_quotes = false;
        while (pos_ < text_.size()) {
            char c = text_[pos_++];
            if (in_quotes) {
                if (c == '"') {
                    if (pos_ < text_.size() && text_[pos_] == '"') {
                        field.push_back('"');
                        ++pos_;
                    } else {
                        in_quotes = false;
                    }
                } else {
                    field.push_back(c);
                }
            } else if (c == '"') {
                in_quotes = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else if (c == '\n' || c == '\r') {
                if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') {
                    ++pos_;
                }
                break;
            } else {
                field.push_back(c);
            }
        }
        fields.push_back(std::move(field));
        return true;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

bool is_missing_sentinel(std::string_view field) {
    return field.empty() || field == "NA";
}

} // namespace

std::vector<std::string> split_csv_record(std::string_view line) {
    CsvReader reader(line);
    std::vector<std::string> fields;
    reader.next(fields);
    return fields;
}

std::string quote_csv_field(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_number(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

ColumnTable parse_table(std::string_view csv_text, const TableSchema& schema) {
    CsvReader reader(csv_text);
    std::vector<std::string> header;
    if (!reader.next(header) || (header.size() == 1 && header[0].empty())) {
        throw SchemaError("CSV has no header row");
    }
    if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) {
        header[0].erase(0, 3);
    }

    std::vector<std::size_t> source(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
        bool found = false;
        for (std::size_t h = 0; h < header.size(); ++h) {
            if (header[h] == schema[c].name) {
                source[c] = h;
                found = true;
                break;
            }
        }
        if (!found) {
            throw SchemaError("CSV header is missing schema column '" + schema[c].name + "'");
        }
    }

    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) {
            continue; // blank line
        }
        if (fields.size() != header.size()) {
            throw ParseError("row " + std::to_string(records.size() + 1) + " has " + std::to_string(fields.size()) +
                                 " fields, header has " + std::to_string(header.size()),
                             records.size() + 1, "");
        }
        records.push_back(fields);
    }

    ColumnTable table(schema, records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        for (std::size_t c = 0; c < schema.size(); ++c) {
            const std::string& field = records[r][source[c]];
            if (is_missing_sentinel(field)) {
                continue;
            }
            if (schema[c].kind == ColumnKind::continuous) {
                double value = 0.0;
                const char* first = field.data();
                const char* last = first + field.size();
                if (*first == '+') {
                    ++first;
                }
                auto res = std::from_chars(first, last, value);
                if (res.ec != std::errc() || res.ptr != last || !std::isfinite(value)) {
                    throw ParseError("row " + std::to_string(r + 1) + ", column '" + schema[c].name +
                                         "': cannot parse '" + field + "' as a number",
                                     r + 1, schema[c].name);
                }
                table.set_number(c, r, value);
            } else {
                table.set_label(c, r, field);
            }
        }
    }
    return table;
}

ColumnTable parse_table(std::istream& csv, const TableSchema& schema) {
    std::ostringstream buffer;
    buffer << csv.rdbuf();
    return parse_table(std::string_view(buffer.str()), schema);
}

ColumnTable load_table(const std::filesystem::path& path, const TableSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SchemaError("cannot open data file " + path.string());
    }
    return parse_table(in, schema);
}

void write_csv(std::ostream& out, const ColumnTable& table) {
    const auto& schema = table.schema();
    for (std::size_t c = 0; c < schema.size(); ++c) {
        out << (c ? "," : "") << quote_csv_field(schema[c].name);
    }
    out << '\n';
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        for (std::size_t c = 0; c < schema.size(); ++c) {
            if (c) {
                out << ',';
            }
            if (table.is_missing(c, r)) {
                continue;
            }
            if (schema[c].kind == ColumnKind::continuous) {
                out << format_number(table.numbers(c)[r]);
            } else {
                out << quote_csv_field(table.labels(c)[r]);
            }
        }
        out << '\n';
    }
}

Mask availability_mask(const ColumnTable& table, std::string_view column) {
    std::size_t c = table.schema().index_of(column);
    auto missing = table.missing(c);
    Mask out(missing.size());
    for (std::size_t i = 0; i < missing.size(); ++i) {
        out[i] = missing[i] ? 0 : 1;
    }
    return out;
}

ColumnTable select_rows(const ColumnTable& table, std::span<const std::size_t> rows) {
    ColumnTable out(table.schema(), rows.size());
    for (std::size_t c = 0; c < table.n_columns(); ++c) {
        const bool continuous = table.schema()[c].kind == ColumnKind::continuous;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::size_t r = rows[i];
            if (r >= table.n_rows()) {
                throw ContractError("row index out of range");
            }
            if (table.is_missing(c, r)) {
                continue;
            }
            if (continuous) {
                out.set_number(c, i, table.numbers(c)[r]);
            } else {
                out.set_label(c, i, table.labels(c)[r]);
            }
        }
    }
    return out;
}

ColumnTable select_rows(const ColumnTable& table, std::span<const std::uint8_t> keep) {
    if (keep.size() != table.n_rows()) {
        throw ContractError("keep mask has " + std::to_string(keep.size()) + " entries, table has " +
                            std::to_string(table.n_rows()) + " rows");
    }
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (keep[i]) {
            rows.push_back(i);
        }
    }
    return select_rows(table, std::span<const std::size_t>(rows));
}

} // namespace segkit
