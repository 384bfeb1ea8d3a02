#ifndef SEGKIT_DATASET_HPP
#define SEGKIT_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

/**
 * @file dataset.hpp
 * @brief Typed columnar tables with an explicit per-cell missing mask, plus CSV and schema I/O.
 */

namespace segkit {

/// Per-row boolean flags. One byte per entry so it can be viewed as a span.
using Mask = std::vector<std::uint8_t>;

enum class ColumnKind { continuous, categorical };

std::string_view to_string(ColumnKind kind);
ColumnKind column_kind_from_string(std::string_view text);

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::continuous;
    /// Participates in the availability partition.
    bool split_variable = false;
};

/**
 * Ordered list of column descriptors. Column order defines feature indexing
 * for every downstream stage. Names are unique and at least one column is not
 * a split variable.
 */
class TableSchema {
public:
    TableSchema() = default;
    explicit TableSchema(std::vector<ColumnSpec> columns);

    const std::vector<ColumnSpec>& columns() const noexcept { return columns_; }
    std::size_t size() const noexcept { return columns_.size(); }
    const ColumnSpec& operator[](std::size_t i) const { return columns_[i]; }

    std::optional<std::size_t> find(std::string_view name) const;
    /// Throws LookupError for unknown names.
    std::size_t index_of(std::string_view name) const;

    std::vector<std::string> split_variables() const;
    std::vector<std::string> names() const;

private:
    std::vector<ColumnSpec> columns_;
};

TableSchema schema_from_json(const nlohmann::json& doc);
nlohmann::json schema_to_json(const TableSchema& schema);
TableSchema load_schema(const std::filesystem::path& path);

/**
 * Columnar table. Continuous columns store doubles, categorical columns store
 * labels, and every column carries a missing mask. A missing cell has no
 * readable value: `number()` and `label()` return nullopt for it.
 *
 * Construction is single-writer through the setters; once built, tables are
 * passed by const reference and are safe for concurrent reads.
 */
class ColumnTable {
public:
    ColumnTable() = default;
    /// Creates `n_rows` rows with every cell missing.
    ColumnTable(TableSchema schema, std::size_t n_rows);

    const TableSchema& schema() const noexcept { return schema_; }
    std::size_t n_rows() const noexcept { return n_rows_; }
    std::size_t n_columns() const noexcept { return schema_.size(); }

    bool is_missing(std::size_t col, std::size_t row) const { return columns_[col].missing[row] != 0; }
    std::optional<double> number(std::size_t col, std::size_t row) const;
    std::optional<std::string_view> label(std::size_t col, std::size_t row) const;

    /// Raw storage. Missing continuous cells hold NaN, missing labels are empty.
    std::span<const double> numbers(std::size_t col) const { return columns_[col].numbers; }
    std::span<const std::string> labels(std::size_t col) const { return columns_[col].labels; }
    std::span<const std::uint8_t> missing(std::size_t col) const { return columns_[col].missing; }

    void set_number(std::size_t col, std::size_t row, double value);
    void set_label(std::size_t col, std::size_t row, std::string value);
    void set_missing(std::size_t col, std::size_t row);

    bool operator==(const ColumnTable& other) const;

private:
    struct ColumnData {
        std::vector<double> numbers;
        std::vector<std::string> labels;
        std::vector<std::uint8_t> missing;
    };

    void check_cell(std::size_t col, std::size_t row, ColumnKind expected) const;

    TableSchema schema_;
    std::size_t n_rows_ = 0;
    std::vector<ColumnData> columns_;
};

/**
 * Parse RFC-4180 CSV. The header must contain every schema column; extra
 * columns are ignored. Empty fields and the literal `NA` are missing.
 */
ColumnTable parse_table(std::istream& csv, const TableSchema& schema);
ColumnTable parse_table(std::string_view csv_text, const TableSchema& schema);
ColumnTable load_table(const std::filesystem::path& path, const TableSchema& schema);

/// Missing cells become empty fields; numbers use shortest round-trip formatting.
void write_csv(std::ostream& out, const ColumnTable& table);

/// Entry i is 1 iff row i has a value for `column`.
Mask availability_mask(const ColumnTable& table, std::string_view column);

ColumnTable select_rows(const ColumnTable& table, std::span<const std::uint8_t> keep);
ColumnTable select_rows(const ColumnTable& table, std::span<const std::size_t> rows);

/// Shortest decimal representation that parses back to the same double.
std::string format_number(double value);

/// Split one CSV record into fields. Exposed for the report reader.
std::vector<std::string> split_csv_record(std::string_view line);
/// Quote a field if it contains separators, quotes or line breaks.
std::string quote_csv_field(std::string_view field);

} // namespace segkit

#endif
