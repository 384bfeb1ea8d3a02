#include "segkit/partition.hpp"

#include "segkit/error.hpp"

namespace segkit {

RegionKey::RegionKey(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto& b : bits_) {
        b = b ? 1 : 0;
    }
}

RegionKey RegionKey::parse(std::string_view text) {
    std::vector<std::uint8_t> bits;
    for (char c : text) {
        if (c != '0' && c != '1') {
            throw ContractError("region key '" + std::string(text) + "' must consist of 0/1 characters");
        }
        bits.push_back(c == '1' ? 1 : 0);
    }
    if (bits.empty()) {
        throw ContractError("empty region key");
    }
    return RegionKey(std::move(bits));
}

std::uint64_t RegionKey::value() const noexcept {
    std::uint64_t v = 0;
    for (auto b : bits_) {
        v = (v << 1) | b;
    }
    return v;
}

std::string RegionKey::to_string() const {
    std::string s;
    for (auto b : bits_) {
        s.push_back(b ? '1' : '0');
    }
    return s;
}

RegionKey RegionKey::from_region_index(std::size_t index, std::size_t n_bits) {
    const std::size_t slots = std::size_t{1} << n_bits;
    if (index < 1 || index > slots) {
        throw ContractError("region index out of range");
    }
    const std::size_t value = slots - index;
    std::vector<std::uint8_t> bits(n_bits);
    for (std::size_t i = 0; i < n_bits; ++i) {
        bits[i] = static_cast<std::uint8_t>((value >> (n_bits - 1 - i)) & 1U);
    }
    return RegionKey(std::move(bits));
}

namespace {

std::vector<std::size_t> resolve_split_columns(const ColumnTable& table, const std::vector<std::string>& split_vars) {
    if (split_vars.empty()) {
        throw ContractError("at least one split variable is required");
    }
    std::vector<std::size_t> cols;
    for (const auto& v : split_vars) {
        cols.push_back(table.schema().index_of(v));
    }
    return cols;
}

} // namespace

RegionKey region_key(const ColumnTable& table, std::size_t row, const std::vector<std::string>& split_vars) {
    const auto cols = resolve_split_columns(table, split_vars);
    if (row >= table.n_rows()) {
        throw ContractError("row index out of range");
    }
    std::vector<std::uint8_t> bits;
    for (auto c : cols) {
        bits.push_back(table.is_missing(c, row) ? 0 : 1);
    }
    return RegionKey(std::move(bits));
}

RegionPartition partition_regions(const ColumnTable& table, const std::vector<std::string>& split_vars,
                                  std::size_t max_split_variables) {
    const auto cols = resolve_split_columns(table, split_vars);
    if (cols.size() > max_split_variables) {
        throw ContractError("too many split variables: " + std::to_string(cols.size()) + " > " +
                            std::to_string(max_split_variables));
    }
    const std::size_t m = cols.size();
    const std::size_t slots = std::size_t{1} << m;

    RegionPartition partition;
    partition.split_variables = split_vars;
    partition.n_rows = table.n_rows();
    for (std::size_t idx = 1; idx <= slots; ++idx) {
        partition.regions.push_back({RegionKey::from_region_index(idx, m), {}, 0.0});
    }
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        std::size_t value = 0;
        for (auto c : cols) {
            value = (value << 1) | (table.is_missing(c, r) ? 0U : 1U);
        }
        partition.regions[slots - value - 1].rows.push_back(r);
    }
    if (table.n_rows() > 0) {
        for (auto& region : partition.regions) {
            region.share = static_cast<double>(region.rows.size()) / static_cast<double>(table.n_rows());
        }
    }
    return partition;
}

nlohmann::json to_json(const RegionPartition& partition) {
    nlohmann::json regions = nlohmann::json::array();
    for (const auto& r : partition.regions) {
        regions.push_back({{"region", r.index()}, {"key", r.key.to_string()}, {"rows", r.rows.size()}, {"global_share", r.share}});
    }
    return {{"spec_version", 1}, {"split_variables", partition.split_variables}, {"n_rows", partition.n_rows}, {"regions", regions}};
}

} // namespace segkit
