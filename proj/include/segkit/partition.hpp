#ifndef SEGKIT_PARTITION_HPP
#define SEGKIT_PARTITION_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "segkit/dataset.hpp"

namespace segkit {

/// Availability bits over the split variables, in split-variable order (1 = value present).
class RegionKey {
public:
    RegionKey() = default;
    explicit RegionKey(std::vector<std::uint8_t> bits);
    /// Parses a '0'/'1' string such as "101".
    static RegionKey parse(std::string_view text);

    std::size_t size() const noexcept { return bits_.size(); }
    bool present(std::size_t i) const { return bits_.at(i) != 0; }
    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
    /// Binary value with the first split variable as the most significant bit.
    std::uint64_t value() const noexcept;
    std::string to_string() const;

    /// 1-based region label: all-present is region 1, all-absent is region 2^m.
    std::size_t region_index() const noexcept { return (std::size_t{1} << bits_.size()) - value(); }
    static RegionKey from_region_index(std::size_t index, std::size_t n_bits);

    auto operator<=>(const RegionKey&) const = default;

private:
    std::vector<std::uint8_t> bits_;
};

struct Region {
    RegionKey key;
    std::vector<std::size_t> rows;
    double share = 0.0;

    std::size_t index() const noexcept { return key.region_index(); }
};

/// One slot per possible key (2^m of them), ordered by region index; empty slots are kept.
struct RegionPartition {
    std::vector<std::string> split_variables;
    std::size_t n_rows = 0;
    std::vector<Region> regions;
};

/// Upper bound on split variables, since the slot count grows as 2^m.
inline constexpr std::size_t kDefaultMaxSplitVariables = 5;

RegionKey region_key(const ColumnTable& table, std::size_t row, const std::vector<std::string>& split_vars);
RegionPartition partition_regions(const ColumnTable& table, const std::vector<std::string>& split_vars,
                                  std::size_t max_split_variables = kDefaultMaxSplitVariables);

nlohmann::json to_json(const RegionPartition& partition);

} // namespace segkit

#endif
