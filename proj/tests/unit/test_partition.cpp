#include <numeric>
#include <set>

#include "doctest.h"
#include "segkit/error.hpp"
#include "segkit/partition.hpp"
#include "test_util.hpp"

using namespace segkit;
using testutil::cat;
using testutil::cont;

namespace {

const std::vector<std::string> kSplit = {"favorite_activity", "avg_accesses", "avg_app_accesses"};

TableSchema gym_schema() {
    return TableSchema({cat("favorite_activity", true), cont("avg_accesses", true), cont("avg_app_accesses", true), cont("age")});
}

ColumnTable from_keys(const std::vector<std::string>& keys) {
    ColumnTable t(gym_schema(), keys.size());
    for (std::size_t r = 0; r < keys.size(); ++r) {
        if (keys[r][0] == '1') {
            t.set_label(0, r, "yoga");
        }
        if (keys[r][1] == '1') {
            t.set_number(1, r, 2.0);
        }
        if (keys[r][2] == '1') {
            t.set_number(2, r, 3.0);
        }
        t.set_number(3, r, 40.0);
    }
    return t;
}

} // namespace

TEST_CASE("region key bits follow split-variable presence") {
    const ColumnTable t = from_keys({"101", "111", "000"});
    CHECK(region_key(t, 0, kSplit).to_string() == "101");
    CHECK(region_key(t, 1, kSplit).to_string() == "111");
    CHECK(region_key(t, 2, kSplit).to_string() == "000");
    CHECK_THROWS_AS(region_key(t, 0, {"height"}), LookupError);
}

TEST_CASE("region index runs from all-present to all-absent") {
    CHECK(RegionKey::parse("111").region_index() == 1);
    CHECK(RegionKey::parse("110").region_index() == 2);
    CHECK(RegionKey::parse("001").region_index() == 7);
    CHECK(RegionKey::parse("000").region_index() == 8);
    for (std::size_t i = 1; i <= 8; ++i) {
        CHECK(RegionKey::from_region_index(i, 3).region_index() == i);
    }
    CHECK_THROWS(RegionKey::parse("10x"));
}

TEST_CASE("three split variables give eight slots") {
    const RegionPartition p = partition_regions(from_keys({"111", "111", "111", "000", "000", "000"}), kSplit);
    REQUIRE(p.regions.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(p.regions[i].index() == i + 1);
    }
    CHECK(p.regions[0].share == 0.5);
    CHECK(p.regions[7].share == 0.5);
    CHECK(p.regions[0].rows == std::vector<std::size_t>{0, 1, 2});
    for (std::size_t i = 1; i < 7; ++i) {
        CHECK(p.regions[i].rows.empty());
    }
}

TEST_CASE("no missing split values puts every row in region 1") {
    const RegionPartition p = partition_regions(from_keys({"111", "111", "111", "111"}), kSplit);
    CHECK(p.regions[0].rows.size() == 4);
    CHECK(p.regions[0].share == 1.0);
}

TEST_CASE("split variable count is bounded") {
    std::vector<ColumnSpec> specs;
    std::vector<std::string> names;
    for (int i = 0; i < 7; ++i) {
        names.push_back("s" + std::to_string(i));
        specs.push_back(cont(names.back(), true));
    }
    specs.push_back(cont("x"));
    const ColumnTable t(TableSchema(specs), 2);
    CHECK_THROWS_AS(partition_regions(t, names), ContractError);
    CHECK_THROWS_AS(partition_regions(t, {}), ContractError);
    CHECK(partition_regions(t, names, 7).regions.size() == 128);
}

TEST_CASE("random corpora: disjoint cover, share conservation, order equivariance") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + uniform_index(rng, 300);
        std::vector<std::string> keys(n);
        for (auto& k : keys) {
            for (int b = 0; b < 3; ++b) {
                k += uniform01(rng) < 0.5 ? '1' : '0';
            }
        }
        const RegionPartition p = partition_regions(from_keys(keys), kSplit);
        REQUIRE(p.regions.size() == 8);
        std::vector<int> seen(n, 0);
        double share = 0.0;
        for (const auto& r : p.regions) {
            share += r.share;
            for (std::size_t row : r.rows) {
                ++seen[row];
                CHECK(keys[row] == r.key.to_string());
            }
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
        CHECK(std::abs(share - 1.0) <= 1e-9);

        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::string> permuted(n);
        for (std::size_t i = 0; i < n; ++i) {
            permuted[i] = keys[perm[i]];
        }
        const RegionPartition q = partition_regions(from_keys(permuted), kSplit);
        for (std::size_t g = 0; g < 8; ++g) {
            std::set<std::size_t> a(p.regions[g].rows.begin(), p.regions[g].rows.end());
            std::set<std::size_t> b;
            for (std::size_t row : q.regions[g].rows) {
                b.insert(perm[row]);
            }
            CHECK(a == b);
        }
    }
}

TEST_CASE("partition JSON lists every slot") {
    const auto doc = to_json(partition_regions(from_keys({"101", "010"}), kSplit));
    CHECK(doc["spec_version"] == 1);
    REQUIRE(doc["regions"].size() == 8);
    CHECK(doc["regions"][0]["key"] == "111");
    CHECK(doc["regions"][2]["rows"] == 1);
}
