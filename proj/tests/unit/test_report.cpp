#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "segkit/error.hpp"
#include "segkit/report.hpp"
#include "segkit/rng.hpp"

using namespace segkit;

namespace {

SegmentReport published() { return read_segments_csv(std::filesystem::path(SEGKIT_TEST_DATA) / "published_segments.csv"); }

SegmentReport random_report(Rng& rng) {
    SegmentReport r;
    const std::size_t regions = 1 + uniform_index(rng, 8);
    std::vector<double> mass(regions);
    double total = 0.0;
    for (double& m : mass) {
        m = std::pow(uniform01(rng), 3.0);
        total += m;
    }
    for (std::size_t g = 0; g < regions; ++g) {
        const std::size_t k = 1 + uniform_index(rng, 7);
        std::vector<double> parts(k);
        double sum = 0.0;
        for (double& p : parts) {
            p = uniform01(rng) + 0.01;
            sum += p;
        }
        for (std::size_t c = 0; c < k; ++c) {
            SegmentRow row;
            row.region = g + 1;
            row.cluster = c + 1;
            row.region_share = parts[c] / sum;
            row.global_share = row.region_share * mass[g] / total;
            r.rows.push_back(row);
        }
    }
    return r;
}

} // namespace

TEST_CASE("published segment table prunes to 26 relevant segments") {
    const SegmentReport pruned = prune_segments(published(), PruneThresholds{});
    const SegmentTotals t = pruned.totals();
    CHECK(t.n_segments == 42);
    CHECK(t.n_relevant == 26);
    CHECK(t.discarded_global_share > 0.043);
    CHECK(t.discarded_global_share < 0.045);
    CHECK(t.discarded_global_share == doctest::Approx(0.0443).epsilon(1e-9));
}

TEST_CASE("published segment table is internally consistent") {
    const SegmentReport r = published();
    for (std::size_t g = 1; g <= 8; ++g) {
        double sum = 0.0;
        for (const auto& row : r.rows) {
            sum += row.region == g ? row.region_share : 0.0;
        }
        CHECK(sum >= 0.995);
        CHECK(sum <= 1.005);
    }
    CHECK(std::abs(r.region_global_share(1) - 0.1820) <= 1e-4 + 1e-12);
}

TEST_CASE("zero thresholds keep everything; pruning resets earlier flags") {
    SegmentReport r = published();
    for (auto& row : r.rows) {
        row.relevant = false;
    }
    const SegmentReport kept = prune_segments(r, PruneThresholds{0.0, 0.0});
    CHECK(kept.totals().n_relevant == 42);
    CHECK(kept.totals().discarded_global_share == 0.0);
}

TEST_CASE("small regions are dropped whole before cluster pruning") {
    SegmentReport r;
    r.rows.push_back({1, 1, 0.5, 0.495, true, 0});
    r.rows.push_back({1, 2, 0.5, 0.495, true, 0});
    r.rows.push_back({2, 1, 0.4, 0.004, true, 0});
    r.rows.push_back({2, 2, 0.6, 0.006, true, 0});
    const SegmentReport p = prune_segments(r, PruneThresholds{0.02, 0.005});
    CHECK(p.rows[0].relevant);
    CHECK(p.rows[1].relevant);
    CHECK_FALSE(p.rows[2].relevant);
    CHECK_FALSE(p.rows[3].relevant); // above the cluster threshold, but its region is too small
}

TEST_CASE("raising a threshold never adds relevant segments") {
    Rng rng(14);
    for (int trial = 0; trial < 200; ++trial) {
        const SegmentReport r = random_report(rng);
        const double a = 0.05 * uniform01(rng), b = 0.05 * uniform01(rng);
        const SegmentReport lo = prune_segments(r, PruneThresholds{a, b});
        const SegmentReport hi_region = prune_segments(r, PruneThresholds{a + 0.01, b});
        const SegmentReport hi_cluster = prune_segments(r, PruneThresholds{a, b + 0.01});
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            CHECK((lo.rows[i].relevant || !hi_region.rows[i].relevant));
            CHECK((lo.rows[i].relevant || !hi_cluster.rows[i].relevant));
        }
        const SegmentTotals t = lo.totals();
        double kept = 0.0;
        for (const auto& row : lo.rows) {
            kept += row.relevant ? row.global_share : 0.0;
        }
        CHECK(kept + t.discarded_global_share == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("threshold validation") {
    CHECK_THROWS_AS(PruneThresholds({-0.1, 0.01}).validate(), ContractError);
    CHECK_THROWS_AS(PruneThresholds({0.01, 1.5}).validate(), ContractError);
    CHECK_THROWS_AS(prune_segments(SegmentReport{}, PruneThresholds{0.01, -1.0}), ContractError);
}

TEST_CASE("segments CSV round trip") {
    const SegmentReport pruned = prune_segments(published(), PruneThresholds{});
    const std::string csv = segments_to_csv(pruned);
    CHECK(csv.rfind("region,cluster,pct_region,pct_global,relevant\n1,1,9.2800,1.6900,true\n", 0) == 0);
    const SegmentReport back = parse_segments_csv(csv);
    REQUIRE(back.rows.size() == pruned.rows.size());
    for (std::size_t i = 0; i < back.rows.size(); ++i) {
        CHECK(back.rows[i].region == pruned.rows[i].region);
        CHECK(back.rows[i].cluster == pruned.rows[i].cluster);
        CHECK(back.rows[i].relevant == pruned.rows[i].relevant);
        CHECK(back.rows[i].global_share == doctest::Approx(pruned.rows[i].global_share).epsilon(1e-12));
    }
    CHECK(segments_to_csv(back) == csv);
}

TEST_CASE("segments CSV parsing is tolerant of percent signs and column order") {
    const SegmentReport r = parse_segments_csv("pct_global,region,cluster,pct_region\r\n2.5%,3,1,50%\r\n2.5,3,2,50\r\n");
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].region == 3);
    CHECK(r.rows[0].global_share == doctest::Approx(0.025));
    CHECK(r.rows[1].region_share == doctest::Approx(0.5));
    CHECK(r.rows[1].relevant);
}

TEST_CASE("segments CSV parse errors") {
    CHECK_THROWS_AS(parse_segments_csv(""), ParseError);
    CHECK_THROWS_AS(parse_segments_csv("region,cluster,pct_region\n1,1,50\n"), ParseError);
    CHECK_THROWS_AS(parse_segments_csv("region,cluster,pct_region,pct_global\n1,x,50,2\n"), ParseError);
    CHECK_THROWS_AS(parse_segments_csv("region,cluster,pct_region,pct_global\n1,1,50\n"), ParseError);
    CHECK_THROWS_AS(parse_segments_csv("region,cluster,pct_region,pct_global,relevant\n1,1,50,2,maybe\n"), ParseError);
    CHECK_THROWS_AS(read_segments_csv("/nonexistent/segments.csv"), IoError);
}

TEST_CASE("report JSON carries rows and totals") {
    const auto doc = to_json(prune_segments(published(), PruneThresholds{}));
    CHECK(doc["totals"]["n_relevant"] == 26);
    CHECK(doc["rows"].size() == 42);
}
