#include "doctest.h"
#include "segkit/cluster.hpp"
#include "segkit/error.hpp"
#include "test_util.hpp"

using namespace segkit;

namespace {

FeatureMatrix line(const std::vector<double>& v) { return FeatureMatrix(v.size(), 1, v); }

DbscanConfig config(double eps, std::size_t min_pts) {
    DbscanConfig c;
    c.eps = eps;
    c.min_pts = min_pts;
    return c;
}

} // namespace

TEST_CASE("two runs of points on a line") {
    const DbscanResult r = dbscan_fit(line({0, 1, 2, 10, 11, 12}), WeightVector::uniform(1), config(1.5, 2));
    CHECK(r.n_clusters == 2);
    CHECK(r.n_noise == 0);
    CHECK(r.labels == std::vector<int>{0, 0, 0, 1, 1, 1});
}

TEST_CASE("an isolated point is noise") {
    const DbscanResult r = dbscan_fit(line({0, 1, 2, 10, 11, 12, 100}), WeightVector::uniform(1), config(1.5, 2));
    CHECK(r.labels.back() == -1);
    CHECK(r.n_noise == 1);
    CHECK(r.n_clusters == 2);
}

TEST_CASE("huge eps puts everything in one cluster") {
    const DbscanResult r = dbscan_fit(line({0, 1, 2, 10, 11, 12, 100}), WeightVector::uniform(1), config(1e6, 2));
    CHECK(r.n_clusters == 1);
    CHECK(r.n_noise == 0);
}

TEST_CASE("all noise reports zero clusters") {
    const DbscanResult r = dbscan_fit(line({0, 10, 20, 30}), WeightVector::uniform(1), config(1.0, 2));
    CHECK(r.n_clusters == 0);
    CHECK(r.n_noise == 4);
}

TEST_CASE("border point reachable from two clusters joins the first") {
    // 2.0 has three neighbours (1.0, itself, 3.0), short of min_pts, but touches a core on each side.
    const std::vector<double> v{0, 0.25, 0.5, 1, 2, 3, 3.5, 3.75, 4};
    const DbscanResult r = dbscan_fit(line(v), WeightVector::uniform(1), config(1.0, 4));
    CHECK(r.labels == std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1});
    CHECK(r.labels == oracle::dbscan_trace(testutil::to_points(line(v)), {1.0}, 1.0, 4));
}

TEST_CASE("DBSCAN matches the connected-component trace on random grids") {
    Rng rng(55);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = 1 + uniform_index(rng, 2);
        const std::size_t n = 3 + uniform_index(rng, 25);
        FeatureMatrix x(n, d);
        for (double& v : x.data()) {
            v = static_cast<double>(uniform_index(rng, 12));
        }
        const double eps = 0.5 + static_cast<double>(uniform_index(rng, 4));
        const std::size_t min_pts = 1 + uniform_index(rng, std::min<std::size_t>(n, 5));
        const std::vector<double> w(d, 1.0 / static_cast<double>(d));
        const DbscanResult r = dbscan_fit(x, WeightVector(w), config(eps, min_pts));
        CHECK(r.labels == oracle::dbscan_trace(testutil::to_points(x), w, eps, min_pts));
    }
}

TEST_CASE("auto eps and default min_pts") {
    const FeatureMatrix x = line({0, 0.1, 0.2, 0.3, 0.4, 0.5, 5, 5.1, 5.2, 5.3, 5.4, 5.5});
    const DbscanResult r = dbscan_fit(x, WeightVector::uniform(1), DbscanConfig{});
    CHECK(r.min_pts == 5);
    CHECK(r.eps > 0.0);
    CHECK(r.n_clusters >= 1);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 6; j < 12; ++j) {
            CHECK((r.labels[i] < 0 || r.labels[i] != r.labels[j]));
        }
    }

    const double eps = auto_eps(x, WeightVector::uniform(1), 5);
    CHECK(eps == r.eps);
    CHECK_THROWS_AS(dbscan_fit(line({0, 1}), WeightVector::uniform(1), DbscanConfig{}), ContractError);
    CHECK_THROWS_AS(dbscan_fit(x, WeightVector::uniform(1), config(0.0, 2)), ContractError);
}

TEST_CASE("auto eps survives duplicated points") {
    const FeatureMatrix x = line({1, 1, 1, 1, 1, 1, 2});
    CHECK(auto_eps(x, WeightVector::uniform(1), 2) > 0.0);
}
