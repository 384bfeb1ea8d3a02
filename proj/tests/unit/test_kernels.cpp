#include <omp.h>

#include <cmath>

#include "doctest.h"
#include "segkit/kernels.hpp"
#include "test_util.hpp"

using namespace segkit;

namespace {

struct Fixture {
    FeatureMatrix x;
    FeatureMatrix centroids;
    std::vector<double> w;
    std::vector<int> labels;
};

Fixture make(std::uint64_t seed, std::size_t n, std::size_t d, std::size_t k) {
    Rng rng(seed);
    Fixture f{testutil::random_matrix(rng, n, d), testutil::random_matrix(rng, k, d), testutil::random_weights(rng, d),
              std::vector<int>(n, -1)};
    std::vector<double> best(n);
    kernels::serial::assign_nearest(f.x, f.centroids, f.w, f.labels, best);
    return f;
}

class ThreadScope {
public:
    explicit ThreadScope(int n) : saved_(omp_get_max_threads()) { omp_set_num_threads(n); }
    ~ThreadScope() { omp_set_num_threads(saved_); }

private:
    int saved_;
};

} // namespace

TEST_CASE("weighted_sq matches the oracle") {
    const double a[] = {0.0, 0.0, 0.0}, b[] = {3.0, 4.0, 0.0}, w[] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    CHECK(kernels::weighted_sq(a, b, w, 3) == doctest::Approx(25.0 / 3.0));
}

TEST_CASE("per-row kernels agree bitwise between serial and omp") {
    for (int threads : {1, 2, 3}) {
        ThreadScope scope(threads);
        const Fixture f = make(41 + threads, 5000, 7, 5);

        std::vector<int> ls(f.x.rows(), -1), lo(f.x.rows(), -1);
        std::vector<double> bs(f.x.rows()), bo(f.x.rows());
        CHECK(kernels::serial::assign_nearest(f.x, f.centroids, f.w, ls, bs) ==
              kernels::omp::assign_nearest(f.x, f.centroids, f.w, lo, bo));
        CHECK(ls == lo);
        CHECK(bs == bo);

        std::vector<double> ms(f.x.rows(), 1e300), mo(f.x.rows(), 1e300);
        kernels::serial::update_min_sq(f.x, f.centroids.row(2), f.w, ms);
        kernels::omp::update_min_sq(f.x, f.centroids.row(2), f.w, mo);
        CHECK(ms == mo);

        std::vector<std::size_t> idx(600);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            idx[i] = i * 3;
        }
        const FeatureMatrix small = f.x.subset(idx);
        std::vector<std::size_t> cs(small.rows()), co(small.rows());
        kernels::serial::neighbor_counts(small, f.w, 0.2, cs);
        kernels::omp::neighbor_counts(small, f.w, 0.2, co);
        CHECK(cs == co);
        std::vector<double> ks(small.rows()), ko(small.rows());
        kernels::serial::kth_neighbor_distance(small, f.w, 4, ks);
        kernels::omp::kth_neighbor_distance(small, f.w, 4, ko);
        CHECK(ks == ko);
    }
}

TEST_CASE("reductions agree with serial and do not depend on the thread count") {
    const Fixture f = make(7, 9000, 6, 4);
    const std::size_t k = 4, d = 6;
    std::vector<double> sums_s(k * d), scat_s(k);
    std::vector<std::size_t> cnt_s(k);
    kernels::serial::centroid_sums(f.x, f.labels, k, sums_s, cnt_s);
    kernels::serial::scatter_sums(f.x, f.labels, f.centroids, f.w, scat_s);
    const double inertia_s = kernels::serial::weighted_inertia(f.x, f.labels, f.centroids, f.w);

    std::vector<double> first_sums, first_scat;
    double first_inertia = 0.0;
    for (int threads : {1, 2, 4}) {
        ThreadScope scope(threads);
        std::vector<double> sums(k * d), scat(k);
        std::vector<std::size_t> cnt(k);
        kernels::omp::centroid_sums(f.x, f.labels, k, sums, cnt);
        kernels::omp::scatter_sums(f.x, f.labels, f.centroids, f.w, scat);
        const double inertia = kernels::omp::weighted_inertia(f.x, f.labels, f.centroids, f.w);
        CHECK(cnt == cnt_s);
        for (std::size_t i = 0; i < sums.size(); ++i) {
            CHECK(sums[i] == doctest::Approx(sums_s[i]).epsilon(1e-12));
        }
        for (std::size_t i = 0; i < k; ++i) {
            CHECK(scat[i] == doctest::Approx(scat_s[i]).epsilon(1e-12));
        }
        CHECK(inertia == doctest::Approx(inertia_s).epsilon(1e-12));
        if (threads == 1) {
            first_sums = sums;
            first_scat = scat;
            first_inertia = inertia;
        } else {
            CHECK(sums == first_sums);
            CHECK(scat == first_scat);
            CHECK(inertia == first_inertia);
        }
    }
}

TEST_CASE("assignment ties go to the lowest centroid index") {
    FeatureMatrix x(1, 1, {0.5});
    FeatureMatrix c(2, 1, {0.0, 1.0});
    std::vector<double> w{1.0};
    std::vector<int> labels{-1};
    std::vector<double> best(1);
    kernels::omp::assign_nearest(x, c, w, labels, best);
    CHECK(labels[0] == 0);
    CHECK(best[0] == 0.25);
}

TEST_CASE("neighbor counts include the point itself and the eps boundary") {
    FeatureMatrix x(3, 1, {0.0, 1.0, 3.0});
    std::vector<double> w{1.0};
    std::vector<std::size_t> counts(3);
    kernels::omp::neighbor_counts(x, w, 1.0, counts);
    CHECK(counts == std::vector<std::size_t>{2, 2, 1});
    std::vector<double> kd(3);
    kernels::omp::kth_neighbor_distance(x, w, 1, kd);
    CHECK(kd == std::vector<double>{1.0, 1.0, 2.0});
}
