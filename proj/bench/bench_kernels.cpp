// Times the serial reference kernels against their OpenMP counterparts.
//
//   bench_kernels [rows] [dims] [k] [repeats]

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "segkit/kernels.hpp"
#include "segkit/rng.hpp"

namespace {

using namespace segkit;

double best_of(std::size_t repeats, const std::function<void()>& fn) {
    double best = 1e300;
    for (std::size_t r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-22s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx\n", name, serial * 1e3, parallel * 1e3,
                serial / parallel);
}

} // namespace

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 200000;
    const std::size_t d = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 12;
    const std::size_t k = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 6;
    const std::size_t repeats = argc > 4 ? std::strtoull(argv[4], nullptr, 10) : 5;
    const std::size_t n_pair = std::min<std::size_t>(n, 4000);

    Rng rng(7);
    FeatureMatrix x(n, d);
    for (double& v : x.data()) {
        v = uniform01(rng);
    }
    FeatureMatrix centroids(k, d);
    for (double& v : centroids.data()) {
        v = uniform01(rng);
    }
    std::vector<double> w(d, 1.0 / static_cast<double>(d));
    std::vector<int> labels(n, -1);
    std::vector<double> best(n), sums(k * d), scatter(k), min_sq(n);
    std::vector<std::size_t> counts(k);
    kernels::serial::assign_nearest(x, centroids, w, labels, best);

    std::printf("rows=%zu dims=%zu k=%zu threads=%d (pairwise kernels on %zu rows)\n", n, d, k, omp_get_max_threads(),
                n_pair);

    report("assign_nearest",
           best_of(repeats, [&] { std::fill(labels.begin(), labels.end(), -1); kernels::serial::assign_nearest(x, centroids, w, labels, best); }),
           best_of(repeats, [&] { std::fill(labels.begin(), labels.end(), -1); kernels::omp::assign_nearest(x, centroids, w, labels, best); }));
    report("centroid_sums", best_of(repeats, [&] { kernels::serial::centroid_sums(x, labels, k, sums, counts); }),
           best_of(repeats, [&] { kernels::omp::centroid_sums(x, labels, k, sums, counts); }));
    report("weighted_inertia", best_of(repeats, [&] { kernels::serial::weighted_inertia(x, labels, centroids, w); }),
           best_of(repeats, [&] { kernels::omp::weighted_inertia(x, labels, centroids, w); }));
    report("scatter_sums", best_of(repeats, [&] { kernels::serial::scatter_sums(x, labels, centroids, w, scatter); }),
           best_of(repeats, [&] { kernels::omp::scatter_sums(x, labels, centroids, w, scatter); }));
    report("update_min_sq",
           best_of(repeats, [&] { std::fill(min_sq.begin(), min_sq.end(), 1e300); kernels::serial::update_min_sq(x, centroids.row(0), w, min_sq); }),
           best_of(repeats, [&] { std::fill(min_sq.begin(), min_sq.end(), 1e300); kernels::omp::update_min_sq(x, centroids.row(0), w, min_sq); }));

    std::vector<std::size_t> idx(n_pair);
    for (std::size_t i = 0; i < n_pair; ++i) {
        idx[i] = i;
    }
    const FeatureMatrix xp = x.subset(idx);
    std::vector<std::size_t> nbr(n_pair);
    std::vector<double> kdist(n_pair);
    report("neighbor_counts", best_of(repeats, [&] { kernels::serial::neighbor_counts(xp, w, 0.1, nbr); }),
           best_of(repeats, [&] { kernels::omp::neighbor_counts(xp, w, 0.1, nbr); }));
    report("kth_neighbor_distance", best_of(repeats, [&] { kernels::serial::kth_neighbor_distance(xp, w, 10, kdist); }),
           best_of(repeats, [&] { kernels::omp::kth_neighbor_distance(xp, w, 10, kdist); }));
    return 0;
}
