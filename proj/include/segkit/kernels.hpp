#ifndef SEGKIT_KERNELS_HPP
#define SEGKIT_KERNELS_HPP

#include <cstddef>
#include <span>

#include "segkit/matrix.hpp"

/**
 * @file kernels.hpp
 * @brief Inner loops of k-means, Davies-Bouldin and DBSCAN under a weighted
 * squared Euclidean metric.
 *
 * Every kernel has two implementations with identical signatures:
 * `serial::` is the straightforward reference kept for tests and benchmarks,
 * `omp::` is the OpenMP version the library calls. Reductions in `omp::` sum
 * fixed blocks of kBlockRows rows and combine the partials in block order, so
 * their results do not depend on the thread count. Per-row outputs
 * (labels, counts, distances) are bitwise identical between the two.
 */

namespace segkit::kernels {

inline constexpr std::size_t kBlockRows = 2048;

inline double weighted_sq(const double* a, const double* b, const double* w, std::size_t d) noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = a[j] - b[j];
        s += w[j] * diff * diff;
    }
    return s;
}

namespace serial {

/// Nearest centroid per row, lowest index on ties. Returns how many labels changed.
std::size_t assign_nearest(const FeatureMatrix& x, const FeatureMatrix& centroids, std::span<const double> w,
                           std::span<int> labels, std::span<double> best_sq);
/// Per-cluster coordinate sums (k x d, row-major) and member counts.
void centroid_sums(const FeatureMatrix& x, std::span<const int> labels, std::size_t k, std::span<double> sums,
                   std::span<std::size_t> counts);
/// Sum of weighted squared distances of rows to their assigned centroid.
double weighted_inertia(const FeatureMatrix& x, std::span<const int> labels, const FeatureMatrix& centroids,
                        std::span<const double> w);
/// Per-cluster sum of weighted (unsquared) distances to the centroid.
void scatter_sums(const FeatureMatrix& x, std::span<const int> labels, const FeatureMatrix& centroids,
                  std::span<const double> w, std::span<double> sums);
/// min_sq[i] = min(min_sq[i], d^2(x_i, centre)).
void update_min_sq(const FeatureMatrix& x, std::span<const double> centre, std::span<const double> w,
                   std::span<double> min_sq);
/// Rows within eps of each row, the row itself included.
void neighbor_counts(const FeatureMatrix& x, std::span<const double> w, double eps, std::span<std::size_t> counts);
/// Distance from each row to its kth nearest other row (kth >= 1, capped at n - 1).
void kth_neighbor_distance(const FeatureMatrix& x, std::span<const double> w, std::size_t kth, std::span<double> out);

} // namespace serial

// Same contracts as serial::.
namespace omp {

std::size_t assign_nearest(const FeatureMatrix& x, const FeatureMatrix& centroids, std::span<const double> w,
                           std::span<int> labels, std::span<double> best_sq);
void centroid_sums(const FeatureMatrix& x, std::span<const int> labels, std::size_t k, std::span<double> sums,
                   std::span<std::size_t> counts);
double weighted_inertia(const FeatureMatrix& x, std::span<const int> labels, const FeatureMatrix& centroids,
                        std::span<const double> w);
void scatter_sums(const FeatureMatrix& x, std::span<const int> labels, const FeatureMatrix& centroids,
                  std::span<const double> w, std::span<double> sums);
void update_min_sq(const FeatureMatrix& x, std::span<const double> centre, std::span<const double> w,
                   std::span<double> min_sq);
void neighbor_counts(const FeatureMatrix& x, std::span<const double> w, double eps, std::span<std::size_t> counts);
void kth_neighbor_distance(const FeatureMatrix& x, std::span<const double> w, std::size_t kth, std::span<double> out);

} // namespace omp

} // namespace segkit::kernels

#endif
