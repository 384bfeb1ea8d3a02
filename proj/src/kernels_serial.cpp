#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "segkit/kernels.hpp"

namespace segkit::kernels::serial {

std::size_t assign_nearest(const FeatureMatrix& x, const FeatureMatrix& centroids, std::span<const double> w,
                           std::span<int> labels, std::span<double> best_sq) {
    const std::size_t d = x.cols();
    std::size_t changed = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int best_c = 0;
        for (std::size_t c = 0; c < centroids.rows(); ++c) {
            const double s = weighted_sq(x.row(i).data(), centroids.row(c).data(), w.data(), d);
            if (s < best) {
                best = s;
                best_c = static_cast<int>(c);
            }
        }
        if (labels[i] != best_c) {
            labels[i] = best_c;
            ++changed;
        }
        best_sq[i] = best;
    }
    return changed;
}

void centroid_sums(const FeatureMatrix& x, std::span<const int> labels, std::size_t k, std::span<double> sums,
                   std::span<std::size_t> counts) {
    const std::size_t d = x.cols();
    std::fill(sums.begin(), sums.begin() + static_cast<std::ptrdiff_t>(k * d), 0.0);
    std::fill(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(k), 0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        ++counts[c];
        for (std::size_t j = 0; j < d; ++j) {
            sums[c * d + j] += x(i, j);
        }
    }
}

double weighted_inertia(const FeatureMatrix& x, std::span<const int> labels, const FeatureMatrix& centroids,
                        std::span<const double> w) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        total += weighted_sq(x.row(i).data(), centroids.row(static_cast<std::size_t>(labels[i])).data(), w.data(), x.cols());
    }
    return total;
}

void scatter_sums(const FeatureMatrix& x, std::span<const int> labels, const FeatureMatrix& centroids,
                  std::span<const double> w, std::span<double> sums) {
    std::fill(sums.begin(), sums.begin() + static_cast<std::ptrdiff_t>(centroids.rows()), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        sums[c] += std::sqrt(weighted_sq(x.row(i).data(), centroids.row(c).data(), w.data(), x.cols()));
    }
}

void update_min_sq(const FeatureMatrix& x, std::span<const double> centre, std::span<const double> w,
                   std::span<double> min_sq) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
        min_sq[i] = std::min(min_sq[i], weighted_sq(x.row(i).data(), centre.data(), w.data(), x.cols()));
    }
}

void neighbor_counts(const FeatureMatrix& x, std::span<const double> w, double eps, std::span<std::size_t> counts) {
    const double eps_sq = eps * eps;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        std::size_t n = 0;
        for (std::size_t j = 0; j < x.rows(); ++j) {
            if (weighted_sq(x.row(i).data(), x.row(j).data(), w.data(), x.cols()) <= eps_sq) {
                ++n;
            }
        }
        counts[i] = n;
    }
}

void kth_neighbor_distance(const FeatureMatrix& x, std::span<const double> w, std::size_t kth, std::span<double> out) {
    const std::size_t n = x.rows();
    if (n < 2) {
        std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
        return;
    }
    const std::size_t pos = std::min(std::max<std::size_t>(kth, 1), n - 1) - 1;
    std::vector<double> dist(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t m = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                dist[m++] = weighted_sq(x.row(i).data(), x.row(j).data(), w.data(), x.cols());
            }
        }
        std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(pos), dist.end());
        out[i] = std::sqrt(dist[pos]);
    }
}

} // namespace segkit::kernels::serial
