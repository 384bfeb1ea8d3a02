#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "segkit/kernels.hpp"

namespace segkit::kernels::omp {

namespace {

std::size_t block_count(std::size_t n) { return (n + kBlockRows - 1) / kBlockRows; }

} // namespace

std::size_t assign_nearest(const FeatureMatrix& x, const FeatureMatrix& centroids, std::span<const double> w,
                           std::span<int> labels, std::span<double> best_sq) {
    const std::size_t d = x.cols();
    const std::size_t k = centroids.rows();
    const auto n = static_cast<std::ptrdiff_t>(x.rows());
    std::size_t changed = 0;
#pragma omp parallel for schedule(static) reduction(+ : changed)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double* row = x.row(i).data();
        double best = std::numeric_limits<double>::infinity();
        int best_c = 0;
        for (std::size_t c = 0; c < k; ++c) {
            const double s = weighted_sq(row, centroids.row(c).data(), w.data(), d);
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
    const std::size_t n = x.rows();
    const std::size_t blocks = block_count(n);
    std::vector<double> part_sums(blocks * k * d, 0.0);
    std::vector<std::size_t> part_counts(blocks * k, 0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t bb = 0; bb < static_cast<std::ptrdiff_t>(blocks); ++bb) {
        const auto b = static_cast<std::size_t>(bb);
        double* s = part_sums.data() + b * k * d;
        std::size_t* cnt = part_counts.data() + b * k;
        const std::size_t end = std::min(n, (b + 1) * kBlockRows);
        for (std::size_t i = b * kBlockRows; i < end; ++i) {
            const auto c = static_cast<std::size_t>(labels[i]);
            ++cnt[c];
            const double* row = x.row(i).data();
            for (std::size_t j = 0; j < d; ++j) {
                s[c * d + j] += row[j];
            }
        }
    }
    std::fill(sums.begin(), sums.begin() + static_cast<std::ptrdiff_t>(k * d), 0.0);
    std::fill(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(k), 0);
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t t = 0; t < k * d; ++t) {
            sums[t] += part_sums[b * k * d + t];
        }
        for (std::size_t c = 0; c < k; ++c) {
            counts[c] += part_counts[b * k + c];
        }
    }
}

double weighted_inertia(const FeatureMatrix& x, std::span<const int> labels, const FeatureMatrix& centroids,
                        std::span<const double> w) {
    const std::size_t n = x.rows();
    const std::size_t blocks = block_count(n);
    std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t bb = 0; bb < static_cast<std::ptrdiff_t>(blocks); ++bb) {
        const auto b = static_cast<std::size_t>(bb);
        double s = 0.0;
        const std::size_t end = std::min(n, (b + 1) * kBlockRows);
        for (std::size_t i = b * kBlockRows; i < end; ++i) {
            s += weighted_sq(x.row(i).data(), centroids.row(static_cast<std::size_t>(labels[i])).data(), w.data(), x.cols());
        }
        partial[b] = s;
    }
    double total = 0.0;
    for (double p : partial) {
        total += p;
    }
    return total;
}

void scatter_sums(const FeatureMatrix& x, std::span<const int> labels, const FeatureMatrix& centroids,
                  std::span<const double> w, std::span<double> sums) {
    const std::size_t n = x.rows();
    const std::size_t k = centroids.rows();
    const std::size_t blocks = block_count(n);
    std::vector<double> partial(blocks * k, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t bb = 0; bb < static_cast<std::ptrdiff_t>(blocks); ++bb) {
        const auto b = static_cast<std::size_t>(bb);
        double* s = partial.data() + b * k;
        const std::size_t end = std::min(n, (b + 1) * kBlockRows);
        for (std::size_t i = b * kBlockRows; i < end; ++i) {
            const auto c = static_cast<std::size_t>(labels[i]);
            s[c] += std::sqrt(weighted_sq(x.row(i).data(), centroids.row(c).data(), w.data(), x.cols()));
        }
    }
    std::fill(sums.begin(), sums.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t c = 0; c < k; ++c) {
            sums[c] += partial[b * k + c];
        }
    }
}

void update_min_sq(const FeatureMatrix& x, std::span<const double> centre, std::span<const double> w,
                   std::span<double> min_sq) {
    const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        min_sq[i] = std::min(min_sq[i], weighted_sq(x.row(i).data(), centre.data(), w.data(), x.cols()));
    }
}

void neighbor_counts(const FeatureMatrix& x, std::span<const double> w, double eps, std::span<std::size_t> counts) {
    const double eps_sq = eps * eps;
    const std::size_t rows = x.rows();
    const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double* a = x.row(i).data();
        std::size_t count = 0;
        for (std::size_t j = 0; j < rows; ++j) {
            if (weighted_sq(a, x.row(j).data(), w.data(), x.cols()) <= eps_sq) {
                ++count;
            }
        }
        counts[i] = count;
    }
}

void kth_neighbor_distance(const FeatureMatrix& x, std::span<const double> w, std::size_t kth, std::span<double> out) {
    const std::size_t rows = x.rows();
    if (rows < 2) {
        std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(rows), 0.0);
        return;
    }
    const std::size_t pos = std::min(std::max<std::size_t>(kth, 1), rows - 1) - 1;
#pragma omp parallel
    {
        std::vector<double> dist(rows - 1);
#pragma omp for schedule(dynamic, 64)
        for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(rows); ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            std::size_t m = 0;
            for (std::size_t j = 0; j < rows; ++j) {
                if (j != i) {
                    dist[m++] = weighted_sq(x.row(i).data(), x.row(j).data(), w.data(), x.cols());
                }
            }
            std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(pos), dist.end());
            out[i] = std::sqrt(dist[pos]);
        }
    }
}

} // namespace segkit::kernels::omp
