#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "segkit/cluster.hpp"
#include "segkit/error.hpp"
#include "segkit/kernels.hpp"

namespace segkit {

namespace {

std::size_t resolve_min_pts(const FeatureMatrix& x, const DbscanConfig& cfg) {
    if (cfg.min_pts) {
        if (*cfg.min_pts < 1) {
            throw ContractError("DBSCAN min_pts must be at least 1");
        }
        return *cfg.min_pts;
    }
    return std::max<std::size_t>(5, 2 * x.cols());
}

} // namespace

double auto_eps(const FeatureMatrix& x, const WeightVector& w, std::size_t min_pts) {
    if (x.rows() < 2) {
        throw ContractError("automatic eps needs at least two rows");
    }
    std::vector<double> kdist(x.rows());
    kernels::omp::kth_neighbor_distance(x, w.values(), std::max<std::size_t>(min_pts, 2) - 1, kdist);
    std::sort(kdist.begin(), kdist.end());

    double eps = kdist.back();
    if (kdist.size() >= 3) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i + 1 < kdist.size(); ++i) {
            const double second = kdist[i + 1] - 2.0 * kdist[i] + kdist[i - 1];
            if (second > best) {
                best = second;
                eps = kdist[i];
            }
        }
    }
    if (!(eps > 0.0)) {
        // Knee sits on duplicated points; fall back to the smallest positive k-distance.
        auto it = std::upper_bound(kdist.begin(), kdist.end(), 0.0);
        eps = it != kdist.end() ? *it : 1e-12;
    }
    return eps;
}

DbscanResult dbscan_fit(const FeatureMatrix& x, const WeightVector& w, const DbscanConfig& cfg) {
    if (x.cols() != w.size()) {
        throw ContractError("feature matrix and weights disagree on dimension");
    }
    DbscanResult result;
    result.min_pts = resolve_min_pts(x, cfg);
    const std::size_t n = x.rows();
    if (n < result.min_pts) {
        throw ContractError("DBSCAN needs at least min_pts rows");
    }
    if (cfg.eps) {
        if (!(*cfg.eps > 0.0)) {
            throw ContractError("DBSCAN eps must be positive");
        }
        result.eps = *cfg.eps;
    } else {
        result.eps = auto_eps(x, w, result.min_pts);
    }

    std::vector<std::size_t> counts(n);
    kernels::omp::neighbor_counts(x, w.values(), result.eps, counts);
    const double eps_sq = result.eps * result.eps;
    const auto* wp = w.values().data();

    constexpr int kUnvisited = -2;
    constexpr int kNoise = -1;
    result.labels.assign(n, kUnvisited);
    int cluster = 0;
    std::deque<std::size_t> queue;
    for (std::size_t p = 0; p < n; ++p) {
        if (result.labels[p] != kUnvisited) {
            continue;
        }
        if (counts[p] < result.min_pts) {
            result.labels[p] = kNoise;
            continue;
        }
        result.labels[p] = cluster;
        queue.assign(1, p);
        while (!queue.empty()) {
            const std::size_t q = queue.front();
            queue.pop_front();
            if (counts[q] < result.min_pts) {
                continue; // border point, not expanded
            }
            for (std::size_t r = 0; r < n; ++r) {
                if (result.labels[r] >= 0) {
                    continue;
                }
                if (kernels::weighted_sq(x.row(q).data(), x.row(r).data(), wp, x.cols()) > eps_sq) {
                    continue;
                }
                const bool was_unvisited = result.labels[r] == kUnvisited;
                result.labels[r] = cluster;
                if (was_unvisited) {
                    queue.push_back(r);
                }
            }
        }
        ++cluster;
    }
    result.n_clusters = static_cast<std::size_t>(cluster);
    result.n_noise = static_cast<std::size_t>(std::count(result.labels.begin(), result.labels.end(), kNoise));
    return result;
}

} // namespace segkit
