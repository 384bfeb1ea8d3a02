#ifndef SEGKIT_CLUSTER_HPP
#define SEGKIT_CLUSTER_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "segkit/matrix.hpp"

/**
 * @file cluster.hpp
 * @brief Weighted Euclidean clustering: k-means (k-means++ seeding, Lloyd
 * refinement), Davies-Bouldin scoring, DBSCAN and k selection.
 */

namespace segkit {

/// Non-negative per-feature weights summing to one (within 1e-9).
class WeightVector {
public:
    WeightVector() = default;
    /// Throws ContractError if the entries are negative, non-finite, empty or do not sum to one.
    explicit WeightVector(std::vector<double> weights);

    static WeightVector uniform(std::size_t d);
    /// Divide non-negative weights by their sum.
    static WeightVector normalized(std::vector<double> weights);

    std::size_t size() const noexcept { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    std::span<const double> values() const noexcept { return w_; }

    bool operator==(const WeightVector&) const = default;

private:
    std::vector<double> w_;
};

/// sqrt(sum_i w_i (x_i - y_i)^2). Throws ContractError on dimension mismatch.
double weighted_distance(std::span<const double> x, std::span<const double> y, const WeightVector& w);
double weighted_distance_squared(std::span<const double> x, std::span<const double> y, const WeightVector& w);

struct KMeansConfig {
    std::size_t k = 2;
    std::size_t max_iter = 300;
    /// Stop once the largest centroid coordinate shift falls below this.
    double tol = 1e-4;
    std::size_t n_init = 10;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ClusteringModel {
    FeatureMatrix centroids;
    std::vector<int> assignments;
    /// Sum of weighted squared distances of rows to their centroid.
    double inertia = 0.0;
    /// Unset for k = 1; +inf when two centroids coincide under the metric.
    std::optional<double> db_score;
    std::size_t n_iter = 0;
    /// Inertia after each Lloyd iteration of the winning restart.
    std::vector<double> inertia_trace;

    std::size_t k() const noexcept { return centroids.rows(); }
    std::vector<std::size_t> cluster_sizes() const;
};

/**
 * Best of `n_init` restarts by inertia. Each restart seeds with k-means++
 * under the weighted metric and alternates nearest-centroid assignment with
 * mean updates. A cluster that empties is reseeded with the point farthest
 * from its current centroid. Restart r uses seed derive_seed(cfg.seed, r).
 *
 * Throws ContractError when x has fewer rows than k.
 */
ClusteringModel kmeans_fit(const FeatureMatrix& x, const WeightVector& w, const KMeansConfig& cfg);

/// Model whose centroids are the member means of `labels`. Every cluster 0..k-1 must be non-empty.
ClusteringModel model_from_assignments(const FeatureMatrix& x, std::span<const int> labels, std::size_t k,
                                       const WeightVector& w);

/**
 * Davies-Bouldin index under the weighted metric: mean over clusters of
 * max_{j != i} (S_i + S_j) / M_ij, where S is the mean member-to-centroid
 * distance and M the centroid distance. Lower is better. Returns +inf when
 * two centroids coincide. Needs k >= 2 and non-empty clusters.
 */
double davies_bouldin(const FeatureMatrix& x, const ClusteringModel& model, const WeightVector& w);

struct DbscanConfig {
    /// Neighbourhood radius; unset picks the knee of the sorted k-distance curve.
    std::optional<double> eps;
    /// Core-point threshold, the point itself included; unset means max(5, 2d).
    std::optional<std::size_t> min_pts;
};

struct DbscanResult {
    /// Cluster id per row, -1 for noise.
    std::vector<int> labels;
    std::size_t n_clusters = 0;
    std::size_t n_noise = 0;
    double eps = 0.0;
    std::size_t min_pts = 0;
};

/// Radius at the point of maximum second difference of the ascending (min_pts-1)-NN distance curve.
double auto_eps(const FeatureMatrix& x, const WeightVector& w, std::size_t min_pts);

/**
 * Classical DBSCAN. Points are visited in row order; each unvisited core point
 * starts a cluster that is expanded breadth-first through core points, and
 * border points join the first cluster that reaches them.
 */
DbscanResult dbscan_fit(const FeatureMatrix& x, const WeightVector& w, const DbscanConfig& cfg);

struct KCandidate {
    std::size_t k = 0;
    double db = 0.0;
};

struct KSelection {
    std::size_t k = 0;
    std::size_t k_dbscan = 0;
    std::vector<KCandidate> candidates;
};

/**
 * DBSCAN gives a starting cluster count (floored at 2); every k within
 * `radius` of it (never below 2, never above the row count) is fitted with
 * k-means and the lowest Davies-Bouldin index wins, ties going to smaller k.
 * A `max_k` of at least 2 clamps both the DBSCAN count and the candidates.
 */
KSelection select_k(const FeatureMatrix& x, const WeightVector& w, const DbscanConfig& dbscan, std::size_t radius,
                    const KMeansConfig& kmeans, std::size_t max_k = 0);

nlohmann::json to_json(const ClusteringModel& model, const std::vector<std::string>& feature_names);

} // namespace segkit

#endif
