#include "segkit/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "segkit/error.hpp"
#include "segkit/kernels.hpp"
#include "segkit/rng.hpp"

namespace segkit {

WeightVector::WeightVector(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) {
        throw ContractError("weight vector must not be empty");
    }
    double sum = 0.0;
    for (double v : w_) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ContractError("weights must be finite and non-negative");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ContractError("weights must sum to 1, got " + std::to_string(sum));
    }
}

WeightVector WeightVector::uniform(std::size_t d) {
    if (d == 0) {
        throw ContractError("weight vector must not be empty");
    }
    return WeightVector(std::vector<double>(d, 1.0 / static_cast<double>(d)));
}

WeightVector WeightVector::normalized(std::vector<double> weights) {
    double sum = 0.0;
    for (double v : weights) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ContractError("weights must be finite and non-negative");
        }
        sum += v;
    }
    if (!(sum > 0.0)) {
        throw ContractError("weights sum to zero");
    }
    for (double& v : weights) {
        v /= sum;
    }
    return WeightVector(std::move(weights));
}

double weighted_distance_squared(std::span<const double> x, std::span<const double> y, const WeightVector& w) {
    if (x.size() != y.size() || x.size() != w.size()) {
        throw ContractError("weighted distance: dimension mismatch");
    }
    return kernels::weighted_sq(x.data(), y.data(), w.values().data(), x.size());
}

double weighted_distance(std::span<const double> x, std::span<const double> y, const WeightVector& w) {
    return std::sqrt(weighted_distance_squared(x, y, w));
}

void KMeansConfig::validate() const {
    if (k < 1) {
        throw ContractError("k-means needs k >= 1");
    }
    if (max_iter < 1) {
        throw ContractError("k-means needs max_iter >= 1");
    }
    if (n_init < 1) {
        throw ContractError("k-means needs n_init >= 1");
    }
    if (!(tol >= 0.0)) {
        throw ContractError("k-means tolerance must be non-negative");
    }
}

std::vector<std::size_t> ClusteringModel::cluster_sizes() const {
    std::vector<std::size_t> sizes(k(), 0);
    for (int a : assignments) {
        ++sizes[static_cast<std::size_t>(a)];
    }
    return sizes;
}

namespace {

void check_dims(const FeatureMatrix& x, const WeightVector& w) {
    if (x.cols() != w.size()) {
        throw ContractError("feature matrix has " + std::to_string(x.cols()) + " columns, weights have " +
                            std::to_string(w.size()));
    }
}

FeatureMatrix kmeanspp_seeds(const FeatureMatrix& x, std::span<const double> w, std::size_t k, Rng& rng) {
    const std::size_t n = x.rows();
    FeatureMatrix centres(k, x.cols());
    std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
    std::vector<std::uint8_t> chosen(n, 0);

    std::size_t pick = uniform_index(rng, n);
    for (std::size_t c = 0; c < k; ++c) {
        if (c > 0) {
            double total = 0.0;
            for (double v : min_sq) {
                total += v;
            }
            if (total > 0.0) {
                const double target = uniform01(rng) * total;
                double acc = 0.0;
                pick = n;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += min_sq[i];
                    if (acc > target && min_sq[i] > 0.0) {
                        pick = i;
                        break;
                    }
                }
                if (pick == n) { // rounding at the top end
                    for (std::size_t i = n; i-- > 0;) {
                        if (min_sq[i] > 0.0) {
                            pick = i;
                            break;
                        }
                    }
                }
            } else {
                // every point coincides with a chosen centre; take any unchosen row
                std::vector<std::size_t> rest;
                for (std::size_t i = 0; i < n; ++i) {
                    if (!chosen[i]) {
                        rest.push_back(i);
                    }
                }
                pick = rest[uniform_index(rng, rest.size())];
            }
        }
        chosen[pick] = 1;
        auto src = x.row(pick);
        std::copy(src.begin(), src.end(), centres.row(c).begin());
        kernels::omp::update_min_sq(x, src, w, min_sq);
    }
    return centres;
}

struct RestartResult {
    FeatureMatrix centroids;
    std::vector<int> labels;
    double inertia = 0.0;
    std::size_t n_iter = 0;
    std::vector<double> trace;
};

// Moves the farthest point of a multi-member cluster into each empty cluster.
void repair_empty(std::vector<int>& labels, std::vector<double>& best_sq, std::vector<std::size_t>& counts) {
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] != 0) {
            continue;
        }
        std::size_t far = labels.size();
        double far_sq = -1.0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (counts[static_cast<std::size_t>(labels[i])] >= 2 && best_sq[i] > far_sq) {
                far_sq = best_sq[i];
                far = i;
            }
        }
        --counts[static_cast<std::size_t>(labels[far])];
        labels[far] = static_cast<int>(c);
        best_sq[far] = 0.0;
        counts[c] = 1;
    }
}

RestartResult lloyd(const FeatureMatrix& x, std::span<const double> w, const KMeansConfig& cfg, std::uint64_t seed) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const std::size_t k = cfg.k;
    Rng rng(seed);

    RestartResult r;
    r.centroids = kmeanspp_seeds(x, w, k, rng);
    r.labels.assign(n, -1);
    std::vector<double> best_sq(n);
    std::vector<double> sums(k * d);
    std::vector<std::size_t> counts(k);

    for (std::size_t it = 0; it < cfg.max_iter; ++it) {
        const std::size_t changed = kernels::omp::assign_nearest(x, r.centroids, w, r.labels, best_sq);
        kernels::omp::centroid_sums(x, r.labels, k, sums, counts);
        if (std::find(counts.begin(), counts.end(), std::size_t{0}) != counts.end()) {
            repair_empty(r.labels, best_sq, counts);
            kernels::omp::centroid_sums(x, r.labels, k, sums, counts);
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            const double inv = 1.0 / static_cast<double>(counts[c]);
            for (std::size_t j = 0; j < d; ++j) {
                const double updated = sums[c * d + j] * inv;
                shift = std::max(shift, std::abs(updated - r.centroids(c, j)));
                r.centroids(c, j) = updated;
            }
        }
        r.inertia = kernels::omp::weighted_inertia(x, r.labels, r.centroids, w);
        r.trace.push_back(r.inertia);
        r.n_iter = it + 1;
        if (shift < cfg.tol || (changed == 0 && it > 0)) {
            break;
        }
    }
    return r;
}

} // namespace

ClusteringModel kmeans_fit(const FeatureMatrix& x, const WeightVector& w, const KMeansConfig& cfg) {
    cfg.validate();
    check_dims(x, w);
    if (x.rows() < cfg.k) {
        throw ContractError("k-means needs at least k rows (" + std::to_string(x.rows()) + " < " + std::to_string(cfg.k) + ")");
    }

    RestartResult best;
    bool have_best = false;
    for (std::size_t restart = 0; restart < cfg.n_init; ++restart) {
        RestartResult r = lloyd(x, w.values(), cfg, derive_seed(cfg.seed, restart));
        if (!have_best || r.inertia < best.inertia) {
            best = std::move(r);
            have_best = true;
        }
    }

    ClusteringModel model;
    model.centroids = std::move(best.centroids);
    model.assignments = std::move(best.labels);
    model.inertia = best.inertia;
    model.n_iter = best.n_iter;
    model.inertia_trace = std::move(best.trace);
    if (cfg.k >= 2) {
        model.db_score = davies_bouldin(x, model, w);
    }
    return model;
}

ClusteringModel model_from_assignments(const FeatureMatrix& x, std::span<const int> labels, std::size_t k,
                                       const WeightVector& w) {
    check_dims(x, w);
    if (labels.size() != x.rows() || k == 0) {
        throw ContractError("assignments do not match the feature matrix");
    }
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= k) {
            throw ContractError("assignment refers to a cluster outside 0..k-1");
        }
    }
    const std::size_t d = x.cols();
    std::vector<double> sums(k * d);
    std::vector<std::size_t> counts(k);
    kernels::omp::centroid_sums(x, labels, k, sums, counts);
    ClusteringModel model;
    model.centroids = FeatureMatrix(k, d);
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            throw ContractError("cluster " + std::to_string(c) + " is empty");
        }
        for (std::size_t j = 0; j < d; ++j) {
            model.centroids(c, j) = sums[c * d + j] / static_cast<double>(counts[c]);
        }
    }
    model.assignments.assign(labels.begin(), labels.end());
    model.inertia = kernels::omp::weighted_inertia(x, labels, model.centroids, w.values());
    if (k >= 2) {
        model.db_score = davies_bouldin(x, model, w);
    }
    return model;
}

double davies_bouldin(const FeatureMatrix& x, const ClusteringModel& model, const WeightVector& w) {
    check_dims(x, w);
    const std::size_t k = model.k();
    if (k < 2) {
        throw ContractError("Davies-Bouldin needs at least two clusters");
    }
    if (model.assignments.size() != x.rows()) {
        throw ContractError("assignments do not match the feature matrix");
    }
    const auto sizes = model.cluster_sizes();
    std::vector<double> scatter(k);
    kernels::omp::scatter_sums(x, model.assignments, model.centroids, w.values(), scatter);
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] == 0) {
            throw ContractError("Davies-Bouldin needs non-empty clusters");
        }
        scatter[c] /= static_cast<double>(sizes[c]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) {
                continue;
            }
            const double sep = weighted_distance(model.centroids.row(i), model.centroids.row(j), w);
            if (sep == 0.0) {
                return std::numeric_limits<double>::infinity();
            }
            worst = std::max(worst, (scatter[i] + scatter[j]) / sep);
        }
        total += worst;
    }
    return total / static_cast<double>(k);
}

KSelection select_k(const FeatureMatrix& x, const WeightVector& w, const DbscanConfig& dbscan, std::size_t radius,
                    const KMeansConfig& kmeans, std::size_t max_k) {
    if (x.rows() < 4) {
        throw ContractError("k selection needs at least 4 rows");
    }
    KSelection sel;
    sel.k_dbscan = dbscan_fit(x, w, dbscan).n_clusters;
    const std::size_t cap = max_k >= 2 ? std::min(max_k, x.rows()) : x.rows();
    const std::size_t centre = std::min(std::max<std::size_t>(2, sel.k_dbscan), cap);
    const std::size_t lo = centre > radius + 2 ? centre - radius : 2;
    const std::size_t hi = std::min(centre + radius, cap);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = lo; k <= hi; ++k) {
        KMeansConfig cfg = kmeans;
        cfg.k = k;
        cfg.seed = derive_seed(kmeans.seed, k);
        const ClusteringModel model = kmeans_fit(x, w, cfg);
        const double db = *model.db_score;
        sel.candidates.push_back({k, db});
        if (sel.k == 0 || db < best) {
            best = db;
            sel.k = k;
        }
    }
    return sel;
}

nlohmann::json to_json(const ClusteringModel& model, const std::vector<std::string>& feature_names) {
    nlohmann::json centroids = nlohmann::json::array();
    for (std::size_t c = 0; c < model.k(); ++c) {
        auto row = model.centroids.row(c);
        centroids.push_back(std::vector<double>(row.begin(), row.end()));
    }
    nlohmann::json db = nullptr;
    if (model.db_score) {
        db = std::isfinite(*model.db_score) ? nlohmann::json(*model.db_score) : nlohmann::json("inf");
    }
    return {{"spec_version", 1},
            {"k", model.k()},
            {"features", feature_names},
            {"centroids", centroids},
            {"cluster_sizes", model.cluster_sizes()},
            {"inertia", model.inertia},
            {"davies_bouldin", db},
            {"n_iter", model.n_iter}};
}

} // namespace segkit
