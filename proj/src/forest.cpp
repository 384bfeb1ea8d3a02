#include "segkit/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "segkit/error.hpp"
#include "segkit/rng.hpp"

namespace segkit {

void ForestConfig::validate() const {
    if (n_trees < 1) {
        throw ContractError("forest needs at least one tree");
    }
    if (max_depth < 1) {
        throw ContractError("forest max_depth must be at least 1");
    }
    if (min_leaf < 1) {
        throw ContractError("forest min_leaf must be at least 1");
    }
}

class TreeBuilder {
public:
    TreeBuilder(std::span<const double> x, std::size_t p, std::span<const double> y, ForestTask task, std::size_t n_classes,
                const ForestConfig& cfg, std::size_t mtry, std::uint64_t seed)
        : x_(x), p_(p), y_(y), task_(task), n_classes_(n_classes), cfg_(cfg), mtry_(mtry), rng_(seed),
          importance_(p, 0.0), class_counts_(n_classes) {}

    RandomForest::Tree build(std::vector<std::size_t> sample) {
        RandomForest::Tree tree;
        grow(tree, sample, 0);
        return tree;
    }

    std::vector<double> take_importance() { return std::move(importance_); }

private:
    // Impurity times node size: SSE for regression, N * Gini for classification.
    double scaled_impurity(std::span<const std::size_t> idx) {
        const double n = static_cast<double>(idx.size());
        if (task_ == ForestTask::regression) {
            double sum = 0.0;
            double sq = 0.0;
            for (auto i : idx) {
                sum += y_[i];
                sq += y_[i] * y_[i];
            }
            return std::max(0.0, sq - sum * sum / n);
        }
        std::fill(class_counts_.begin(), class_counts_.end(), 0.0);
        for (auto i : idx) {
            class_counts_[static_cast<std::size_t>(y_[i])] += 1.0;
        }
        double s = 0.0;
        for (double c : class_counts_) {
            s += c * c;
        }
        return n - s / n;
    }

    double leaf_value(std::span<const std::size_t> idx) {
        if (task_ == ForestTask::regression) {
            double sum = 0.0;
            for (auto i : idx) {
                sum += y_[i];
            }
            return sum / static_cast<double>(idx.size());
        }
        std::fill(class_counts_.begin(), class_counts_.end(), 0.0);
        for (auto i : idx) {
            class_counts_[static_cast<std::size_t>(y_[i])] += 1.0;
        }
        return static_cast<double>(std::max_element(class_counts_.begin(), class_counts_.end()) - class_counts_.begin());
    }

    std::int32_t grow(RandomForest::Tree& tree, std::vector<std::size_t>& idx, std::size_t depth) {
        const auto node_id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[node_id].value = leaf_value(idx);

        const double parent = scaled_impurity(idx);
        if (depth >= cfg_.max_depth || idx.size() < 2 * cfg_.min_leaf || parent <= 1e-12) {
            return node_id;
        }

        std::vector<std::size_t> features(p_);
        std::iota(features.begin(), features.end(), 0);
        for (std::size_t i = 0; i < mtry_; ++i) {
            std::swap(features[i], features[i + uniform_index(rng_, p_ - i)]);
        }

        double best_gain = 0.0;
        std::size_t best_feature = p_;
        double best_threshold = 0.0;
        std::vector<std::size_t> order = idx;
        const std::size_t n = idx.size();

        for (std::size_t fi = 0; fi < mtry_; ++fi) {
            const std::size_t f = features[fi];
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x_[a * p_ + f] < x_[b * p_ + f]; });
            const double lo = x_[order.front() * p_ + f];
            const double hi = x_[order.back() * p_ + f];
            if (!(lo < hi)) {
                continue;
            }
            if (task_ == ForestTask::regression) {
                double total = 0.0;
                double total_sq = 0.0;
                for (auto i : order) {
                    total += y_[i];
                    total_sq += y_[i] * y_[i];
                }
                double left = 0.0;
                double left_sq = 0.0;
                for (std::size_t s = 1; s < n; ++s) {
                    const double v = y_[order[s - 1]];
                    left += v;
                    left_sq += v * v;
                    if (s < cfg_.min_leaf || n - s < cfg_.min_leaf) {
                        continue;
                    }
                    const double xa = x_[order[s - 1] * p_ + f];
                    const double xb = x_[order[s] * p_ + f];
                    if (!(xa < xb)) {
                        continue;
                    }
                    const double nl = static_cast<double>(s);
                    const double nr = static_cast<double>(n - s);
                    const double sse_l = left_sq - left * left / nl;
                    const double right = total - left;
                    const double sse_r = (total_sq - left_sq) - right * right / nr;
                    const double gain = parent - sse_l - sse_r;
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_feature = f;
                        best_threshold = 0.5 * (xa + xb);
                    }
                }
            } else {
                std::vector<double> left_counts(n_classes_, 0.0);
                std::vector<double> total_counts(n_classes_, 0.0);
                for (auto i : order) {
                    total_counts[static_cast<std::size_t>(y_[i])] += 1.0;
                }
                double left_sq = 0.0;
                double right_sq = 0.0;
                for (double c : total_counts) {
                    right_sq += c * c;
                }
                for (std::size_t s = 1; s < n; ++s) {
                    const auto cls = static_cast<std::size_t>(y_[order[s - 1]]);
                    const double lc = left_counts[cls];
                    const double rc = total_counts[cls] - lc;
                    left_sq += 2.0 * lc + 1.0;
                    right_sq -= 2.0 * rc - 1.0;
                    left_counts[cls] = lc + 1.0;
                    if (s < cfg_.min_leaf || n - s < cfg_.min_leaf) {
                        continue;
                    }
                    const double xa = x_[order[s - 1] * p_ + f];
                    const double xb = x_[order[s] * p_ + f];
                    if (!(xa < xb)) {
                        continue;
                    }
                    const double nl = static_cast<double>(s);
                    const double nr = static_cast<double>(n - s);
                    const double gain = parent - (nl - left_sq / nl) - (nr - right_sq / nr);
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_feature = f;
                        best_threshold = 0.5 * (xa + xb);
                    }
                }
            }
        }

        if (best_feature == p_ || best_gain <= 1e-12 * std::max(1.0, parent)) {
            return node_id;
        }

        importance_[best_feature] += best_gain;
        std::vector<std::size_t> left_idx;
        std::vector<std::size_t> right_idx;
        for (auto i : idx) {
            (x_[i * p_ + best_feature] <= best_threshold ? left_idx : right_idx).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        tree.nodes[node_id].feature = static_cast<int>(best_feature);
        tree.nodes[node_id].threshold = best_threshold;
        const auto l = grow(tree, left_idx, depth + 1);
        const auto r = grow(tree, right_idx, depth + 1);
        tree.nodes[node_id].left = l;
        tree.nodes[node_id].right = r;
        return node_id;
    }

    std::span<const double> x_;
    std::size_t p_;
    std::span<const double> y_;
    ForestTask task_;
    std::size_t n_classes_;
    const ForestConfig& cfg_;
    std::size_t mtry_;
    Rng rng_;
    std::vector<double> importance_;
    std::vector<double> class_counts_;
};

RandomForest RandomForest::fit(std::span<const double> features, std::size_t n_features, std::span<const double> target,
                               ForestTask task, const ForestConfig& cfg) {
    cfg.validate();
    if (n_features == 0) {
        throw ContractError("forest needs at least one feature");
    }
    const std::size_t n = target.size();
    if (n == 0 || features.size() != n * n_features) {
        throw ContractError("forest feature matrix does not match the target length");
    }

    RandomForest forest;
    forest.task_ = task;
    forest.n_features_ = n_features;
    if (task == ForestTask::classification) {
        double max_class = 0.0;
        for (double v : target) {
            if (v < 0.0 || v != std::floor(v)) {
                throw ContractError("classification targets must be non-negative class ids");
            }
            max_class = std::max(max_class, v);
        }
        forest.n_classes_ = static_cast<std::size_t>(max_class) + 1;
    }

    std::size_t mtry = cfg.features_per_split;
    if (mtry == 0) {
        mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_features))));
    }
    mtry = std::clamp<std::size_t>(mtry, 1, n_features);

    forest.trees_.resize(cfg.n_trees);
    std::vector<std::vector<double>> per_tree(cfg.n_trees);
    const auto n_trees = static_cast<std::ptrdiff_t>(cfg.n_trees);

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t t = 0; t < n_trees; ++t) {
        const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(t));
        Rng boot(derive_seed(seed, 0xB007));
        std::vector<std::size_t> sample(n);
        for (auto& s : sample) {
            s = uniform_index(boot, n);
        }
        TreeBuilder builder(features, n_features, target, task, forest.n_classes_, cfg, mtry, derive_seed(seed, 1));
        forest.trees_[static_cast<std::size_t>(t)] = builder.build(std::move(sample));
        per_tree[static_cast<std::size_t>(t)] = builder.take_importance();
    }

    forest.importances_.assign(n_features, 0.0);
    for (auto& imp : per_tree) {
        const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
        if (total <= 0.0) {
            continue;
        }
        for (std::size_t f = 0; f < n_features; ++f) {
            forest.importances_[f] += imp[f] / total;
        }
    }
    const double total = std::accumulate(forest.importances_.begin(), forest.importances_.end(), 0.0);
    if (total > 0.0) {
        for (auto& v : forest.importances_) {
            v /= total;
        }
    }
    return forest;
}

double RandomForest::predict(std::span<const double> row) const {
    if (row.size() != n_features_) {
        throw ContractError("prediction row has the wrong number of features");
    }
    std::vector<double> votes(n_classes_, 0.0);
    double sum = 0.0;
    for (const auto& tree : trees_) {
        std::int32_t node = 0;
        while (tree.nodes[node].feature >= 0) {
            const auto& nd = tree.nodes[node];
            node = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        if (task_ == ForestTask::regression) {
            sum += tree.nodes[node].value;
        } else {
            votes[static_cast<std::size_t>(tree.nodes[node].value)] += 1.0;
        }
    }
    if (task_ == ForestTask::regression) {
        return sum / static_cast<double>(trees_.size());
    }
    return static_cast<double>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

} // namespace segkit
