#ifndef SEGKIT_FOREST_HPP
#define SEGKIT_FOREST_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace segkit {

struct ForestConfig {
    std::size_t n_trees = 50;
    std::size_t max_depth = 8;
    std::size_t min_leaf = 5;
    /// Candidate features per split; 0 means ceil(sqrt(n_features)).
    std::size_t features_per_split = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class ForestTask { regression, classification };

/**
 * Bagged CART ensemble. Regression trees split on variance reduction,
 * classification trees on Gini impurity. Feature importance is the mean
 * decrease in impurity, normalized per tree and then across the forest.
 *
 * Trees are grown independently from seeds derived from (seed, tree index),
 * so the fitted forest does not depend on how trees are scheduled.
 */
class RandomForest {
public:
    /// `features` is row-major, n_rows x n_features. Targets for classification are class ids 0..C-1.
    static RandomForest fit(std::span<const double> features, std::size_t n_features, std::span<const double> target,
                            ForestTask task, const ForestConfig& cfg);

    std::size_t n_features() const noexcept { return n_features_; }
    /// Non-negative, sums to 1 unless no tree found a useful split (then all zero).
    const std::vector<double>& feature_importances() const noexcept { return importances_; }

    /// Mean prediction (regression) or majority vote (classification).
    double predict(std::span<const double> row) const;

private:
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        double value = 0.0;
    };
    struct Tree {
        std::vector<Node> nodes;
    };

    friend class TreeBuilder;

    ForestTask task_ = ForestTask::regression;
    std::size_t n_features_ = 0;
    std::size_t n_classes_ = 0;
    std::vector<Tree> trees_;
    std::vector<double> importances_;
};

} // namespace segkit

#endif
