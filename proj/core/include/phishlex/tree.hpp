#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "phishlex/dataset.hpp"

namespace phishlex {

struct TreeParams {
    std::optional<std::size_t> max_depth;      // nullopt = unbounded
    std::optional<std::size_t> max_features;   // nullopt = all 21
    std::size_t min_samples_split = 2;
    std::optional<std::size_t> max_leaf_nodes; // nullopt = unbounded
};

struct ClassCounts {
    std::size_t benign = 0;
    std::size_t malicious = 0;

    std::size_t total() const { return benign + malicious; }
};

// Binary CART node. Decision nodes keep their class counts so importance
// can be recovered from a stored tree without the training data.
struct TreeNode {
    bool is_leaf = true;
    ClassCounts counts;

    // leaf
    Label leaf_class = Label::Benign;

    // decision: x[feature_id] <= threshold routes left
    std::size_t feature_id = 0; // 1-21
    double threshold = 0.0;
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;
};

struct ForestParams {
    std::size_t n_estimators = 10;
    TreeParams tree;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

struct ForestModel {
    std::vector<std::unique_ptr<TreeNode>> trees;
    ForestParams params;
};

struct Votes {
    std::size_t benign = 0;
    std::size_t malicious = 0;
};

struct ForestPrediction {
    Label label = Label::Benign;
    Votes votes;
};

struct SplitChoice {
    std::size_t feature_id = 0;
    double threshold = 0.0;
    double gain = 0.0; // impurity decrease at the node
};

// 1 - sum(p_k^2) over the two class proportions. Throws EmptyNodeError when
// both counts are zero.
double gini(const ClassCounts& counts);

// Scans candidate features for the threshold (midpoint between consecutive
// distinct values) minimizing weighted child impurity. Ties break toward the
// lowest feature id, then the lowest threshold. nullopt when nothing
// strictly decreases impurity.
std::optional<SplitChoice> best_split(const LabeledDataset& ds,
                                      std::span<const std::size_t> idx,
                                      std::span<const std::size_t> candidate_features);

// Grows one CART tree over the given sample indices. Prediction ties and
// leaf-majority ties resolve to Benign.
std::unique_ptr<TreeNode> fit_tree(const LabeledDataset& ds,
                                   std::span<const std::size_t> idx,
                                   const TreeParams& params,
                                   std::mt19937_64& rng);

// Trains n_estimators trees, each on a bootstrap resample (when enabled)
// with an rng substream derived from (seed, tree index). Deterministic for a
// fixed seed regardless of thread scheduling.
ForestModel fit_forest(const LabeledDataset& train, const ForestParams& params);

ForestPrediction predict_forest(const ForestModel& model, const FeatureVector& x);

// Mean decrease in impurity per feature, averaged over trees and normalized
// to sum 1. All zeros when no tree ever split.
std::array<double, kFeatureCount> feature_importance(const ForestModel& model);

} // namespace phishlex
