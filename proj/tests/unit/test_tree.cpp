#include "doctest.h"

#include <cmath>
#include <set>

#include "phishlex/errors.hpp"
#include "phishlex/rng.hpp"
#include "phishlex/tree.hpp"
#include "support/synthetic.hpp"

using namespace phishlex;
using namespace phishlex::testsupport;

namespace {

// Dataset whose examples carry hand-set feature vectors.
LabeledDataset feature_table(const std::vector<std::pair<FeatureVector, Label>>& rows) {
    LabeledDataset ds;
    std::size_t i = 0;
    for (const auto& [features, label] : rows) {
        LabeledExample ex;
        ex.host = "row" + std::to_string(i++) + ".test";
        ex.parts = decompose(ex.host);
        ex.features = features;
        ex.label = label;
        ds.examples.push_back(std::move(ex));
    }
    return ds;
}

FeatureVector fv(std::size_t id, double value) {
    FeatureVector f;
    f.at_id(id) = value;
    return f;
}

FeatureVector fv2(double a, double b) {
    FeatureVector f;
    f.at_id(1) = a;
    f.at_id(2) = b;
    return f;
}

std::vector<std::size_t> all_indices(const LabeledDataset& ds) {
    std::vector<std::size_t> idx(ds.examples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        idx[i] = i;
    }
    return idx;
}

std::size_t count_leaves(const TreeNode& node) {
    if (node.is_leaf) {
        return 1;
    }
    return count_leaves(*node.left) + count_leaves(*node.right);
}

std::size_t depth_of(const TreeNode& node) {
    if (node.is_leaf) {
        return 0;
    }
    return 1 + std::max(depth_of(*node.left), depth_of(*node.right));
}

void collect_path_features(const TreeNode& node, const FeatureVector& x,
                           std::set<std::size_t>& out) {
    if (node.is_leaf) {
        return;
    }
    out.insert(node.feature_id);
    const TreeNode& next =
        x.at_id(node.feature_id) <= node.threshold ? *node.left : *node.right;
    collect_path_features(next, x, out);
}

double training_accuracy(const ForestModel& model, const LabeledDataset& ds) {
    std::size_t hits = 0;
    for (const auto& ex : ds.examples) {
        if (predict_forest(model, ex.features).label == ex.label) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(ds.examples.size());
}

} // namespace

TEST_SUITE("tree") {

TEST_CASE("gini on the worked pairs") {
    CHECK(gini(ClassCounts{10, 0}) == 0.0);
    CHECK(gini(ClassCounts{5, 5}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gini(ClassCounts{3, 1}) == doctest::Approx(0.375).epsilon(1e-12));
    CHECK_THROWS_AS(gini(ClassCounts{0, 0}), EmptyNodeError);
}

TEST_CASE("gini agrees with the two-class closed form on all pairs up to 50") {
    for (std::size_t a = 0; a <= 50; ++a) {
        for (std::size_t b = 0; a + b <= 50; ++b) {
            if (a + b == 0) {
                continue;
            }
            const double n = static_cast<double>(a + b);
            const double oracle = 2.0 * static_cast<double>(a) * static_cast<double>(b) / (n * n);
            CHECK(std::abs(gini(ClassCounts{a, b}) - oracle) < 1e-12);
        }
    }
}

TEST_CASE("gini stays within the two-class bound") {
    for (std::size_t a = 0; a <= 30; ++a) {
        for (std::size_t b = a > 0 ? 0u : 1u; b <= 30; ++b) {
            const double g = gini(ClassCounts{a, b});
            CHECK(g >= 0.0);
            CHECK(g <= 0.5 + 1e-12);
        }
    }
}

TEST_CASE("best_split finds the midpoint on separable 1-D data") {
    const auto ds = feature_table({{fv(1, 1.0), Label::Benign}, {fv(1, 2.0), Label::Malicious}});
    const auto idx = all_indices(ds);
    const std::size_t features[] = {1};
    const auto choice = best_split(ds, idx, features);
    REQUIRE(choice.has_value());
    CHECK(choice->feature_id == 1);
    CHECK(choice->threshold == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(choice->gain == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("best_split declines pure or constant nodes") {
    const auto pure = feature_table({{fv(1, 1.0), Label::Benign}, {fv(1, 2.0), Label::Benign}});
    const std::size_t features[] = {1};
    CHECK_FALSE(best_split(pure, all_indices(pure), features).has_value());

    const auto constant =
        feature_table({{fv(1, 3.0), Label::Benign}, {fv(1, 3.0), Label::Malicious}});
    CHECK_FALSE(best_split(constant, all_indices(constant), features).has_value());
}

TEST_CASE("best_split tie-breaks toward the lowest feature id") {
    // features 1 and 2 both split perfectly
    const auto ds = feature_table({{fv2(0.0, 0.0), Label::Benign},
                                   {fv2(0.0, 0.0), Label::Benign},
                                   {fv2(1.0, 1.0), Label::Malicious},
                                   {fv2(1.0, 1.0), Label::Malicious}});
    const std::size_t features[] = {2, 1};
    const auto choice = best_split(ds, all_indices(ds), features);
    REQUIRE(choice.has_value());
    CHECK(choice->feature_id == 1);
}

TEST_CASE("fit_tree leaves a pure node alone") {
    const auto ds = feature_table({{fv(1, 1.0), Label::Benign}, {fv(1, 2.0), Label::Benign}});
    auto rng = make_rng(0);
    const auto root = fit_tree(ds, all_indices(ds), TreeParams{}, rng);
    CHECK(root->is_leaf);
    CHECK(root->leaf_class == Label::Benign);
}

TEST_CASE("leaf majority ties resolve to benign") {
    const auto ds =
        feature_table({{fv(1, 1.0), Label::Benign}, {fv(1, 1.0), Label::Malicious}});
    auto rng = make_rng(0);
    const auto root = fit_tree(ds, all_indices(ds), TreeParams{}, rng);
    CHECK(root->is_leaf);
    CHECK(root->leaf_class == Label::Benign);
}

TEST_CASE("depth cap forces an underfit stump on xor-like data") {
    // uneven corner counts keep the first split's gain strictly positive;
    // perfectly symmetric xor has no single split that lowers impurity
    std::vector<std::pair<FeatureVector, Label>> rows;
    for (int rep = 0; rep < 5; ++rep) {
        rows.push_back({fv2(0, 0), Label::Benign});
    }
    for (int rep = 0; rep < 4; ++rep) {
        rows.push_back({fv2(1, 1), Label::Benign});
        rows.push_back({fv2(0, 1), Label::Malicious});
        rows.push_back({fv2(1, 0), Label::Malicious});
    }
    const auto ds = feature_table(rows);

    TreeParams stump_params;
    stump_params.max_depth = 1;
    auto rng = make_rng(0);
    const auto stump = fit_tree(ds, all_indices(ds), stump_params, rng);
    CHECK(depth_of(*stump) <= 1);

    ForestModel one_stump;
    one_stump.params.n_estimators = 1;
    one_stump.trees.push_back(fit_tree(ds, all_indices(ds), stump_params, rng));
    CHECK(training_accuracy(one_stump, ds) < 1.0);

    // unbounded depth separates the corners exactly
    TreeParams full;
    ForestModel deep;
    deep.params.n_estimators = 1;
    auto rng2 = make_rng(0);
    deep.trees.push_back(fit_tree(ds, all_indices(ds), full, rng2));
    CHECK(training_accuracy(deep, ds) == 1.0);

    // the perfectly symmetric grid is the documented greedy blind spot
    std::vector<std::pair<FeatureVector, Label>> grid;
    for (int rep = 0; rep < 4; ++rep) {
        grid.push_back({fv2(0, 0), Label::Benign});
        grid.push_back({fv2(1, 1), Label::Benign});
        grid.push_back({fv2(0, 1), Label::Malicious});
        grid.push_back({fv2(1, 0), Label::Malicious});
    }
    const auto symmetric = feature_table(grid);
    const std::size_t features[] = {1, 2};
    CHECK_FALSE(best_split(symmetric, all_indices(symmetric), features).has_value());
}

TEST_CASE("single unbounded tree memorizes separable data") {
    const LabeledDataset ds = synthetic_corpus(40, 21);
    ForestParams params;
    params.n_estimators = 1;
    params.bootstrap = false;
    const ForestModel model = fit_forest(ds, params);
    CHECK(training_accuracy(model, ds) == 1.0);
}

TEST_CASE("max_leaf_nodes caps growth best-first") {
    const LabeledDataset ds = synthetic_corpus(50, 5);
    TreeParams params;
    params.max_leaf_nodes = 3;
    auto rng = make_rng(9);
    const auto root = fit_tree(ds, all_indices(ds), params, rng);
    CHECK(count_leaves(*root) <= 3);
}

TEST_CASE("forest of one tree without bootstrap equals that tree") {
    const LabeledDataset ds = synthetic_corpus(30, 8);
    ForestParams params;
    params.n_estimators = 1;
    params.bootstrap = false;
    params.seed = 4;
    const ForestModel forest = fit_forest(ds, params);

    auto rng = make_rng(params.seed, 0);
    // burn the same draws fit_forest consumed before growing (none: bootstrap off)
    const auto tree = fit_tree(ds, all_indices(ds), params.tree, rng);
    for (const auto& ex : ds.examples) {
        const auto via_forest = predict_forest(forest, ex.features);
        const TreeNode* node = tree.get();
        while (!node->is_leaf) {
            node = ex.features.at_id(node->feature_id) <= node->threshold ? node->left.get()
                                                                          : node->right.get();
        }
        CHECK(via_forest.label == node->leaf_class);
    }
}

TEST_CASE("fit_forest is deterministic per seed") {
    const LabeledDataset ds = synthetic_corpus(60, 12);
    ForestParams params;
    params.n_estimators = 10;
    params.seed = 99;
    const ForestModel a = fit_forest(ds, params);
    const ForestModel b = fit_forest(ds, params);
    for (const auto& ex : ds.examples) {
        const auto pa = predict_forest(a, ex.features);
        const auto pb = predict_forest(b, ex.features);
        CHECK(pa.label == pb.label);
        CHECK(pa.votes.benign == pb.votes.benign);
        CHECK(pa.votes.malicious == pb.votes.malicious);
    }
    CHECK_THROWS_AS(fit_forest(LabeledDataset{}, params), EmptyDatasetError);
}

TEST_CASE("votes sum to n_estimators and ties go benign") {
    const LabeledDataset ds = synthetic_corpus(40, 3);
    for (std::size_t n : {1u, 2u, 7u, 10u}) {
        ForestParams params;
        params.n_estimators = n;
        params.seed = n;
        const ForestModel model = fit_forest(ds, params);
        for (const auto& ex : ds.examples) {
            const auto p = predict_forest(model, ex.features);
            CHECK(p.votes.benign + p.votes.malicious == n);
            if (p.votes.benign == p.votes.malicious) {
                CHECK(p.label == Label::Benign);
            }
        }
    }
}

TEST_CASE("perturbing off-path features never changes a prediction") {
    const LabeledDataset ds = synthetic_corpus(50, 17);
    ForestParams params;
    params.n_estimators = 1;
    params.bootstrap = false;
    params.tree.max_depth = 4;
    const ForestModel model = fit_forest(ds, params);

    auto rng = make_rng(40);
    for (const auto& ex : ds.examples) {
        std::set<std::size_t> path;
        collect_path_features(*model.trees[0], ex.features, path);
        FeatureVector nudged = ex.features;
        for (std::size_t id = 1; id <= kFeatureCount; ++id) {
            if (path.count(id) == 0) {
                nudged.at_id(id) += static_cast<double>(draw_below(rng, 100)) - 50.0;
            }
        }
        CHECK(predict_forest(model, nudged).label == predict_forest(model, ex.features).label);
    }
}

TEST_CASE("a forest of identical stumps predicts like one stump") {
    const auto ds = feature_table({{fv(3, 0.0), Label::Benign},
                                   {fv(3, 0.0), Label::Benign},
                                   {fv(3, 2.0), Label::Malicious},
                                   {fv(3, 2.0), Label::Malicious}});
    ForestParams one;
    one.n_estimators = 1;
    one.bootstrap = false;
    ForestParams five = one;
    five.n_estimators = 5;
    const ForestModel single = fit_forest(ds, one);
    const ForestModel quintet = fit_forest(ds, five);
    for (double v : {-1.0, 0.0, 1.0, 2.0, 3.0}) {
        CHECK(predict_forest(quintet, fv(3, v)).label ==
              predict_forest(single, fv(3, v)).label);
    }
}

TEST_CASE("importance of a stump concentrates on its feature") {
    const auto ds = feature_table({{fv(5, 0.0), Label::Benign},
                                   {fv(5, 0.0), Label::Benign},
                                   {fv(5, 1.0), Label::Malicious},
                                   {fv(5, 1.0), Label::Malicious}});
    ForestParams params;
    params.n_estimators = 1;
    params.bootstrap = false;
    const ForestModel model = fit_forest(ds, params);
    const auto importance = feature_importance(model);
    CHECK(importance[4] == doctest::Approx(1.0).epsilon(1e-12));
    double sum = 0.0;
    for (double v : importance) {
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("importance normalizes over a trained forest") {
    const LabeledDataset ds = synthetic_corpus(50, 2);
    ForestParams params;
    params.n_estimators = 10;
    params.seed = 6;
    const auto importance = feature_importance(fit_forest(ds, params));
    double sum = 0.0;
    for (double v : importance) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("the single informative feature ranks first") {
    const LabeledDataset ds = single_informative_feature(100, 4, 31);
    ForestParams params;
    params.n_estimators = 10;
    params.seed = 31;
    const auto importance = feature_importance(fit_forest(ds, params));
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < importance.size(); ++i) {
        if (importance[i] > importance[argmax]) {
            argmax = i;
        }
    }
    CHECK(argmax == 3); // feature id 4
}

TEST_CASE("a forest with no usable splits reports all-zero importance") {
    const auto ds =
        feature_table({{fv(1, 1.0), Label::Benign}, {fv(1, 1.0), Label::Malicious}});
    ForestParams params;
    params.n_estimators = 3;
    params.bootstrap = false;
    const auto importance = feature_importance(fit_forest(ds, params));
    for (double v : importance) {
        CHECK(v == 0.0);
    }
}

} // TEST_SUITE
