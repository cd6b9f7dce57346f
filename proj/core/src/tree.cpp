#include "phishlex/tree.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "phishlex/errors.hpp"
#include "phishlex/rng.hpp"

namespace phishlex {

namespace {

constexpr double kMinGain = 1e-12;

ClassCounts count_labels(const LabeledDataset& ds, std::span<const std::size_t> idx) {
    ClassCounts c;
    for (std::size_t i : idx) {
        if (ds.examples[i].label == Label::Malicious) {
            ++c.malicious;
        } else {
            ++c.benign;
        }
    }
    return c;
}

Label majority(const ClassCounts& c) {
    return c.malicious > c.benign ? Label::Malicious : Label::Benign;
}

// k distinct feature ids, ascending. No draw when every feature qualifies.
std::vector<std::size_t> sample_features(std::mt19937_64& rng,
                                         const std::optional<std::size_t>& max_features) {
    std::vector<std::size_t> pool(kFeatureCount);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        pool[i] = i + 1;
    }
    if (!max_features || *max_features >= kFeatureCount) {
        return pool;
    }
    const std::size_t k = std::max<std::size_t>(1, *max_features);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + draw_below(rng, pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

struct GrowContext {
    const LabeledDataset& ds;
    const TreeParams& params;
    std::mt19937_64& rng;
    double root_size = 0.0;
};

bool splittable(const GrowContext& ctx, const ClassCounts& counts, std::size_t size,
                std::size_t depth) {
    if (counts.benign == 0 || counts.malicious == 0) {
        return false;
    }
    if (size < ctx.params.min_samples_split) {
        return false;
    }
    if (ctx.params.max_depth && depth >= *ctx.params.max_depth) {
        return false;
    }
    return true;
}

// Stable partition by the split predicate.
void partition(const GrowContext& ctx, std::span<const std::size_t> idx, const SplitChoice& split,
               std::vector<std::size_t>& left, std::vector<std::size_t>& right) {
    for (std::size_t i : idx) {
        const double v = ctx.ds.examples[i].features.at_id(split.feature_id);
        (v <= split.threshold ? left : right).push_back(i);
    }
}

std::unique_ptr<TreeNode> make_leaf(const ClassCounts& counts) {
    auto node = std::make_unique<TreeNode>();
    node->counts = counts;
    node->leaf_class = majority(counts);
    return node;
}

std::unique_ptr<TreeNode> grow_depth_first(GrowContext& ctx, std::span<const std::size_t> idx,
                                           std::size_t depth) {
    const ClassCounts counts = count_labels(ctx.ds, idx);
    if (!splittable(ctx, counts, idx.size(), depth)) {
        return make_leaf(counts);
    }
    const auto candidates = sample_features(ctx.rng, ctx.params.max_features);
    const auto split = best_split(ctx.ds, idx, candidates);
    if (!split) {
        return make_leaf(counts);
    }
    std::vector<std::size_t> left_idx;
    std::vector<std::size_t> right_idx;
    partition(ctx, idx, *split, left_idx, right_idx);

    auto node = std::make_unique<TreeNode>();
    node->is_leaf = false;
    node->counts = counts;
    node->leaf_class = majority(counts);
    node->feature_id = split->feature_id;
    node->threshold = split->threshold;
    node->left = grow_depth_first(ctx, left_idx, depth + 1);
    node->right = grow_depth_first(ctx, right_idx, depth + 1);
    return node;
}

// Best-first growth for a bounded leaf budget: the frontier expands the
// candidate with the largest weighted impurity decrease first.
struct Frontier {
    TreeNode* node;
    std::vector<std::size_t> idx;
    std::size_t depth;
    SplitChoice split;
    double improvement;
    std::size_t seq;
};

std::unique_ptr<TreeNode> grow_best_first(GrowContext& ctx, std::span<const std::size_t> idx) {
    auto root = make_leaf(count_labels(ctx.ds, idx));
    std::vector<Frontier> frontier;
    std::size_t next_seq = 0;

    auto consider = [&](TreeNode* node, std::vector<std::size_t> node_idx, std::size_t depth) {
        if (!splittable(ctx, node->counts, node_idx.size(), depth)) {
            return;
        }
        const auto candidates = sample_features(ctx.rng, ctx.params.max_features);
        const auto split = best_split(ctx.ds, node_idx, candidates);
        if (!split) {
            return;
        }
        const double improvement =
            static_cast<double>(node_idx.size()) / ctx.root_size * split->gain;
        frontier.push_back(
            Frontier{node, std::move(node_idx), depth, *split, improvement, next_seq++});
    };

    std::vector<std::size_t> root_idx(idx.begin(), idx.end());
    consider(root.get(), std::move(root_idx), 0);

    std::size_t leaves = 1;
    while (leaves < *ctx.params.max_leaf_nodes && !frontier.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < frontier.size(); ++i) {
            if (frontier[i].improvement > frontier[best].improvement) {
                best = i;
            }
        }
        Frontier item = std::move(frontier[best]);
        frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(best));

        std::vector<std::size_t> left_idx;
        std::vector<std::size_t> right_idx;
        partition(ctx, item.idx, item.split, left_idx, right_idx);

        TreeNode* node = item.node;
        node->is_leaf = false;
        node->feature_id = item.split.feature_id;
        node->threshold = item.split.threshold;
        node->left = make_leaf(count_labels(ctx.ds, left_idx));
        node->right = make_leaf(count_labels(ctx.ds, right_idx));
        ++leaves;

        consider(node->left.get(), std::move(left_idx), item.depth + 1);
        consider(node->right.get(), std::move(right_idx), item.depth + 1);
    }
    return root;
}

void accumulate_importance(const TreeNode& node, double root_size,
                           std::array<double, kFeatureCount>& raw) {
    if (node.is_leaf) {
        return;
    }
    const double n = static_cast<double>(node.counts.total());
    const double nl = static_cast<double>(node.left->counts.total());
    const double nr = static_cast<double>(node.right->counts.total());
    const double decrease = gini(node.counts) - (nl / n) * gini(node.left->counts) -
                            (nr / n) * gini(node.right->counts);
    raw[node.feature_id - 1] += (n / root_size) * decrease;
    accumulate_importance(*node.left, root_size, raw);
    accumulate_importance(*node.right, root_size, raw);
}

} // namespace

double gini(const ClassCounts& counts) {
    const std::size_t total = counts.total();
    if (total == 0) {
        throw EmptyNodeError("gini of an empty node");
    }
    const double pb = static_cast<double>(counts.benign) / static_cast<double>(total);
    const double pm = static_cast<double>(counts.malicious) / static_cast<double>(total);
    return 1.0 - pb * pb - pm * pm;
}

std::optional<SplitChoice> best_split(const LabeledDataset& ds,
                                      std::span<const std::size_t> idx,
                                      std::span<const std::size_t> candidate_features) {
    const ClassCounts parent = count_labels(ds, idx);
    const double n = static_cast<double>(parent.total());
    const double parent_impurity = gini(parent);

    std::vector<std::size_t> features(candidate_features.begin(), candidate_features.end());
    std::sort(features.begin(), features.end());

    std::optional<SplitChoice> best;
    double best_weighted = parent_impurity;

    std::vector<std::pair<double, Label>> column(idx.size());
    for (std::size_t f : features) {
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const LabeledExample& ex = ds.examples[idx[i]];
            column[i] = {ex.features.at_id(f), ex.label};
        }
        std::sort(column.begin(), column.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        ClassCounts left;
        for (std::size_t i = 0; i + 1 < column.size(); ++i) {
            if (column[i].second == Label::Malicious) {
                ++left.malicious;
            } else {
                ++left.benign;
            }
            if (column[i].first == column[i + 1].first) {
                continue;
            }
            double threshold = (column[i].first + column[i + 1].first) / 2.0;
            if (threshold >= column[i + 1].first) {
                // adjacent doubles: the midpoint is not representable between
                // them, so split exactly at the lower value
                threshold = column[i].first;
            }
            const ClassCounts right{parent.benign - left.benign,
                                    parent.malicious - left.malicious};
            const double nl = static_cast<double>(left.total());
            const double nr = static_cast<double>(right.total());
            const double weighted = (nl / n) * gini(left) + (nr / n) * gini(right);
            if (weighted < best_weighted - kMinGain) {
                best_weighted = weighted;
                best = SplitChoice{f, threshold, parent_impurity - weighted};
            }
        }
    }
    return best;
}

std::unique_ptr<TreeNode> fit_tree(const LabeledDataset& ds,
                                   std::span<const std::size_t> idx,
                                   const TreeParams& params,
                                   std::mt19937_64& rng) {
    GrowContext ctx{ds, params, rng, static_cast<double>(idx.size())};
    if (params.max_leaf_nodes) {
        return grow_best_first(ctx, idx);
    }
    return grow_depth_first(ctx, idx, 0);
}

ForestModel fit_forest(const LabeledDataset& train, const ForestParams& params) {
    if (train.count(Label::Benign) == 0 || train.count(Label::Malicious) == 0) {
        throw EmptyDatasetError("forest training needs both classes");
    }
    const std::size_t n = train.examples.size();

    ForestModel model;
    model.params = params;
    model.trees.resize(params.n_estimators);

    auto train_one = [&](std::size_t t) {
        auto rng = make_rng(params.seed, t);
        std::vector<std::size_t> idx(n);
        if (params.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) {
                idx[i] = draw_below(rng, n);
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                idx[i] = i;
            }
        }
        model.trees[t] = fit_tree(train, idx, params.tree, rng);
    };

    const std::size_t workers =
        std::min<std::size_t>(params.n_estimators,
                              std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1 || params.n_estimators <= 1) {
        for (std::size_t t = 0; t < params.n_estimators; ++t) {
            train_one(t);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t t = next.fetch_add(1); t < params.n_estimators;
                     t = next.fetch_add(1)) {
                    train_one(t);
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    return model;
}

ForestPrediction predict_forest(const ForestModel& model, const FeatureVector& x) {
    ForestPrediction out;
    for (const auto& tree : model.trees) {
        const TreeNode* node = tree.get();
        while (!node->is_leaf) {
            node = x.at_id(node->feature_id) <= node->threshold ? node->left.get()
                                                                : node->right.get();
        }
        if (node->leaf_class == Label::Malicious) {
            ++out.votes.malicious;
        } else {
            ++out.votes.benign;
        }
    }
    out.label = out.votes.malicious > out.votes.benign ? Label::Malicious : Label::Benign;
    return out;
}

std::array<double, kFeatureCount> feature_importance(const ForestModel& model) {
    std::array<double, kFeatureCount> acc{};
    for (const auto& tree : model.trees) {
        std::array<double, kFeatureCount> raw{};
        accumulate_importance(*tree, static_cast<double>(tree->counts.total()), raw);
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            acc[i] += raw[i];
        }
    }
    const double trees = static_cast<double>(model.trees.size());
    double sum = 0.0;
    for (double& v : acc) {
        v /= trees;
        sum += v;
    }
    if (sum > 0.0) {
        for (double& v : acc) {
            v /= sum;
        }
    }
    return acc;
}

} // namespace phishlex
