#include "tarpbench/tree.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "tarpbench/errors.hpp"

namespace tarpbench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int majority_label(const LabeledDataset& dataset, std::span<const std::size_t> rows,
                   int parent_majority) {
    if (rows.empty()) return parent_majority;
    std::size_t ones = 0;
    for (std::size_t i : rows) ones += static_cast<std::size_t>(dataset.label(i));
    const std::size_t zeros = rows.size() - ones;
    return ones > zeros ? 1 : 0;  // tie goes to class 0
}

std::array<std::size_t, 2> count_classes(const LabeledDataset& dataset,
                                         std::span<const std::size_t> rows) {
    std::array<std::size_t, 2> counts{0, 0};
    for (std::size_t i : rows) ++counts[static_cast<std::size_t>(dataset.label(i))];
    return counts;
}

struct Grower {
    const LabeledDataset& dataset;
    std::size_t n;
    std::size_t k;
    RandomStream& stream;

    std::unique_ptr<TarpNode> grow(std::size_t level, std::vector<std::size_t> train_rows,
                                   std::vector<std::size_t> val_rows, int parent_majority) {
        auto node = std::make_unique<TarpNode>();
        node->train_count = train_rows.size();
        node->val_count = val_rows.size();
        node->majority_label = majority_label(dataset, train_rows, parent_majority);

        if (level == k) return node;  // leaf region

        const auto counts = count_classes(dataset, train_rows);
        const bool splittable = counts[0] >= 2 && counts[1] >= 2;

        TarpClassifier decision;
        double chosen_gini = train_rows.empty() ? 0.0 : gini_impurity(counts[0], counts[1]);
        bool fallback = false;

        if (splittable) {
            std::vector<int> labels(train_rows.size());
            for (std::size_t i = 0; i < train_rows.size(); ++i)
                labels[i] = dataset.label(train_rows[i]);

            std::vector<ProjectionVector> projections;
            std::vector<TarpParams> params;
            projections.reserve(n);
            params.reserve(n);
            for (std::size_t c = 0; c < n; ++c) {
                projections.push_back(sample_projection(dataset.cols(), stream));
                const auto values = project(dataset, train_rows, projections.back());
                params.push_back(train_tarp(values, labels));
            }
            const std::size_t best = select_best_tarp(params);
            decision.projection = std::move(projections[best]);
            decision.threshold = params[best].threshold;
            decision.class_below = params[best].class_below;
            chosen_gini = params[best].weighted_gini;

            if (params[best].split && !val_rows.empty()) {
                // Children predict their own training-majority labels during
                // the comparison, exactly as the final tree will.
                std::array<std::size_t, 2> below_counts{0, 0};
                std::array<std::size_t, 2> above_counts{0, 0};
                for (std::size_t i = 0; i < train_rows.size(); ++i) {
                    const auto cls = static_cast<std::size_t>(labels[i]);
                    if (decision.routes_below(dataset.row(train_rows[i])))
                        ++below_counts[cls];
                    else
                        ++above_counts[cls];
                }
                const auto side_majority = [&](const std::array<std::size_t, 2>& c) {
                    if (c[0] + c[1] == 0) return node->majority_label;
                    return c[1] > c[0] ? 1 : 0;
                };
                const int below_label = side_majority(below_counts);
                const int above_label = side_majority(above_counts);

                std::size_t prior_wrong = 0;
                std::size_t post_wrong = 0;
                for (std::size_t i : val_rows) {
                    const int truth = dataset.label(i);
                    if (truth != node->majority_label) ++prior_wrong;
                    const int predicted =
                        decision.routes_below(dataset.row(i)) ? below_label : above_label;
                    if (truth != predicted) ++post_wrong;
                }
                if (post_wrong > prior_wrong) {
                    // Reject: constant routing, all data stays with the
                    // training-majority side.
                    decision.threshold = decision.class_below == node->majority_label
                                             ? std::numeric_limits<double>::infinity()
                                             : -std::numeric_limits<double>::infinity();
                    fallback = true;
                }
            }
        } else {
            decision.threshold = std::numeric_limits<double>::infinity();
            decision.class_below = node->majority_label;
        }

        std::vector<std::size_t> train_below, train_above, val_below, val_above;
        for (std::size_t i : train_rows) {
            (decision.routes_below(dataset.row(i)) ? train_below : train_above).push_back(i);
        }
        for (std::size_t i : val_rows) {
            (decision.routes_below(dataset.row(i)) ? val_below : val_above).push_back(i);
        }

        node->decision = std::move(decision);
        node->chosen_gini = chosen_gini;
        node->fallback = fallback;
        node->below = grow(level + 1, std::move(train_below), std::move(val_below),
                           node->majority_label);
        node->above = grow(level + 1, std::move(train_above), std::move(val_above),
                           node->majority_label);
        return node;
    }
};

const TarpNode* descend(const TarpNode* node, std::span<const double> x, std::size_t max_steps) {
    std::size_t steps = 0;
    while (!node->is_leaf() && steps < max_steps) {
        node = node->decision->routes_below(x) ? node->below.get() : node->above.get();
        ++steps;
    }
    return node;
}

}  // namespace

int TarpTree::predict(std::span<const double> x) const {
    return descend(root.get(), x, depth)->majority_label;
}

int TarpTree::predict_at_level(std::span<const double> x, std::size_t level) const {
    return descend(root.get(), x, std::min(level, depth))->majority_label;
}

TarpTree grow_tree(const LabeledDataset& dataset, const DataPartition& partition, std::size_t n,
                   std::size_t k, RandomStream& stream) {
    if (n < 1) throw ParameterError("candidate count n must be at least 1");
    if (k < 1) throw ParameterError("tree depth k must be at least 1");
    if (partition.train_idx.empty()) throw DataError("training set is empty");
    for (const auto& idx : {partition.train_idx, partition.val_idx, partition.test_idx})
        for (std::size_t i : idx)
            if (i >= dataset.rows())
                throw DimensionError("partition index " + std::to_string(i) + " out of range");

    TarpTree tree;
    tree.depth = k;
    tree.candidates = n;
    const auto start = Clock::now();
    Grower grower{dataset, n, k, stream};
    const int root_majority = majority_label(dataset, partition.train_idx, 0);
    tree.root = grower.grow(0, partition.train_idx, partition.val_idx, root_majority);
    tree.training_time_s = seconds_since(start);
    return tree;
}

double evaluate_tree(TarpTree& tree, const LabeledDataset& dataset,
                     std::span<const std::size_t> test_rows) {
    if (test_rows.empty()) throw ValueError("test set is empty");
    const auto start = Clock::now();
    std::size_t wrong = 0;
    for (std::size_t i : test_rows)
        if (tree.predict(dataset.row(i)) != dataset.label(i)) ++wrong;
    tree.testing_time_s = seconds_since(start);
    return static_cast<double>(wrong) / static_cast<double>(test_rows.size());
}

double error_at_level(const TarpTree& tree, const LabeledDataset& dataset,
                      std::span<const std::size_t> rows, std::size_t level) {
    if (rows.empty()) throw ValueError("cannot evaluate an empty subset");
    std::size_t wrong = 0;
    for (std::size_t i : rows)
        if (tree.predict_at_level(dataset.row(i), level) != dataset.label(i)) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(rows.size());
}

namespace {

nlohmann::json node_to_json(const TarpNode& node, bool diagnostics) {
    nlohmann::json j;
    j["majority_label"] = node.majority_label;
    if (node.decision) j["decision"] = *node.decision;
    if (diagnostics) {
        j["train_count"] = node.train_count;
        j["val_count"] = node.val_count;
        j["fallback"] = node.fallback;
        j["chosen_gini"] = node.chosen_gini;
    }
    if (!node.is_leaf()) {
        j["below"] = node_to_json(*node.below, diagnostics);
        j["above"] = node_to_json(*node.above, diagnostics);
    }
    return j;
}

}  // namespace

nlohmann::json tree_to_json(const TarpTree& tree, bool diagnostics) {
    nlohmann::json j;
    j["depth"] = tree.depth;
    j["candidates"] = tree.candidates;
    j["training_time_s"] = tree.training_time_s;
    j["testing_time_s"] = tree.testing_time_s;
    j["root"] = node_to_json(*tree.root, diagnostics);
    return j;
}

}  // namespace tarpbench
