#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tarpbench/data.hpp"
#include "tarpbench/random.hpp"
#include "tarpbench/tarp.hpp"

namespace tarpbench {

/// One node of a TARP decision tree. Internal nodes carry a decision (which
/// may be constant after a rejected split); nodes at the last level carry
/// only the majority label used for prediction.
struct TarpNode {
    std::optional<TarpClassifier> decision;
    int majority_label = 0;
    std::size_t train_count = 0;
    std::size_t val_count = 0;
    double chosen_gini = 0.0;  // weighted-children Gini of the selected candidate
    bool fallback = false;     // split rejected by validation, threshold forced to +-inf
    std::unique_ptr<TarpNode> below;
    std::unique_ptr<TarpNode> above;

    bool is_leaf() const { return !below; }
};

/// Depth-k binary tree with an n-TARP decision at every internal node.
/// Rejected and degenerate splits keep growing "artificially": routing is
/// constant but the node still has depth-k descendants.
struct TarpTree {
    std::size_t depth = 0;       // k
    std::size_t candidates = 0;  // n per node
    std::unique_ptr<TarpNode> root;
    double training_time_s = 0.0;
    double testing_time_s = 0.0;

    int predict(std::span<const double> x) const;
    /// Prediction of the tree truncated after `level` decisions (level 0 is
    /// the root majority).
    int predict_at_level(std::span<const double> x, std::size_t level) const;
};

/// Grows a depth-k tree. At each node: draw n fresh projections, train each
/// TARP on the node's training data, keep the best by weighted-children Gini,
/// then reject the split (threshold to +-inf, keeping all data on the
/// training-majority side) if it increases the node's validation error over
/// predicting the node majority. Children with no training data become
/// constant nodes inheriting the parent majority.
///
/// The stream is consumed in pre-order (node candidates, then the below
/// subtree, then the above subtree), so identical (partition, n, k, stream
/// seed) reproduce the tree exactly.
TarpTree grow_tree(const LabeledDataset& dataset, const DataPartition& partition, std::size_t n,
                   std::size_t k, RandomStream& stream);

/// Fraction of test rows whose leaf majority label disagrees with the truth.
/// Records routing + prediction wall time in tree.testing_time_s.
double evaluate_tree(TarpTree& tree, const LabeledDataset& dataset,
                     std::span<const std::size_t> test_rows);

/// Misclassification of `rows` by the tree truncated after `level` decisions.
double error_at_level(const TarpTree& tree, const LabeledDataset& dataset,
                      std::span<const std::size_t> rows, std::size_t level);

nlohmann::json tree_to_json(const TarpTree& tree, bool diagnostics = false);

}  // namespace tarpbench
