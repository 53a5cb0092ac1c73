#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hinmine/feature_table.hpp"

namespace hinmine {

struct ForestParams {
    std::uint32_t n_trees = 200;
    std::int32_t max_depth = -1; // negative: unlimited
    std::uint32_t mtry = 0;      // 0: ceil(sqrt(#columns))
    std::uint32_t min_leaf = 1;
    bool bootstrap = true;
    std::uint64_t seed = 0;
    std::uint32_t workers = 1;
};

/// Binary decision tree with axis-aligned threshold splits. Nodes are kept
/// in preorder; rows with value < threshold go left.
struct TreeNode {
    bool is_leaf = true;
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double leaf_fraction = 0.0;     // positive-class fraction at the leaf
    double importance_contrib = 0.0; // weighted Gini decrease at this split
};

struct Tree {
    std::vector<TreeNode> nodes;
};

struct ForestModel {
    std::vector<Tree> trees;
    std::vector<std::string> columns;
    ForestParams params;

    double score_row(std::span<const double> row) const;
};

/// Downsamples the majority class uniformly to the minority count,
/// preserving original row order. Both classes must be nonempty.
FeatureTable balance_classes(const FeatureTable& t, std::uint64_t seed);

/// Trains a Gini random forest. Split thresholds are midpoints between
/// consecutive distinct sorted values of the sampled column; ties between
/// splits break toward the lowest column index, then the lowest threshold.
/// Trees derive independent seeds from (seed, tree index), so results do
/// not depend on the worker count.
ForestModel train_forest(const FeatureTable& t, const ForestParams& params);

/// Mean of per-tree leaf fractions, one score per row. Requires the table's
/// column sequence to match the training table.
std::vector<double> forest_predict(const ForestModel& m, const FeatureTable& t);

/// Mann-Whitney AUC with half credit for tied score pairs; exact pair
/// counting in integer arithmetic. Both classes must be present.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Total Gini impurity decrease per column across all trees, normalized to
/// sum 1 (all zeros when the forest has no splits). Descending, ties by
/// column index.
std::vector<std::pair<std::string, double>> feature_importances(const ForestModel& m);

/// Structured-text model format: one tree per block, preorder node list.
void write_forest(const std::filesystem::path& path, const ForestModel& m);
ForestModel read_forest(const std::filesystem::path& path);

} // namespace hinmine
