#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "rashodet/dataset.hpp"
#include "rashodet/errors.hpp"

namespace rashodet {

enum class ModelFamily { decision_tree, random_forest, gradient_boosting, logistic_regression };

inline std::string_view family_name(ModelFamily family) {
    switch (family) {
    case ModelFamily::decision_tree: return "decision_tree";
    case ModelFamily::random_forest: return "random_forest";
    case ModelFamily::gradient_boosting: return "gradient_boosting";
    case ModelFamily::logistic_regression: return "logistic_regression";
    }
    return "";
}

inline ModelFamily family_from_name(std::string_view name) {
    if (name == "decision_tree") return ModelFamily::decision_tree;
    if (name == "random_forest") return ModelFamily::random_forest;
    if (name == "gradient_boosting") return ModelFamily::gradient_boosting;
    if (name == "logistic_regression") return ModelFamily::logistic_regression;
    throw Error(ErrorCode::bad_argument, "unknown model family '" + std::string(name) + "'");
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Internal node when feature >= 0, leaf otherwise. Numeric splits send
// value <= threshold left; categorical splits send codes listed in
// left_categories left and everything else (unseen codes included) right.
struct TreeNode {
    int feature = -1;
    bool categorical = false;
    double threshold = 0.0;
    std::vector<int> left_categories;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;

    template <typename Acc>
    double predict(Acc&& value_at) const {
        int idx = 0;
        while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
            const TreeNode& node = nodes[static_cast<std::size_t>(idx)];
            const double v = value_at(static_cast<std::size_t>(node.feature));
            bool go_left;
            if (node.categorical) {
                go_left = std::binary_search(node.left_categories.begin(),
                                             node.left_categories.end(), static_cast<int>(v));
            } else {
                go_left = v <= node.threshold;
            }
            idx = go_left ? node.left : node.right;
        }
        return nodes[static_cast<std::size_t>(idx)].value;
    }
};

struct ForestState {
    std::vector<Tree> trees;
};

struct BoostState {
    std::vector<Tree> trees;
    double base_margin = 0.0;
    double learning_rate = 0.1;
};

// Raw-scale linear model over the original variables: numeric variables use
// one weight, categorical variables one weight per category code; codes not
// seen in training contribute nothing.
struct LinearState {
    double intercept = 0.0;
    std::vector<double> weights;
    std::vector<std::uint32_t> slot_offsets;
    std::vector<std::uint32_t> slot_counts;
};

using ModelState = std::variant<Tree, ForestState, BoostState, LinearState>;

struct PredictiveModel {
    std::string id;
    ModelFamily family = ModelFamily::decision_tree;
    std::map<std::string, double> hyperparameters;
    std::vector<std::string> feature_names;
    ModelState state;

    template <typename Acc>
    double score_with(Acc&& value_at) const {
        if (const Tree* tree = std::get_if<Tree>(&state)) {
            return tree->predict(value_at);
        }
        if (const ForestState* forest = std::get_if<ForestState>(&state)) {
            double sum = 0.0;
            for (const Tree& tree : forest->trees) sum += tree.predict(value_at);
            return sum / static_cast<double>(forest->trees.size());
        }
        if (const BoostState* boost = std::get_if<BoostState>(&state)) {
            double margin = boost->base_margin;
            for (const Tree& tree : boost->trees) {
                margin += boost->learning_rate * tree.predict(value_at);
            }
            return sigmoid(margin);
        }
        const LinearState& linear = std::get<LinearState>(state);
        double z = linear.intercept;
        for (std::size_t j = 0; j < linear.slot_offsets.size(); ++j) {
            const std::uint32_t offset = linear.slot_offsets[j];
            const std::uint32_t count = linear.slot_counts[j];
            const double v = value_at(j);
            if (count == 1) {
                z += linear.weights[offset] * v;
            } else {
                const auto code = static_cast<std::int64_t>(v);
                if (code >= 0 && code < static_cast<std::int64_t>(count)) {
                    z += linear.weights[offset + static_cast<std::uint32_t>(code)];
                }
            }
        }
        return sigmoid(z);
    }

    double score_row(const Dataset& data, std::size_t row) const {
        return score_with([&](std::size_t j) { return data.columns[j][row]; });
    }

    // Score a row with one variable's value replaced, the elementary query
    // behind partial dependence.
    double score_replaced(const Dataset& data, std::size_t row, std::size_t variable,
                          double z) const {
        return score_with(
            [&](std::size_t j) { return j == variable ? z : data.columns[j][row]; });
    }

    std::vector<double> score_all(const Dataset& data) const {
        std::vector<double> out(data.n());
        for (std::size_t i = 0; i < data.n(); ++i) out[i] = score_row(data, i);
        return out;
    }
};

} // namespace rashodet
