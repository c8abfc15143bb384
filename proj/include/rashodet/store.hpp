#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rashodet/errors.hpp"
#include "rashodet/learners.hpp"
#include "rashodet/model.hpp"

namespace rashodet {

inline constexpr int kModelStoreVersion = 1;

namespace detail {

inline nlohmann::json tree_to_json(const Tree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& node : tree.nodes) {
        nlohmann::json j{{"feature", node.feature},
                         {"value", node.value}};
        if (node.feature >= 0) {
            j["left"] = node.left;
            j["right"] = node.right;
            if (node.categorical) j["left_categories"] = node.left_categories;
            else j["threshold"] = node.threshold;
        }
        nodes.push_back(std::move(j));
    }
    return nlohmann::json{{"nodes", std::move(nodes)}};
}

inline Tree tree_from_json(const nlohmann::json& j) {
    Tree tree;
    for (const auto& nj : j.at("nodes")) {
        TreeNode node;
        node.feature = nj.at("feature").get<int>();
        node.value = nj.at("value").get<double>();
        if (node.feature >= 0) {
            node.left = nj.at("left").get<int>();
            node.right = nj.at("right").get<int>();
            if (nj.contains("left_categories")) {
                node.categorical = true;
                node.left_categories = nj.at("left_categories").get<std::vector<int>>();
            } else {
                node.threshold = nj.at("threshold").get<double>();
            }
        }
        tree.nodes.push_back(std::move(node));
    }
    return tree;
}

inline nlohmann::json state_to_json(const PredictiveModel& model) {
    if (const Tree* tree = std::get_if<Tree>(&model.state)) {
        return nlohmann::json{{"tree", tree_to_json(*tree)}};
    }
    if (const ForestState* forest = std::get_if<ForestState>(&model.state)) {
        nlohmann::json trees = nlohmann::json::array();
        for (const Tree& t : forest->trees) trees.push_back(tree_to_json(t));
        return nlohmann::json{{"trees", std::move(trees)}};
    }
    if (const BoostState* boost = std::get_if<BoostState>(&model.state)) {
        nlohmann::json trees = nlohmann::json::array();
        for (const Tree& t : boost->trees) trees.push_back(tree_to_json(t));
        return nlohmann::json{{"trees", std::move(trees)},
                              {"base_margin", boost->base_margin},
                              {"learning_rate", boost->learning_rate}};
    }
    const LinearState& linear = std::get<LinearState>(model.state);
    return nlohmann::json{{"intercept", linear.intercept},
                          {"weights", linear.weights},
                          {"slot_offsets", linear.slot_offsets},
                          {"slot_counts", linear.slot_counts}};
}

inline ModelState state_from_json(ModelFamily family, const nlohmann::json& j) {
    switch (family) {
    case ModelFamily::decision_tree:
        return tree_from_json(j.at("tree"));
    case ModelFamily::random_forest: {
        ForestState forest;
        for (const auto& tj : j.at("trees")) forest.trees.push_back(tree_from_json(tj));
        return forest;
    }
    case ModelFamily::gradient_boosting: {
        BoostState boost;
        for (const auto& tj : j.at("trees")) boost.trees.push_back(tree_from_json(tj));
        boost.base_margin = j.at("base_margin").get<double>();
        boost.learning_rate = j.at("learning_rate").get<double>();
        return boost;
    }
    case ModelFamily::logistic_regression: {
        LinearState linear;
        linear.intercept = j.at("intercept").get<double>();
        linear.weights = j.at("weights").get<std::vector<double>>();
        linear.slot_offsets = j.at("slot_offsets").get<std::vector<std::uint32_t>>();
        linear.slot_counts = j.at("slot_counts").get<std::vector<std::uint32_t>>();
        return linear;
    }
    }
    throw Error(ErrorCode::corrupt_payload, "unrecognized model family");
}

} // namespace detail

inline std::string save_models(const std::vector<ModelRecord>& records) {
    nlohmann::json doc;
    doc["format_version"] = kModelStoreVersion;
    auto& list = doc["records"] = nlohmann::json::array();
    for (const ModelRecord& record : records) {
        nlohmann::json j;
        j["id"] = record.model.id;
        j["family"] = std::string(family_name(record.model.family));
        j["hyperparameters"] = record.model.hyperparameters;
        j["feature_names"] = record.model.feature_names;
        j["cv_auc_mean"] = record.cv_auc_mean;
        j["cv_auc_per_fold"] = record.cv_auc_per_fold;
        if (record.test_auc) j["test_auc"] = *record.test_auc;
        else j["test_auc"] = nullptr;
        j["state"] = detail::state_to_json(record.model);
        list.push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

inline std::vector<ModelRecord> load_models(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::corrupt_payload, e.what());
    }
    try {
        if (!doc.contains("format_version")) {
            throw Error(ErrorCode::corrupt_payload, "missing format_version");
        }
        if (doc.at("format_version").get<int>() != kModelStoreVersion) {
            throw Error(ErrorCode::version_mismatch,
                        "unsupported model store version " + doc.at("format_version").dump());
        }
        std::vector<ModelRecord> records;
        for (const auto& j : doc.at("records")) {
            ModelRecord record;
            record.model.id = j.at("id").get<std::string>();
            record.model.family = family_from_name(j.at("family").get<std::string>());
            record.model.hyperparameters =
                j.at("hyperparameters").get<std::map<std::string, double>>();
            record.model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
            record.cv_auc_mean = j.at("cv_auc_mean").get<double>();
            record.cv_auc_per_fold = j.at("cv_auc_per_fold").get<std::vector<double>>();
            if (!j.at("test_auc").is_null()) record.test_auc = j.at("test_auc").get<double>();
            record.model.state = detail::state_from_json(record.model.family, j.at("state"));
            records.push_back(std::move(record));
        }
        return records;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::corrupt_payload, e.what());
    }
}

inline void save_models_file(const std::string& path, const std::vector<ModelRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    out << save_models(records);
}

inline std::vector<ModelRecord> load_models_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_models(text);
}

} // namespace rashodet
