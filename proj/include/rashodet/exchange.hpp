#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rashodet/errors.hpp"
#include "rashodet/model.hpp"
#include "rashodet/profiles.hpp"

namespace rashodet {

inline constexpr int kExchangeVersion = 1;

// Performance score attached to a model id; the ranking input for reference
// selection and Rashomon membership.
struct ModelScore {
    std::string id;
    double metric = 0.0;
};

struct ExchangeData {
    ProfileBundle bundle;
    std::vector<ModelScore> scores;
    // (model id, variable) pairs that had no profile in the file and were
    // filled with the constant-0 profile.
    std::vector<std::pair<std::string, std::string>> zero_filled;
};

inline nlohmann::json exchange_to_json(const ProfileBundle& bundle,
                                       const std::vector<ModelScore>& scores) {
    nlohmann::json doc;
    doc["format_version"] = kExchangeVersion;
    auto& models = doc["models"] = nlohmann::json::array();
    for (const ModelScore& score : scores) {
        models.push_back({{"id", score.id}, {"auc", score.metric}});
    }
    auto& variables = doc["variables"] = nlohmann::json::array();
    for (const BundleVariable& var : bundle.variables) {
        nlohmann::json vj{{"name", var.name},
                          {"kind", std::string(var_kind_name(var.kind))}};
        if (var.kind == VarKind::numeric) vj["grid"] = var.grid.points;
        else vj["categories"] = var.categories;
        variables.push_back(std::move(vj));
    }
    auto& profiles = doc["profiles"] = nlohmann::json::array();
    for (const BundleVariable& var : bundle.variables) {
        for (std::size_t k = 0; k < bundle.model_ids.size(); ++k) {
            profiles.push_back({{"model_id", bundle.model_ids[k]},
                                {"variable", var.name},
                                {"values", var.values[k]}});
        }
    }
    return doc;
}

inline void write_exchange(std::ostream& out, const ProfileBundle& bundle,
                           const std::vector<ModelScore>& scores) {
    out << exchange_to_json(bundle, scores).dump(2) << '\n';
}

inline void write_exchange_file(const std::string& path, const ProfileBundle& bundle,
                                const std::vector<ModelScore>& scores) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    write_exchange(out, bundle, scores);
}

// Parse an exchange document. Structural problems (missing fields, unknown
// ids, bad kinds, versions) raise SchemaMismatch; inconsistent grids and
// value lengths raise GridMismatch. Missing (model, variable) profiles are
// zero-filled and reported, never invented silently.
inline ExchangeData parse_exchange(const nlohmann::json& doc) {
    try {
        if (!doc.contains("format_version") ||
            doc.at("format_version").get<int>() != kExchangeVersion) {
            throw Error(ErrorCode::schema_mismatch, "missing or unsupported format_version");
        }
        ExchangeData data;
        std::set<std::string> model_ids;
        for (const auto& mj : doc.at("models")) {
            ModelScore score;
            score.id = mj.at("id").get<std::string>();
            score.metric = mj.at("auc").get<double>();
            if (!model_ids.insert(score.id).second) {
                throw Error(ErrorCode::schema_mismatch,
                            "model '" + score.id + "' listed twice");
            }
            data.scores.push_back(std::move(score));
            data.bundle.model_ids.push_back(data.scores.back().id);
        }
        if (data.scores.empty()) {
            throw Error(ErrorCode::schema_mismatch, "exchange file lists no models");
        }

        std::set<std::string> var_names;
        for (const auto& vj : doc.at("variables")) {
            BundleVariable var;
            var.name = vj.at("name").get<std::string>();
            if (!var_names.insert(var.name).second) {
                throw Error(ErrorCode::grid_mismatch,
                            "variable '" + var.name + "' defined more than once");
            }
            const std::string kind = vj.at("kind").get<std::string>();
            if (kind == "numeric") {
                var.kind = VarKind::numeric;
                var.grid.variable = var.name;
                var.grid.points = vj.at("grid").get<std::vector<double>>();
                if (var.grid.points.size() < 2) {
                    throw Error(ErrorCode::schema_mismatch,
                                "grid for '" + var.name + "' needs at least 2 points");
                }
                for (std::size_t i = 1; i < var.grid.points.size(); ++i) {
                    if (!(var.grid.points[i] > var.grid.points[i - 1])) {
                        throw Error(ErrorCode::schema_mismatch,
                                    "grid for '" + var.name + "' is not strictly increasing");
                    }
                }
            } else if (kind == "categorical") {
                var.kind = VarKind::categorical;
                var.categories = vj.at("categories").get<std::vector<std::string>>();
                if (var.categories.empty()) {
                    throw Error(ErrorCode::schema_mismatch,
                                "variable '" + var.name + "' lists no categories");
                }
            } else {
                throw Error(ErrorCode::schema_mismatch,
                            "variable '" + var.name + "' has unknown kind '" + kind + "'");
            }
            var.values.assign(data.bundle.model_ids.size(), {});
            data.bundle.variables.push_back(std::move(var));
        }
        if (data.bundle.variables.empty()) {
            throw Error(ErrorCode::schema_mismatch, "exchange file lists no variables");
        }

        for (const auto& pj : doc.at("profiles")) {
            const std::string model_id = pj.at("model_id").get<std::string>();
            const std::string variable = pj.at("variable").get<std::string>();
            const int k = data.bundle.model_index(model_id);
            if (k < 0) {
                throw Error(ErrorCode::schema_mismatch,
                            "profile references unknown model '" + model_id + "'");
            }
            int j = -1;
            for (std::size_t v = 0; v < data.bundle.variables.size(); ++v) {
                if (data.bundle.variables[v].name == variable) j = static_cast<int>(v);
            }
            if (j < 0) {
                throw Error(ErrorCode::schema_mismatch,
                            "profile references unknown variable '" + variable + "'");
            }
            BundleVariable& var = data.bundle.variables[static_cast<std::size_t>(j)];
            if (!var.values[static_cast<std::size_t>(k)].empty()) {
                throw Error(ErrorCode::schema_mismatch, "duplicate profile for model '" +
                                                            model_id + "', variable '" +
                                                            variable + "'");
            }
            auto values = pj.at("values").get<std::vector<double>>();
            const std::size_t expected = var.kind == VarKind::numeric
                                             ? var.grid.points.size()
                                             : var.categories.size();
            if (values.size() != expected) {
                throw Error(ErrorCode::grid_mismatch,
                            "profile for model '" + model_id + "', variable '" + variable +
                                "' has " + std::to_string(values.size()) +
                                " values, expected " + std::to_string(expected));
            }
            var.values[static_cast<std::size_t>(k)] = std::move(values);
        }

        for (BundleVariable& var : data.bundle.variables) {
            const std::size_t expected = var.kind == VarKind::numeric
                                             ? var.grid.points.size()
                                             : var.categories.size();
            for (std::size_t k = 0; k < data.bundle.model_ids.size(); ++k) {
                if (var.values[k].empty()) {
                    var.values[k].assign(expected, 0.0);
                    data.zero_filled.push_back({data.bundle.model_ids[k], var.name});
                }
            }
        }
        return data;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::schema_mismatch, e.what());
    }
}

inline ExchangeData read_exchange(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::schema_mismatch, e.what());
    }
    return parse_exchange(doc);
}

inline ExchangeData read_exchange_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
    return read_exchange(in);
}

} // namespace rashodet
