#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rashodet/auc.hpp"
#include "rashodet/cart.hpp"
#include "rashodet/dataset.hpp"
#include "rashodet/errors.hpp"
#include "rashodet/model.hpp"
#include "rashodet/parallel.hpp"
#include "rashodet/rng.hpp"

namespace rashodet {

namespace detail {

struct HyperSpec {
    std::string name;
    double default_value;
    double lo;
    double hi;
    bool integral;
};

inline const std::vector<HyperSpec>& hyper_specs(ModelFamily family) {
    static const std::vector<HyperSpec> tree{
        {"max_depth", 6, 1, 64, true},
        {"min_samples_leaf", 5, 1, 1e9, true},
    };
    static const std::vector<HyperSpec> forest{
        {"n_trees", 100, 1, 1e6, true},
        {"max_depth", 6, 1, 64, true},
        {"min_samples_leaf", 3, 1, 1e9, true},
        {"feature_fraction", 0.7, 1e-9, 1.0, false},
        {"bootstrap", 1, 0, 1, true},
    };
    static const std::vector<HyperSpec> boost{
        {"n_trees", 100, 1, 1e6, true},
        {"max_depth", 3, 1, 64, true},
        {"min_samples_leaf", 3, 1, 1e9, true},
        {"learning_rate", 0.1, 1e-12, 1.0, false},
    };
    static const std::vector<HyperSpec> linear{
        {"l2", 1.0, 0.0, 1e12, false},
    };
    switch (family) {
    case ModelFamily::decision_tree: return tree;
    case ModelFamily::random_forest: return forest;
    case ModelFamily::gradient_boosting: return boost;
    case ModelFamily::logistic_regression: return linear;
    }
    return tree;
}

} // namespace detail

// Fill defaults and validate ranges; rejects unknown names so typos cannot
// silently fall back to defaults.
inline std::map<std::string, double> validate_hyperparameters(
    ModelFamily family, const std::map<std::string, double>& given) {
    const auto& specs = detail::hyper_specs(family);
    for (const auto& [name, value] : given) {
        const auto it = std::find_if(specs.begin(), specs.end(),
                                     [&](const auto& s) { return s.name == name; });
        if (it == specs.end()) {
            throw Error(ErrorCode::invalid_hyperparameter,
                        "unknown hyperparameter '" + name + "' for family " +
                            std::string(family_name(family)));
        }
        if (!(value >= it->lo && value <= it->hi) ||
            (it->integral && value != std::floor(value))) {
            throw Error(ErrorCode::invalid_hyperparameter,
                        "hyperparameter '" + name + "' out of range");
        }
    }
    std::map<std::string, double> full;
    for (const auto& s : specs) {
        auto it = given.find(s.name);
        full[s.name] = it == given.end() ? s.default_value : it->second;
    }
    return full;
}

namespace detail {

inline std::vector<std::uint32_t> all_rows(std::size_t n) {
    std::vector<std::uint32_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::uint32_t>(i);
    return rows;
}

inline Tree train_single_tree(const Dataset& data, const std::map<std::string, double>& hp,
                              std::uint64_t seed) {
    std::vector<double> response(data.target.begin(), data.target.end());
    CartParams params;
    params.max_depth = static_cast<int>(hp.at("max_depth"));
    params.min_samples_leaf = static_cast<int>(hp.at("min_samples_leaf"));
    params.feature_fraction = 1.0;
    params.seed = seed;
    return build_cart_tree(data, all_rows(data.n()), response, {}, params);
}

inline ForestState train_forest(const Dataset& data, const std::map<std::string, double>& hp,
                                std::uint64_t seed) {
    const int n_trees = static_cast<int>(hp.at("n_trees"));
    const bool bootstrap = hp.at("bootstrap") != 0.0;
    std::vector<double> response(data.target.begin(), data.target.end());

    ForestState forest;
    forest.trees.resize(static_cast<std::size_t>(n_trees));
    for (int t = 0; t < n_trees; ++t) {
        const std::uint64_t tree_seed = derive_seed(seed, "tree", static_cast<std::uint64_t>(t));
        std::vector<std::uint32_t> rows;
        if (bootstrap) {
            Rng rng(derive_seed(tree_seed, "bootstrap"));
            rows.resize(data.n());
            for (auto& r : rows) r = static_cast<std::uint32_t>(rng.uniform_int(data.n()));
        } else {
            rows = all_rows(data.n());
        }
        CartParams params;
        params.max_depth = static_cast<int>(hp.at("max_depth"));
        params.min_samples_leaf = static_cast<int>(hp.at("min_samples_leaf"));
        params.feature_fraction = hp.at("feature_fraction");
        params.seed = derive_seed(tree_seed, "nodes");
        forest.trees[static_cast<std::size_t>(t)] =
            build_cart_tree(data, std::move(rows), response, {}, params);
    }
    return forest;
}

inline BoostState train_boost(const Dataset& data, const std::map<std::string, double>& hp,
                              std::uint64_t seed) {
    const int n_trees = static_cast<int>(hp.at("n_trees"));
    const double rate = hp.at("learning_rate");
    const std::size_t n = data.n();

    double positives = 0.0;
    for (int y : data.target) positives += y;
    const double pbar = positives / static_cast<double>(n);

    BoostState boost;
    boost.learning_rate = rate;
    boost.base_margin = std::log(pbar / (1.0 - pbar));

    std::vector<double> margin(n, boost.base_margin);
    std::vector<double> gradient(n), hessian(n);
    for (int t = 0; t < n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(margin[i]);
            gradient[i] = static_cast<double>(data.target[i]) - p;
            hessian[i] = p * (1.0 - p);
        }
        CartParams params;
        params.max_depth = static_cast<int>(hp.at("max_depth"));
        params.min_samples_leaf = static_cast<int>(hp.at("min_samples_leaf"));
        params.feature_fraction = 1.0;
        params.seed = derive_seed(seed, "stage", static_cast<std::uint64_t>(t));
        Tree tree = build_cart_tree(data, all_rows(n), gradient, hessian, params);
        for (std::size_t i = 0; i < n; ++i) {
            margin[i] += rate * tree.predict([&](std::size_t j) { return data.columns[j][i]; });
        }
        boost.trees.push_back(std::move(tree));
    }
    return boost;
}

// One-hot encode, standardize each encoded column, run gradient descent with
// backtracking on the penalized logistic loss, then fold the standardization
// back so the stored weights act on raw values.
inline LinearState train_logistic(const Dataset& data, const std::map<std::string, double>& hp) {
    const std::size_t n = data.n();
    LinearState state;
    std::vector<std::pair<std::size_t, std::size_t>> slot_to_var;
    for (std::size_t j = 0; j < data.p(); ++j) {
        const auto& meta = data.variables[j];
        state.slot_offsets.push_back(static_cast<std::uint32_t>(slot_to_var.size()));
        const std::size_t count =
            meta.kind == VarKind::numeric ? 1 : meta.categories.size();
        state.slot_counts.push_back(static_cast<std::uint32_t>(count));
        for (std::size_t c = 0; c < count; ++c) slot_to_var.push_back({j, c});
    }
    const std::size_t d = slot_to_var.size();

    std::vector<std::vector<double>> z(d, std::vector<double>(n));
    std::vector<double> mean(d), scale(d);
    for (std::size_t s = 0; s < d; ++s) {
        const auto [j, c] = slot_to_var[s];
        for (std::size_t i = 0; i < n; ++i) {
            const double raw = data.columns[j][i];
            z[s][i] = data.variables[j].kind == VarKind::numeric
                          ? raw
                          : (static_cast<std::size_t>(raw) == c ? 1.0 : 0.0);
        }
        double mu = 0.0;
        for (double v : z[s]) mu += v;
        mu /= static_cast<double>(n);
        double var = 0.0;
        for (double v : z[s]) var += (v - mu) * (v - mu);
        const double sd = std::sqrt(var / static_cast<double>(n));
        mean[s] = mu;
        scale[s] = sd < 1e-12 ? 0.0 : 1.0 / sd;
        for (auto& v : z[s]) v = (v - mu) * scale[s];
    }

    const double lambda = hp.at("l2");
    std::vector<double> w(d, 0.0);
    double b = 0.0;

    std::vector<double> prob(n), margin(n);
    auto objective = [&](const std::vector<double>& wv, double bv) {
        double nll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double m = bv;
            for (std::size_t s = 0; s < d; ++s) m += wv[s] * z[s][i];
            nll += std::max(m, 0.0) + std::log1p(std::exp(-std::abs(m))) -
                   static_cast<double>(data.target[i]) * m;
        }
        double penalty = 0.0;
        for (double v : wv) penalty += v * v;
        return nll / static_cast<double>(n) +
               lambda * penalty / (2.0 * static_cast<double>(n));
    };

    std::vector<double> grad_w(d);
    std::vector<double> trial_w(d);
    double step = 1.0;
    for (int iter = 0; iter < 10000; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            double m = b;
            for (std::size_t s = 0; s < d; ++s) m += w[s] * z[s][i];
            margin[i] = m;
            prob[i] = sigmoid(m);
        }
        double grad_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            grad_b += (prob[i] - static_cast<double>(data.target[i]));
        }
        grad_b /= static_cast<double>(n);
        double grad_max = std::abs(grad_b);
        double grad_norm2 = grad_b * grad_b;
        for (std::size_t s = 0; s < d; ++s) {
            double g = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                g += (prob[i] - static_cast<double>(data.target[i])) * z[s][i];
            }
            g = g / static_cast<double>(n) + lambda * w[s] / static_cast<double>(n);
            grad_w[s] = g;
            grad_max = std::max(grad_max, std::abs(g));
            grad_norm2 += g * g;
        }
        if (grad_max < 1e-8) break;

        const double current = objective(w, b);
        step = std::min(step * 2.0, 1e6);
        for (int halvings = 0; halvings < 80; ++halvings) {
            for (std::size_t s = 0; s < d; ++s) trial_w[s] = w[s] - step * grad_w[s];
            const double trial_b = b - step * grad_b;
            if (objective(trial_w, trial_b) <= current - 0.5 * step * grad_norm2) break;
            step /= 2.0;
        }
        for (std::size_t s = 0; s < d; ++s) w[s] -= step * grad_w[s];
        b -= step * grad_b;
    }

    state.weights.resize(d);
    state.intercept = b;
    for (std::size_t s = 0; s < d; ++s) {
        state.weights[s] = w[s] * scale[s];
        state.intercept -= w[s] * mean[s] * scale[s];
    }
    return state;
}

} // namespace detail

inline PredictiveModel train(ModelFamily family, const std::map<std::string, double>& given,
                             const Dataset& data, std::uint64_t seed) {
    const auto hp = validate_hyperparameters(family, given);
    if (data.n() == 0 || !data.has_both_classes()) {
        throw Error(ErrorCode::single_class_data, "training data must contain both classes");
    }

    PredictiveModel model;
    model.family = family;
    model.hyperparameters = hp;
    model.feature_names = data.variable_names();
    switch (family) {
    case ModelFamily::decision_tree:
        model.state = detail::train_single_tree(data, hp, seed);
        break;
    case ModelFamily::random_forest:
        model.state = detail::train_forest(data, hp, seed);
        break;
    case ModelFamily::gradient_boosting:
        model.state = detail::train_boost(data, hp, seed);
        break;
    case ModelFamily::logistic_regression:
        model.state = detail::train_logistic(data, hp);
        break;
    }
    return model;
}

struct GridCell {
    std::string id;
    ModelFamily family = ModelFamily::decision_tree;
    std::map<std::string, double> hyperparameters;
};

struct GridSpec {
    std::vector<GridCell> cells;
    std::uint64_t seed = 0;
};

struct ModelRecord {
    PredictiveModel model;
    double cv_auc_mean = 0.0;
    std::vector<double> cv_auc_per_fold;
    std::optional<double> test_auc;
};

struct CellFailure {
    std::string id;
    std::string error;
    std::string message;
};

struct GridSearchResult {
    std::vector<ModelRecord> records;
    std::vector<CellFailure> failures;
};

// Hyperparameter search over a shared fold assignment: each cell is scored
// by held-out AUC with the model retrained per fold, then refit on all rows.
// A cell whose training throws is reported in `failures` instead of
// aborting the sweep. Records come back sorted by cv_auc_mean descending
// with ties broken by id.
inline GridSearchResult grid_search(const GridSpec& grid, const Dataset& data, int n_folds,
                                    unsigned threads = 0) {
    {
        std::set<std::string> ids;
        for (const auto& cell : grid.cells) {
            if (cell.id.empty() || !ids.insert(cell.id).second) {
                throw Error(ErrorCode::bad_argument,
                            "grid cell ids must be non-empty and unique");
            }
        }
    }
    const auto fold = fold_assignments(data, n_folds, derive_seed(grid.seed, "folds"));

    std::vector<Dataset> fold_train, fold_test;
    for (int f = 0; f < n_folds; ++f) {
        std::vector<std::uint32_t> in_rows, out_rows;
        for (std::uint32_t i = 0; i < data.n(); ++i) {
            (fold[i] == f ? out_rows : in_rows).push_back(i);
        }
        fold_train.push_back(subset(data, in_rows, data.name + "/cvtrain"));
        fold_test.push_back(subset(data, out_rows, data.name + "/cvtest"));
    }

    std::vector<std::optional<ModelRecord>> slots(grid.cells.size());
    std::vector<std::optional<CellFailure>> errors(grid.cells.size());
    parallel_for(grid.cells.size(), [&](std::size_t c) {
        const GridCell& cell = grid.cells[c];
        const std::uint64_t cell_seed = derive_seed(grid.seed, "cell", static_cast<std::uint64_t>(c));
        try {
            ModelRecord record;
            for (int f = 0; f < n_folds; ++f) {
                PredictiveModel m =
                    train(cell.family, cell.hyperparameters, fold_train[static_cast<std::size_t>(f)],
                          derive_seed(cell_seed, "fold", static_cast<std::uint64_t>(f)));
                const Dataset& held = fold_test[static_cast<std::size_t>(f)];
                record.cv_auc_per_fold.push_back(auc(m.score_all(held), held.target));
            }
            double sum = 0.0;
            for (double v : record.cv_auc_per_fold) sum += v;
            record.cv_auc_mean = sum / static_cast<double>(n_folds);
            record.model = train(cell.family, cell.hyperparameters, data, cell_seed);
            record.model.id = cell.id;
            slots[c] = std::move(record);
        } catch (const Error& e) {
            errors[c] = CellFailure{cell.id, std::string(e.name()), e.what()};
        }
    }, threads);

    GridSearchResult result;
    for (std::size_t c = 0; c < slots.size(); ++c) {
        if (slots[c]) result.records.push_back(std::move(*slots[c]));
        else result.failures.push_back(std::move(*errors[c]));
    }
    std::sort(result.records.begin(), result.records.end(),
              [](const ModelRecord& a, const ModelRecord& b) {
                  if (a.cv_auc_mean != b.cv_auc_mean) return a.cv_auc_mean > b.cv_auc_mean;
                  return a.model.id < b.model.id;
              });
    return result;
}

// Stock search space used by the command-line trainer: random forests and
// gradient boosting over small grids, sixteen cells total.
inline GridSpec default_grid(std::uint64_t seed) {
    GridSpec grid;
    grid.seed = seed;
    int idx = 0;
    for (double n_trees : {50.0, 150.0}) {
        for (double depth : {3.0, 6.0}) {
            for (double frac : {0.5, 1.0}) {
                GridCell cell;
                cell.id = "rf" + std::string(idx + 1 < 10 ? "0" : "") + std::to_string(idx + 1);
                cell.family = ModelFamily::random_forest;
                cell.hyperparameters = {{"n_trees", n_trees},
                                        {"max_depth", depth},
                                        {"feature_fraction", frac}};
                grid.cells.push_back(std::move(cell));
                ++idx;
            }
        }
    }
    idx = 0;
    for (double n_trees : {50.0, 150.0}) {
        for (double depth : {2.0, 3.0}) {
            for (double rate : {0.1, 0.3}) {
                GridCell cell;
                cell.id = "gbm" + std::string(idx + 1 < 10 ? "0" : "") + std::to_string(idx + 1);
                cell.family = ModelFamily::gradient_boosting;
                cell.hyperparameters = {{"n_trees", n_trees},
                                        {"max_depth", depth},
                                        {"learning_rate", rate}};
                grid.cells.push_back(std::move(cell));
                ++idx;
            }
        }
    }
    return grid;
}

} // namespace rashodet
