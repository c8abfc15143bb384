#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rashodet/dataset.hpp"
#include "rashodet/errors.hpp"
#include "rashodet/model.hpp"
#include "rashodet/parallel.hpp"
#include "rashodet/rng.hpp"

namespace rashodet {

enum class GridStrategy { uniform, quantile };

inline std::string_view grid_strategy_name(GridStrategy strategy) {
    return strategy == GridStrategy::uniform ? "uniform" : "quantile";
}

struct Grid {
    std::string variable;
    std::vector<double> points;
    GridStrategy strategy = GridStrategy::uniform;

    std::size_t size() const { return points.size(); }
    double span() const { return points.back() - points.front(); }
};

struct Profile {
    std::string model_id;
    std::string variable;
    Grid grid;
    std::vector<double> values;
};

struct CategoricalProfile {
    std::string model_id;
    std::string variable;
    std::vector<std::string> categories;
    std::vector<double> values;
};

// Empirical quantile with linear interpolation between order statistics
// (the convention most statistical software defaults to).
inline double empirical_quantile(const std::vector<double>& sorted, double prob) {
    const std::size_t n = sorted.size();
    const double h = prob * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n) return sorted[n - 1];
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

inline Grid make_grid(const VariableMeta& meta, std::size_t m, GridStrategy strategy,
                      const Dataset& data) {
    if (meta.kind != VarKind::numeric) {
        throw Error(ErrorCode::categorical_variable,
                    "grids are for numeric variables; '" + meta.name + "' is categorical");
    }
    if (m < 2) throw Error(ErrorCode::bad_argument, "grid needs at least 2 points");
    if (!(meta.lo < meta.hi)) {
        throw Error(ErrorCode::degenerate_domain,
                    "variable '" + meta.name + "' is constant over the data");
    }

    Grid grid;
    grid.variable = meta.name;
    grid.strategy = strategy;
    if (strategy == GridStrategy::uniform) {
        grid.points.resize(m);
        for (std::size_t t = 0; t < m; ++t) {
            grid.points[t] =
                meta.lo + (meta.hi - meta.lo) *
                              (static_cast<double>(t) / static_cast<double>(m - 1));
        }
        grid.points.front() = meta.lo;
        grid.points.back() = meta.hi;
    } else {
        const int j = data.variable_index(meta.name);
        if (j < 0) {
            throw Error(ErrorCode::unknown_variable, "variable '" + meta.name + "' not in data");
        }
        std::vector<double> sorted = data.columns[static_cast<std::size_t>(j)];
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t t = 0; t < m; ++t) {
            const double q = empirical_quantile(
                sorted, static_cast<double>(t) / static_cast<double>(m - 1));
            if (grid.points.empty() || q > grid.points.back()) grid.points.push_back(q);
        }
        if (grid.points.size() < 2) {
            throw Error(ErrorCode::degenerate_domain,
                        "variable '" + meta.name + "' has a degenerate quantile grid");
        }
    }
    return grid;
}

// Core partial-dependence loop over an arbitrary replacement scorer
// f(row, z). Accumulation is row-ascending with a single division, so the
// result is reproducible down to the last bit.
template <typename ReplacedScorer>
std::vector<double> partial_dependence_values(std::size_t n_rows,
                                              std::span<const double> points,
                                              ReplacedScorer&& f) {
    std::vector<double> values(points.size());
    for (std::size_t t = 0; t < points.size(); ++t) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n_rows; ++i) sum += f(i, points[t]);
        values[t] = sum / static_cast<double>(n_rows);
    }
    return values;
}

inline Profile pdp(const PredictiveModel& model, const Dataset& data, const Grid& grid) {
    const int j = data.variable_index(grid.variable);
    const bool known_to_model =
        std::find(model.feature_names.begin(), model.feature_names.end(), grid.variable) !=
        model.feature_names.end();
    if (j < 0 || !known_to_model) {
        throw Error(ErrorCode::unknown_variable,
                    "variable '" + grid.variable + "' unknown to the data or the model");
    }
    Profile profile;
    profile.model_id = model.id;
    profile.variable = grid.variable;
    profile.grid = grid;
    profile.values = partial_dependence_values(
        data.n(), grid.points, [&](std::size_t i, double z) {
            return model.score_replaced(data, i, static_cast<std::size_t>(j), z);
        });
    return profile;
}

inline CategoricalProfile pdp_categorical(const PredictiveModel& model, const Dataset& data,
                                          const VariableMeta& meta) {
    if (meta.kind != VarKind::categorical) {
        throw Error(ErrorCode::numeric_variable,
                    "'" + meta.name + "' is numeric; use pdp with a grid");
    }
    const int j = data.variable_index(meta.name);
    const bool known_to_model =
        std::find(model.feature_names.begin(), model.feature_names.end(), meta.name) !=
        model.feature_names.end();
    if (j < 0 || !known_to_model) {
        throw Error(ErrorCode::unknown_variable,
                    "variable '" + meta.name + "' unknown to the data or the model");
    }
    std::vector<double> codes(meta.categories.size());
    for (std::size_t c = 0; c < codes.size(); ++c) codes[c] = static_cast<double>(c);

    CategoricalProfile profile;
    profile.model_id = model.id;
    profile.variable = meta.name;
    profile.categories = meta.categories;
    profile.values = partial_dependence_values(
        data.n(), codes, [&](std::size_t i, double z) {
            return model.score_replaced(data, i, static_cast<std::size_t>(j), z);
        });
    return profile;
}

// One variable's worth of a bundle: a shared grid (or category list) plus
// the profile values of every model, indexed like ProfileBundle::model_ids.
struct BundleVariable {
    std::string name;
    VarKind kind = VarKind::numeric;
    Grid grid;
    std::vector<std::string> categories;
    std::vector<std::vector<double>> values;
};

struct ProfileBundle {
    std::vector<std::string> model_ids;
    std::vector<BundleVariable> variables;

    int model_index(std::string_view id) const {
        for (std::size_t k = 0; k < model_ids.size(); ++k) {
            if (model_ids[k] == id) return static_cast<int>(k);
        }
        return -1;
    }
};

struct BundleOptions {
    std::size_t grid_size = 101;
    GridStrategy strategy = GridStrategy::uniform;
    // Cap on background rows; 0 keeps the full dataset. When capped, rows
    // are sampled without replacement from a stream derived from `seed`.
    std::size_t background_rows = 0;
    std::uint64_t seed = 0;
    bool center = false;
    unsigned threads = 0;
};

// Profiles for every (model, variable) pair on grids shared across models.
inline ProfileBundle profile_bundle(std::span<const PredictiveModel> models,
                                    const Dataset& data, const BundleOptions& options) {
    const auto names = data.variable_names();
    for (const PredictiveModel& model : models) {
        if (model.feature_names != names) {
            throw Error(ErrorCode::schema_mismatch,
                        "model '" + model.id + "' was trained on different variables");
        }
    }

    Dataset capped;
    const Dataset* background = &data;
    if (options.background_rows > 0 && data.n() > options.background_rows) {
        Rng rng(derive_seed(options.seed, "background"));
        auto rows = rng.sample_without_replacement(
            static_cast<std::uint32_t>(data.n()),
            static_cast<std::uint32_t>(options.background_rows));
        std::sort(rows.begin(), rows.end());
        capped = subset(data, rows, data.name + "/background");
        background = &capped;
    }

    ProfileBundle bundle;
    for (const PredictiveModel& model : models) bundle.model_ids.push_back(model.id);
    bundle.variables.resize(data.p());
    for (std::size_t j = 0; j < data.p(); ++j) {
        BundleVariable& var = bundle.variables[j];
        var.name = data.variables[j].name;
        var.kind = data.variables[j].kind;
        if (var.kind == VarKind::numeric) {
            var.grid = make_grid(data.variables[j], options.grid_size, options.strategy, data);
        } else {
            var.categories = data.variables[j].categories;
        }
        var.values.resize(models.size());
    }

    parallel_for(models.size() * data.p(), [&](std::size_t slot) {
        const std::size_t k = slot / data.p();
        const std::size_t j = slot % data.p();
        BundleVariable& var = bundle.variables[j];
        std::vector<double>& out = var.values[k];
        if (var.kind == VarKind::numeric) {
            out = pdp(models[k], *background, var.grid).values;
        } else {
            out = pdp_categorical(models[k], *background, data.variables[j]).values;
        }
        if (options.center) {
            double mean = 0.0;
            for (double v : out) mean += v;
            mean /= static_cast<double>(out.size());
            for (double& v : out) v -= mean;
        }
    }, options.threads);
    return bundle;
}

} // namespace rashodet
