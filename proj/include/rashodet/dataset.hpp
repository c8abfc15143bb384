#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rashodet/errors.hpp"
#include "rashodet/rng.hpp"

namespace rashodet {

enum class VarKind { numeric, categorical };

inline std::string_view var_kind_name(VarKind kind) {
    return kind == VarKind::numeric ? "numeric" : "categorical";
}

struct VariableMeta {
    std::string name;
    VarKind kind = VarKind::numeric;
    // Observed domain [lo, hi]; numeric only.
    double lo = 0.0;
    double hi = 0.0;
    // Ordered distinct labels; categorical only.
    std::vector<std::string> categories;
};

// Column-major design matrix with a binary target. Categorical cells hold the
// category code (index into VariableMeta::categories) stored as a double.
// Immutable after construction; all operations below are pure.
struct Dataset {
    std::string name;
    std::vector<VariableMeta> variables;
    std::vector<std::vector<double>> columns; // p columns of length n
    std::vector<int> target;                  // n labels in {0, 1}
    std::string target_name;
    std::array<std::string, 2> target_labels; // raw label for class 0 / class 1

    std::size_t n() const { return target.size(); }
    std::size_t p() const { return variables.size(); }

    double cell(std::size_t row, std::size_t col) const { return columns[col][row]; }

    int variable_index(std::string_view variable) const {
        for (std::size_t j = 0; j < variables.size(); ++j) {
            if (variables[j].name == variable) return static_cast<int>(j);
        }
        return -1;
    }

    std::array<std::size_t, 2> class_counts() const {
        std::array<std::size_t, 2> counts{0, 0};
        for (int y : target) counts[static_cast<std::size_t>(y)]++;
        return counts;
    }

    bool has_both_classes() const {
        auto counts = class_counts();
        return counts[0] > 0 && counts[1] > 0;
    }

    std::vector<std::string> variable_names() const {
        std::vector<std::string> names;
        names.reserve(variables.size());
        for (const auto& v : variables) names.push_back(v.name);
        return names;
    }
};

// Recompute numeric observed domains from the rows (used after subsetting).
inline void refresh_observed_domains(Dataset& data) {
    for (std::size_t j = 0; j < data.p(); ++j) {
        if (data.variables[j].kind != VarKind::numeric) continue;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (double v : data.columns[j]) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        data.variables[j].lo = lo;
        data.variables[j].hi = hi;
    }
}

inline Dataset subset(const Dataset& data, const std::vector<std::uint32_t>& rows,
                      const std::string& name) {
    Dataset out;
    out.name = name;
    out.variables = data.variables;
    out.target_name = data.target_name;
    out.target_labels = data.target_labels;
    out.columns.assign(data.p(), {});
    for (std::size_t j = 0; j < data.p(); ++j) {
        out.columns[j].reserve(rows.size());
        for (std::uint32_t r : rows) out.columns[j].push_back(data.columns[j][r]);
    }
    out.target.reserve(rows.size());
    for (std::uint32_t r : rows) out.target.push_back(data.target[r]);
    refresh_observed_domains(out);
    return out;
}

struct SplitSpec {
    double test_fraction = 0.25;
    std::uint64_t seed = 0;
};

struct SplitIndices {
    std::vector<std::uint32_t> train;
    std::vector<std::uint32_t> test;
};

// Stratified split: per-class test counts round n_c * fraction to nearest,
// so each class's test share is within one observation of the fraction.
inline SplitIndices split_indices(const Dataset& data, const SplitSpec& spec) {
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
        throw Error(ErrorCode::bad_argument, "test_fraction must lie in (0, 1)");
    }
    const std::size_t n = data.n();
    const std::size_t test_total = static_cast<std::size_t>(std::ceil(n * spec.test_fraction));
    if (test_total < 1 || n - test_total < 1) {
        throw Error(ErrorCode::bad_argument, "split would leave an empty side");
    }

    std::array<std::vector<std::uint32_t>, 2> by_class;
    for (std::uint32_t i = 0; i < n; ++i) {
        by_class[static_cast<std::size_t>(data.target[i])].push_back(i);
    }

    SplitIndices out;
    for (int c = 0; c < 2; ++c) {
        auto& members = by_class[static_cast<std::size_t>(c)];
        Rng rng(derive_seed(spec.seed, "split", static_cast<std::uint64_t>(c)));
        rng.shuffle(members);
        const std::size_t take =
            static_cast<std::size_t>(std::floor(members.size() * spec.test_fraction + 0.5));
        for (std::size_t i = 0; i < members.size(); ++i) {
            (i < take ? out.test : out.train).push_back(members[i]);
        }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());

    auto side_has_both = [&](const std::vector<std::uint32_t>& rows) {
        bool seen[2] = {false, false};
        for (std::uint32_t r : rows) seen[static_cast<std::size_t>(data.target[r])] = true;
        return seen[0] && seen[1];
    };
    if (!side_has_both(out.train) || !side_has_both(out.test)) {
        throw Error(ErrorCode::degenerate_split, "a split side would lack a class");
    }
    return out;
}

inline std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec) {
    SplitIndices idx = split_indices(data, spec);
    return {subset(data, idx.train, data.name + "/train"),
            subset(data, idx.test, data.name + "/test")};
}

// Stratified k-fold assignment. Classes are shuffled independently and dealt
// into folds in one continuous round-robin pass, so per-class counts and the
// overall fold sizes both differ by at most one.
inline std::vector<int> fold_assignments(const Dataset& data, int n_folds, std::uint64_t seed) {
    if (n_folds < 2) throw Error(ErrorCode::bad_argument, "n_folds must be at least 2");
    auto counts = data.class_counts();
    if (counts[0] < static_cast<std::size_t>(n_folds) ||
        counts[1] < static_cast<std::size_t>(n_folds)) {
        throw Error(ErrorCode::too_few_per_class,
                    "each class needs at least n_folds members");
    }

    std::vector<int> fold(data.n(), -1);
    std::size_t cursor = 0;
    for (int c = 0; c < 2; ++c) {
        std::vector<std::uint32_t> members;
        for (std::uint32_t i = 0; i < data.n(); ++i) {
            if (data.target[i] == c) members.push_back(i);
        }
        Rng rng(derive_seed(seed, "folds", static_cast<std::uint64_t>(c)));
        rng.shuffle(members);
        for (std::uint32_t r : members) {
            fold[r] = static_cast<int>(cursor % static_cast<std::size_t>(n_folds));
            ++cursor;
        }
    }
    return fold;
}

} // namespace rashodet
