#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "rashodet/dataset.hpp"
#include "rashodet/model.hpp"
#include "rashodet/rng.hpp"

namespace rashodet {

struct CartParams {
    int max_depth = 6;
    int min_samples_leaf = 1;
    // Fraction of features scanned per node; 1.0 scans all of them.
    double feature_fraction = 1.0;
    std::uint64_t seed = 0;
};

namespace detail {

constexpr double kMinSplitGain = 1e-12;

struct SplitChoice {
    bool found = false;
    double gain = 0.0;
    std::size_t feature = 0;
    bool categorical = false;
    double threshold = 0.0;
    std::vector<int> left_categories;
};

// Builds one regression tree on (response, hessian) pairs. With unit
// hessians the leaf value is the mean response and the split criterion is
// sum-of-squares reduction; with logistic-loss hessians the leaf value is
// the Newton step sum(g)/sum(h). For a 0/1 response the criterion ranks
// splits exactly as Gini gain does, so the same scan serves classification
// trees, forest members, and boosting stages.
class CartBuilder {
  public:
    CartBuilder(const Dataset& data, std::span<const double> response,
                std::span<const double> hessian, const CartParams& params)
        : data_(data), response_(response), hessian_(hessian), params_(params),
          rng_(params.seed) {
        mtry_ = static_cast<std::size_t>(
            std::llround(params.feature_fraction * static_cast<double>(data.p())));
        mtry_ = std::clamp<std::size_t>(mtry_, 1, data.p());
    }

    Tree build(std::vector<std::uint32_t> rows) {
        Tree tree;
        grow(tree, std::move(rows), 0);
        return tree;
    }

  private:
    double hess(std::uint32_t row) const {
        return hessian_.empty() ? 1.0 : hessian_[row];
    }

    double leaf_value(const std::vector<std::uint32_t>& rows) const {
        double g = 0.0, h = 0.0;
        for (std::uint32_t r : rows) {
            g += response_[r];
            h += hess(r);
        }
        return g / std::max(h, 1e-12);
    }

    // Score of a candidate partition; maximizing it minimizes the residual
    // squared loss (or its second-order approximation).
    static double partition_score(double gl, double hl, double gr, double hr) {
        return gl * gl / std::max(hl, 1e-12) + gr * gr / std::max(hr, 1e-12);
    }

    std::vector<std::size_t> candidate_features() {
        if (mtry_ >= data_.p()) {
            std::vector<std::size_t> all(data_.p());
            std::iota(all.begin(), all.end(), 0);
            return all;
        }
        auto picked = rng_.sample_without_replacement(
            static_cast<std::uint32_t>(data_.p()), static_cast<std::uint32_t>(mtry_));
        std::vector<std::size_t> out(picked.begin(), picked.end());
        std::sort(out.begin(), out.end());
        return out;
    }

    void scan_numeric(const std::vector<std::uint32_t>& rows, std::size_t feature,
                      double total_g, double total_h, double base, SplitChoice& best) {
        scratch_.clear();
        for (std::uint32_t r : rows) {
            scratch_.push_back({data_.columns[feature][r], response_[r], hess(r)});
        }
        std::sort(scratch_.begin(), scratch_.end(),
                  [](const Entry& a, const Entry& b) { return a.value < b.value; });

        double gl = 0.0, hl = 0.0;
        std::size_t left_count = 0;
        const std::size_t n = scratch_.size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            gl += scratch_[i].g;
            hl += scratch_[i].h;
            ++left_count;
            if (scratch_[i].value == scratch_[i + 1].value) continue;
            if (left_count < static_cast<std::size_t>(params_.min_samples_leaf)) continue;
            if (n - left_count < static_cast<std::size_t>(params_.min_samples_leaf)) continue;
            const double gain =
                partition_score(gl, hl, total_g - gl, total_h - hl) - base;
            if (gain > best.gain + kMinSplitGain ||
                (!best.found && gain > kMinSplitGain)) {
                best.found = true;
                best.gain = gain;
                best.feature = feature;
                best.categorical = false;
                best.threshold = scratch_[i].value +
                                 (scratch_[i + 1].value - scratch_[i].value) / 2.0;
                best.left_categories.clear();
            }
        }
    }

    void scan_categorical(const std::vector<std::uint32_t>& rows, std::size_t feature,
                          double total_g, double total_h, double base, SplitChoice& best) {
        const std::size_t n_cats = data_.variables[feature].categories.size();
        std::vector<double> g_by_cat(n_cats, 0.0), h_by_cat(n_cats, 0.0);
        std::vector<std::size_t> count(n_cats, 0);
        for (std::uint32_t r : rows) {
            const auto c = static_cast<std::size_t>(data_.columns[feature][r]);
            g_by_cat[c] += response_[r];
            h_by_cat[c] += hess(r);
            count[c]++;
        }

        // Order present categories by mean response, then scan prefix cuts;
        // for a single split on a scalar response this search is optimal.
        std::vector<int> present;
        for (std::size_t c = 0; c < n_cats; ++c) {
            if (count[c] > 0) present.push_back(static_cast<int>(c));
        }
        if (present.size() < 2) return;
        std::sort(present.begin(), present.end(), [&](int a, int b) {
            const double ma = g_by_cat[static_cast<std::size_t>(a)] /
                              std::max(h_by_cat[static_cast<std::size_t>(a)], 1e-12);
            const double mb = g_by_cat[static_cast<std::size_t>(b)] /
                              std::max(h_by_cat[static_cast<std::size_t>(b)], 1e-12);
            if (ma != mb) return ma < mb;
            return a < b;
        });

        double gl = 0.0, hl = 0.0;
        std::size_t left_count = 0;
        for (std::size_t i = 0; i + 1 < present.size(); ++i) {
            const auto c = static_cast<std::size_t>(present[i]);
            gl += g_by_cat[c];
            hl += h_by_cat[c];
            left_count += count[c];
            if (left_count < static_cast<std::size_t>(params_.min_samples_leaf)) continue;
            if (rows.size() - left_count < static_cast<std::size_t>(params_.min_samples_leaf)) {
                continue;
            }
            const double gain =
                partition_score(gl, hl, total_g - gl, total_h - hl) - base;
            if (gain > best.gain + kMinSplitGain ||
                (!best.found && gain > kMinSplitGain)) {
                best.found = true;
                best.gain = gain;
                best.feature = feature;
                best.categorical = true;
                best.left_categories.assign(present.begin(),
                                            present.begin() + static_cast<long>(i + 1));
                std::sort(best.left_categories.begin(), best.left_categories.end());
            }
        }
    }

    int grow(Tree& tree, std::vector<std::uint32_t> rows, int depth) {
        const int index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.back().value = leaf_value(rows);

        if (depth >= params_.max_depth ||
            rows.size() < 2 * static_cast<std::size_t>(params_.min_samples_leaf)) {
            return index;
        }

        double total_g = 0.0, total_h = 0.0;
        for (std::uint32_t r : rows) {
            total_g += response_[r];
            total_h += hess(r);
        }
        const double base = partition_score(total_g, total_h, 0.0, 0.0);

        SplitChoice best;
        for (std::size_t feature : candidate_features()) {
            if (data_.variables[feature].kind == VarKind::numeric) {
                scan_numeric(rows, feature, total_g, total_h, base, best);
            } else {
                scan_categorical(rows, feature, total_g, total_h, base, best);
            }
        }
        if (!best.found) return index;

        std::vector<std::uint32_t> left_rows, right_rows;
        for (std::uint32_t r : rows) {
            bool go_left;
            if (best.categorical) {
                go_left = std::binary_search(best.left_categories.begin(),
                                             best.left_categories.end(),
                                             static_cast<int>(data_.columns[best.feature][r]));
            } else {
                go_left = data_.columns[best.feature][r] <= best.threshold;
            }
            (go_left ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        const int left = grow(tree, std::move(left_rows), depth + 1);
        const int right = grow(tree, std::move(right_rows), depth + 1);
        TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
        node.feature = static_cast<int>(best.feature);
        node.categorical = best.categorical;
        node.threshold = best.threshold;
        node.left_categories = std::move(best.left_categories);
        node.left = left;
        node.right = right;
        return index;
    }

    struct Entry {
        double value;
        double g;
        double h;
    };

    const Dataset& data_;
    std::span<const double> response_;
    std::span<const double> hessian_;
    CartParams params_;
    Rng rng_;
    std::size_t mtry_ = 1;
    std::vector<Entry> scratch_;
};

} // namespace detail

inline Tree build_cart_tree(const Dataset& data, std::vector<std::uint32_t> rows,
                            std::span<const double> response, std::span<const double> hessian,
                            const CartParams& params) {
    detail::CartBuilder builder(data, response, hessian, params);
    return builder.build(std::move(rows));
}

} // namespace rashodet
