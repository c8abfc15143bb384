#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "rashodet/errors.hpp"

namespace rashodet {

// Mann-Whitney AUC with tie handling: (#concordant + 0.5 #tied) / (pos neg).
// Pair counts are accumulated as integers (doubled to keep the half weight
// exact), so the result is identical to exhaustive pair enumeration.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw Error(ErrorCode::bad_argument, "scores and labels differ in length");
    }
    const std::size_t n = scores.size();
    std::uint64_t pos = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) {
            throw Error(ErrorCode::bad_argument, "labels must be 0 or 1");
        }
        pos += static_cast<std::uint64_t>(y);
    }
    const std::uint64_t neg = n - pos;
    if (pos == 0 || neg == 0) {
        throw Error(ErrorCode::single_class, "auc needs both classes");
    }

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return scores[a] < scores[b]; });

    // Walk groups of equal score: positives in a group are concordant with
    // every strictly lower negative and tied with the group's own negatives.
    std::uint64_t numerator2 = 0;
    std::uint64_t neg_below = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        std::uint64_t group_pos = 0, group_neg = 0;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] == 1) ++group_pos;
            else ++group_neg;
            ++j;
        }
        numerator2 += 2 * group_pos * neg_below + group_pos * group_neg;
        neg_below += group_neg;
        i = j;
    }
    return static_cast<double>(numerator2) / static_cast<double>(2 * pos * neg);
}

inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    return auc(std::span<const double>(scores), std::span<const int>(labels));
}

} // namespace rashodet
