#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rashodet/auc.hpp"
#include "rashodet/rng.hpp"

using namespace rashodet;

namespace {

// Exhaustive pairwise concordance count, the reference the fast path must
// match bit for bit.
double auc_by_enumeration(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::uint64_t numerator2 = 0, pos = 0, neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] == 1) {
            ++pos;
            for (std::size_t j = 0; j < scores.size(); ++j) {
                if (labels[j] == 1) continue;
                if (scores[i] > scores[j]) numerator2 += 2;
                else if (scores[i] == scores[j]) numerator2 += 1;
            }
        } else {
            ++neg;
        }
    }
    return static_cast<double>(numerator2) / static_cast<double>(2 * pos * neg);
}

} // namespace

TEST_CASE("auc on worked examples") {
    REQUIRE(auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == 0.75);
    REQUIRE(auc({0.0, 1.0, 0.0, 1.0}, {0, 1, 0, 1}) == 1.0);
    REQUIRE(auc({0.3, 0.3, 0.3, 0.3}, {0, 1, 0, 1}) == 0.5);
    REQUIRE(auc({0.9, 0.1}, {0, 1}) == 0.0);
}

TEST_CASE("auc matches exhaustive counting with ties") {
    Rng rng(404);
    for (int rep = 0; rep < 60; ++rep) {
        const std::size_t n = 2 + rng.uniform_int(60);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        bool has0 = false, has1 = false;
        for (std::size_t i = 0; i < n; ++i) {
            // Coarse quantization forces plenty of tied scores.
            scores[i] = std::floor(rng.uniform() * 8.0) / 8.0;
            labels[i] = rng.uniform() < 0.5 ? 0 : 1;
            (labels[i] ? has1 : has0) = true;
        }
        if (!has0) labels[0] = 0;
        if (!has1) labels[n - 1] = 1;
        REQUIRE(auc(scores, labels) == auc_by_enumeration(scores, labels));
    }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
    Rng rng(77);
    std::vector<double> scores(40);
    std::vector<int> labels(40);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        scores[i] = std::floor(rng.uniform() * 10.0) / 10.0;
        labels[i] = i % 3 == 0 ? 1 : 0;
    }
    const double base = auc(scores, labels);

    auto transformed = scores;
    for (auto& s : transformed) s = std::exp(s);
    REQUIRE(auc(transformed, labels) == base);

    transformed = scores;
    for (auto& s : transformed) s = s * s * s + 2.0 * s - 5.0;
    REQUIRE(auc(transformed, labels) == base);
}

TEST_CASE("auc refuses single-class input") {
    try {
        auc({0.2, 0.4}, {1, 1});
        FAIL("expected an error");
    } catch (const Error& e) {
        REQUIRE(e.code() == ErrorCode::single_class);
    }
    REQUIRE_THROWS_AS(auc({0.2}, {1, 0}), Error);
}
