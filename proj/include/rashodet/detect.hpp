#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rashodet/errors.hpp"
#include "rashodet/exchange.hpp"
#include "rashodet/learners.hpp"
#include "rashodet/measures.hpp"
#include "rashodet/profiles.hpp"

namespace rashodet {

enum class MetricSource { cv_mean, test };

inline std::string_view metric_source_name(MetricSource source) {
    return source == MetricSource::cv_mean ? "cv_mean" : "test";
}

enum class DetectVariant { full, greedy };

inline std::string_view detect_variant_name(DetectVariant variant) {
    return variant == DetectVariant::full ? "full" : "greedy";
}

struct RashomonConfig {
    double epsilon = 0.04;
    // Number of models to select; 0 applies the square-root default.
    int k = 0;
    MeasureSpec measure;
    // Explicit reference model id; empty picks the metric argmax.
    std::string reference_id;
    DetectVariant variant = DetectVariant::full;
};

struct DetectResult {
    std::string reference_id;
    std::vector<std::string> selected;
    std::vector<double> selection_scores; // one per selected model after the first
    std::vector<std::string> rashomon_ids;
    DisparityMatrix matrix;
    std::vector<DisparityRecord> records;
    RashomonConfig config;
    int k_requested = 0;
    int k_effective = 0;
};

inline std::vector<ModelScore> model_scores(const std::vector<ModelRecord>& records,
                                            MetricSource source) {
    std::vector<ModelScore> scores;
    for (const ModelRecord& record : records) {
        ModelScore score;
        score.id = record.model.id;
        if (source == MetricSource::cv_mean) {
            score.metric = record.cv_auc_mean;
        } else {
            if (!record.test_auc) {
                throw Error(ErrorCode::bad_argument,
                            "model '" + record.model.id + "' carries no test metric");
            }
            score.metric = *record.test_auc;
        }
        scores.push_back(std::move(score));
    }
    return scores;
}

inline std::string reference_model(std::span<const ModelScore> scores,
                                   const RashomonConfig& config) {
    if (scores.empty()) throw Error(ErrorCode::bad_argument, "no models to choose from");
    if (!config.reference_id.empty()) {
        for (const ModelScore& s : scores) {
            if (s.id == config.reference_id) return s.id;
        }
        throw Error(ErrorCode::unknown_explicit_id,
                    "reference model '" + config.reference_id + "' is not among the records");
    }
    const ModelScore* best = &scores[0];
    for (const ModelScore& s : scores.subspan(1)) {
        if (s.metric > best->metric || (s.metric == best->metric && s.id < best->id)) {
            best = &s;
        }
    }
    return best->id;
}

// Members within epsilon of the reference metric, reference always included.
// Sorted by metric descending, ties by id, so output order is total.
inline std::vector<std::string> build_rashomon_set(std::span<const ModelScore> scores,
                                                   const std::string& reference_id,
                                                   double epsilon) {
    if (epsilon < 0.0) throw Error(ErrorCode::bad_argument, "epsilon must be >= 0");
    double ref_metric = 0.0;
    bool found = false;
    for (const ModelScore& s : scores) {
        if (s.id == reference_id) {
            ref_metric = s.metric;
            found = true;
        }
    }
    if (!found) {
        throw Error(ErrorCode::unknown_explicit_id,
                    "reference model '" + reference_id + "' is not among the records");
    }
    std::vector<const ModelScore*> members;
    for (const ModelScore& s : scores) {
        if (s.metric >= ref_metric - epsilon) members.push_back(&s);
    }
    std::sort(members.begin(), members.end(), [](const ModelScore* a, const ModelScore* b) {
        if (a->metric != b->metric) return a->metric > b->metric;
        return a->id < b->id;
    });
    std::vector<std::string> ids;
    for (const ModelScore* s : members) ids.push_back(s->id);
    return ids;
}

inline int default_k(std::size_t rashomon_size) {
    return std::max(2, static_cast<int>(std::llround(std::sqrt(
                           static_cast<double>(rashomon_size)))));
}

namespace detail {

inline ProfileBundle restrict_bundle(const ProfileBundle& bundle,
                                     const std::vector<std::string>& ids) {
    ProfileBundle out;
    out.model_ids = ids;
    std::vector<std::size_t> slots;
    for (const std::string& id : ids) {
        const int k = bundle.model_index(id);
        if (k < 0) {
            throw Error(ErrorCode::bundle_incomplete,
                        "bundle has no profiles for model '" + id + "'");
        }
        slots.push_back(static_cast<std::size_t>(k));
    }
    for (const BundleVariable& var : bundle.variables) {
        BundleVariable copy;
        copy.name = var.name;
        copy.kind = var.kind;
        copy.grid = var.grid;
        copy.categories = var.categories;
        for (std::size_t slot : slots) copy.values.push_back(var.values[slot]);
        out.variables.push_back(std::move(copy));
    }
    return out;
}

} // namespace detail

// Step-wise selection of the k mutually most dissimilar Rashomon members,
// seeded with the reference model. The full variant scores a candidate by
// its mean disparity to everything selected so far; the greedy variant by
// the disparity to the most recent pick alone. Ties fall to the smaller id.
inline DetectResult rashomon_detect(std::span<const ModelScore> scores,
                                    const ProfileBundle& bundle,
                                    const RashomonConfig& config) {
    if (config.k != 0 && config.k < 2) {
        throw Error(ErrorCode::bad_argument, "k must be at least 2");
    }

    DetectResult result;
    result.config = config;
    result.reference_id = reference_model(scores, config);
    result.rashomon_ids = build_rashomon_set(scores, result.reference_id, config.epsilon);

    const ProfileBundle members = detail::restrict_bundle(bundle, result.rashomon_ids);
    DisparityResult disparity = pairwise_disparity(members, config.measure);
    result.matrix = std::move(disparity.matrix);
    result.records = std::move(disparity.records);

    result.k_requested = config.k == 0 ? default_k(result.rashomon_ids.size()) : config.k;
    result.k_effective =
        std::min<int>(result.k_requested, static_cast<int>(result.rashomon_ids.size()));

    // Candidate ids in lexicographic order make "first strict improvement
    // wins" equivalent to the documented smallest-id tie-break.
    std::vector<std::string> remaining = result.rashomon_ids;
    std::sort(remaining.begin(), remaining.end());
    remaining.erase(std::find(remaining.begin(), remaining.end(), result.reference_id));
    result.selected.push_back(result.reference_id);

    while (static_cast<int>(result.selected.size()) < result.k_effective) {
        int best = -1;
        double best_score = -1.0;
        for (std::size_t c = 0; c < remaining.size(); ++c) {
            const auto ci = static_cast<std::size_t>(result.matrix.index_of(remaining[c]));
            double score = 0.0;
            if (config.variant == DetectVariant::greedy) {
                const auto last =
                    static_cast<std::size_t>(result.matrix.index_of(result.selected.back()));
                score = result.matrix.at(ci, last);
            } else {
                for (const std::string& id : result.selected) {
                    score += result.matrix.at(
                        ci, static_cast<std::size_t>(result.matrix.index_of(id)));
                }
                score /= static_cast<double>(result.selected.size());
            }
            if (score > best_score) {
                best_score = score;
                best = static_cast<int>(c);
            }
        }
        result.selected.push_back(remaining[static_cast<std::size_t>(best)]);
        result.selection_scores.push_back(best_score);
        remaining.erase(remaining.begin() + best);
    }
    return result;
}

inline DetectResult rashomon_detect(const std::vector<ModelRecord>& records,
                                    const ProfileBundle& bundle, const RashomonConfig& config,
                                    MetricSource source = MetricSource::cv_mean) {
    return rashomon_detect(std::span<const ModelScore>(model_scores(records, source)), bundle,
                           config);
}

} // namespace rashodet
