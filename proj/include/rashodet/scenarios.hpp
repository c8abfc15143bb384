#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rashodet/errors.hpp"
#include "rashodet/measures.hpp"
#include "rashodet/parallel.hpp"
#include "rashodet/profiles.hpp"
#include "rashodet/rng.hpp"

namespace rashodet {

struct ScenarioSpec {
    int id = 1;
    int n_pairs = 100;
    double sigma = 0.01;
    std::uint64_t seed = 0;
    int m = 101;
};

inline std::string_view scenario_label(int id) {
    switch (id) {
        case 1: return "parallel increasing lines";
        case 2: return "increasing curves that cross";
        case 3: return "same curve plus noise";
        case 4: return "two step curves, shared trend";
        case 5: return "increasing curve versus hump";
        case 6: return "increasing versus decreasing-then-flat";
        case 7: return "line versus staircase";
        case 8: return "mirrored curves";
        default: return "unknown";
    }
}

// Shared evaluation grid: uniform points over the empirical range of a
// fixed batch of standard-normal draws, so the domain looks like a real
// covariate sample rather than a synthetic interval.
inline Grid scenario_grid(const ScenarioSpec& spec) {
    if (spec.m < 2) throw Error(ErrorCode::bad_argument, "grid needs at least two points");
    Rng rng(derive_seed(spec.seed, "grid"));
    double lo = 0.0;
    double hi = 0.0;
    for (int i = 0; i < 500; ++i) {
        const double v = rng.normal();
        if (i == 0 || v < lo) lo = v;
        if (i == 0 || v > hi) hi = v;
    }
    Grid grid;
    grid.variable = "z";
    grid.strategy = GridStrategy::uniform;
    grid.points.resize(static_cast<std::size_t>(spec.m));
    for (int i = 0; i < spec.m; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(spec.m - 1);
        grid.points[static_cast<std::size_t>(i)] = lo + (hi - lo) * t;
    }
    grid.points.front() = lo;
    grid.points.back() = hi;
    return grid;
}

namespace detail {

// Step curve with a monotone trend: sorted breakpoints split [-1, 1] into
// segments whose levels walk from start to end with a little jitter.
struct StepCurve {
    std::vector<double> breaks;
    std::vector<double> levels;

    static StepCurve draw(Rng& rng) {
        StepCurve curve;
        const double start = rng.uniform(-0.85, -0.55);
        const double end = rng.uniform(0.45, 0.85);
        const int n_breaks = 6 + static_cast<int>(rng.uniform_int(5));
        curve.breaks.resize(static_cast<std::size_t>(n_breaks));
        for (double& b : curve.breaks) b = rng.uniform(-1.0, 1.0);
        std::sort(curve.breaks.begin(), curve.breaks.end());
        curve.levels.resize(static_cast<std::size_t>(n_breaks) + 1);
        for (std::size_t j = 0; j < curve.levels.size(); ++j) {
            const double t = static_cast<double>(j) / static_cast<double>(n_breaks);
            curve.levels[j] = start + (end - start) * t + rng.uniform(-0.08, 0.08);
        }
        return curve;
    }

    double operator()(double u) const {
        const auto seg = static_cast<std::size_t>(
            std::upper_bound(breaks.begin(), breaks.end(), u) - breaks.begin());
        return levels[seg];
    }
};

} // namespace detail

// One synthetic profile pair, deterministic in (seed, scenario id, pair
// index). Every generator draws its shape parameters first and per-point
// noise afterwards, and all values are clamped into [-1, 1].
inline std::pair<Profile, Profile> generate_pair(const ScenarioSpec& spec, int pair_index) {
    if (spec.id < 1 || spec.id > 8) {
        throw Error(ErrorCode::unknown_scenario,
                    "scenario id " + std::to_string(spec.id) + " is not in 1..8");
    }
    const Grid grid = scenario_grid(spec);
    Rng rng(derive_seed(spec.seed, "scenario", static_cast<std::uint64_t>(spec.id),
                        static_cast<std::uint64_t>(pair_index)));

    const std::size_t m = grid.size();
    const double mid = (grid.points.front() + grid.points.back()) / 2.0;
    const double half = (grid.points.back() - grid.points.front()) / 2.0;
    std::vector<double> u(m);
    for (std::size_t i = 0; i < m; ++i) u[i] = (grid.points[i] - mid) / half;

    std::vector<double> v1(m, 0.0);
    std::vector<double> v2(m, 0.0);
    switch (spec.id) {
        case 1: {
            const double a1 = rng.uniform(0.3, 0.9);
            const double a2 = rng.uniform(0.3, 0.9);
            for (std::size_t i = 0; i < m; ++i) {
                v1[i] = a1 * u[i];
                v2[i] = a2 * u[i];
            }
            break;
        }
        case 2: {
            const double a = rng.uniform(0.3, 0.55);
            const double kappa = rng.uniform(1.2, 2.2);
            const double amp = rng.uniform(0.6, 0.9);
            for (std::size_t i = 0; i < m; ++i) {
                v1[i] = a * u[i];
                v2[i] = amp * std::tanh(kappa * u[i]) / std::tanh(kappa);
            }
            break;
        }
        case 3: {
            const double amp = rng.uniform(0.55, 0.8);
            const double kappa = rng.uniform(0.8, 1.6);
            for (std::size_t i = 0; i < m; ++i) {
                v1[i] = amp * std::tanh(kappa * u[i]);
                v2[i] = v1[i] + rng.normal(0.0, spec.sigma);
            }
            break;
        }
        case 4: {
            const auto curve1 = detail::StepCurve::draw(rng);
            const auto curve2 = detail::StepCurve::draw(rng);
            for (std::size_t i = 0; i < m; ++i) {
                v1[i] = curve1(u[i]);
                v2[i] = curve2(u[i]);
            }
            break;
        }
        case 5: {
            const double amp1 = rng.uniform(0.5, 0.8);
            const double kappa1 = rng.uniform(1.0, 2.0);
            const double amp2 = rng.uniform(0.7, 1.0);
            const double center = rng.uniform(-0.25, 0.25);
            const double width = rng.uniform(0.25, 0.4);
            for (std::size_t i = 0; i < m; ++i) {
                v1[i] = amp1 * std::tanh(kappa1 * u[i]);
                const double d = (u[i] - center) / width;
                v2[i] = amp2 * std::exp(-d * d / 2.0) - amp2 / 2.0;
            }
            break;
        }
        case 6: {
            const double kappa = rng.uniform(2.5, 4.0);
            const double amp = rng.uniform(0.6, 0.9);
            const double v0 = rng.uniform(0.5, 0.8);
            const double bend = rng.uniform(-0.1, 0.3);
            const double v_flat = rng.uniform(-0.6, -0.2);
            for (std::size_t i = 0; i < m; ++i) {
                v1[i] = amp * std::tanh(kappa * u[i]);
                v2[i] = u[i] < bend ? v_flat + (v0 - v_flat) * (bend - u[i]) / (bend + 1.0)
                                    : v_flat;
            }
            break;
        }
        case 7: {
            const double trend = rng.uniform(0.5, 0.85);
            const int steps = 5 + static_cast<int>(rng.uniform_int(4));
            for (std::size_t i = 0; i < m; ++i) {
                v1[i] = trend * u[i];
                const int k = std::clamp(
                    static_cast<int>(std::floor((u[i] + 1.0) / 2.0 * steps)), 0, steps - 1);
                v2[i] = trend * (-1.0 + (2.0 * k + 1.0) / steps);
            }
            break;
        }
        case 8: {
            const double amp = rng.uniform(0.45, 0.85);
            const double kappa = rng.uniform(0.9, 1.5);
            for (std::size_t i = 0; i < m; ++i) {
                v1[i] = amp * std::tanh(kappa * u[i]);
                v2[i] = -v1[i] + rng.normal(0.0, spec.sigma);
            }
            break;
        }
    }
    for (double& v : v1) v = std::clamp(v, -1.0, 1.0);
    for (double& v : v2) v = std::clamp(v, -1.0, 1.0);

    Profile p1;
    p1.model_id = "g1";
    p1.variable = grid.variable;
    p1.grid = grid;
    p1.values = std::move(v1);
    Profile p2;
    p2.model_id = "g2";
    p2.variable = grid.variable;
    p2.grid = grid;
    p2.values = std::move(v2);
    return {std::move(p1), std::move(p2)};
}

struct MeasureSummary {
    MeasureKind kind = MeasureKind::pdi;
    std::vector<double> values; // one per pair, in pair order
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

struct ScenarioResult {
    int id = 0;
    std::vector<MeasureSummary> measures;
};

inline std::vector<ScenarioResult> evaluate_scenarios(const std::vector<ScenarioSpec>& specs,
                                                      const std::vector<MeasureSpec>& measures,
                                                      unsigned threads = 0) {
    std::vector<ScenarioResult> results(specs.size());
    std::vector<std::size_t> offsets(specs.size());
    std::size_t total = 0;
    for (std::size_t s = 0; s < specs.size(); ++s) {
        if (specs[s].n_pairs < 1) {
            throw Error(ErrorCode::bad_argument, "a scenario needs at least one pair");
        }
        results[s].id = specs[s].id;
        results[s].measures.resize(measures.size());
        for (std::size_t k = 0; k < measures.size(); ++k) {
            results[s].measures[k].kind = measures[k].kind;
            results[s].measures[k].values.resize(
                static_cast<std::size_t>(specs[s].n_pairs));
        }
        offsets[s] = total;
        total += static_cast<std::size_t>(specs[s].n_pairs);
    }

    parallel_for(
        total,
        [&](std::size_t job) {
            std::size_t s = specs.size() - 1;
            while (offsets[s] > job) --s;
            const auto pair_index = static_cast<int>(job - offsets[s]);
            const auto [p1, p2] = generate_pair(specs[s], pair_index);
            for (std::size_t k = 0; k < measures.size(); ++k) {
                const MeasureSpec& ms = measures[k];
                double value = 0.0;
                switch (ms.kind) {
                    case MeasureKind::pdi:
                        value = pdi(p1, p2, ms.window, ms.degree, ms.tau);
                        break;
                    case MeasureKind::l2_profiles:
                        value = l2_profiles(p1, p2);
                        break;
                    case MeasureKind::l2_derivatives:
                        value = l2_derivatives(p1, p2, ms.window, ms.degree);
                        break;
                }
                results[s].measures[k].values[static_cast<std::size_t>(pair_index)] = value;
            }
        },
        threads);

    for (ScenarioResult& result : results) {
        for (MeasureSummary& summary : result.measures) {
            std::vector<double> sorted = summary.values;
            std::sort(sorted.begin(), sorted.end());
            summary.q1 = empirical_quantile(sorted, 0.25);
            summary.median = empirical_quantile(sorted, 0.5);
            summary.q3 = empirical_quantile(sorted, 0.75);
        }
    }
    return results;
}

} // namespace rashodet
