#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rashodet/errors.hpp"
#include "rashodet/parallel.hpp"
#include "rashodet/profiles.hpp"

namespace rashodet {

enum class MeasureKind { pdi, l2_profiles, l2_derivatives };

inline std::string_view measure_kind_name(MeasureKind kind) {
    switch (kind) {
    case MeasureKind::pdi: return "pdi";
    case MeasureKind::l2_profiles: return "l2";
    case MeasureKind::l2_derivatives: return "l2der";
    }
    return "";
}

inline MeasureKind measure_kind_from_name(std::string_view name) {
    if (name == "pdi") return MeasureKind::pdi;
    if (name == "l2") return MeasureKind::l2_profiles;
    if (name == "l2der") return MeasureKind::l2_derivatives;
    throw Error(ErrorCode::bad_argument, "unknown measure '" + std::string(name) + "'");
}

struct MeasureSpec {
    MeasureKind kind = MeasureKind::pdi;
    int window = 7;
    int degree = 2;
    // Sign dead zone for pdi; unset means the per-profile default
    // 0.01 * value range / grid span.
    std::optional<double> tau;
    bool categorical_center = true;
    bool categorical_normalize = true;
    unsigned threads = 0;
};

struct DerivativeVector {
    std::string model_id;
    std::string variable;
    std::vector<double> values;
    int window = 7;
    int degree = 2;
};

namespace detail {

inline void check_derivative_params(std::size_t m, int window, int degree) {
    if (window < 3 || window % 2 == 0 || degree < 1 || degree >= window) {
        throw Error(ErrorCode::bad_window,
                    "derivative estimation needs an odd window >= 3 and degree in [1, window)");
    }
    if (m < static_cast<std::size_t>(window)) {
        throw Error(ErrorCode::profile_too_short,
                    "profile has " + std::to_string(m) + " points, window needs " +
                        std::to_string(window));
    }
}

// Least-squares polynomial fit on one window via modified Gram-Schmidt QR of
// the scaled Vandermonde matrix; returns the linear coefficient.
inline double window_slope(std::span<const double> x, std::span<const double> y, int degree) {
    const std::size_t w = x.size();
    const std::size_t cols = static_cast<std::size_t>(degree) + 1;

    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));

    std::vector<double> q(w * cols);
    for (std::size_t r = 0; r < w; ++r) {
        const double u = x[r] / scale;
        double power = 1.0;
        for (std::size_t t = 0; t < cols; ++t) {
            q[t * w + r] = power;
            power *= u;
        }
    }

    std::vector<double> rmat(cols * cols, 0.0);
    for (std::size_t t = 0; t < cols; ++t) {
        double* qt = q.data() + t * w;
        for (std::size_t s = 0; s < t; ++s) {
            const double* qs = q.data() + s * w;
            double dot = 0.0;
            for (std::size_t r = 0; r < w; ++r) dot += qs[r] * qt[r];
            rmat[s * cols + t] = dot;
            for (std::size_t r = 0; r < w; ++r) qt[r] -= dot * qs[r];
        }
        double norm = 0.0;
        for (std::size_t r = 0; r < w; ++r) norm += qt[r] * qt[r];
        norm = std::sqrt(norm);
        rmat[t * cols + t] = norm;
        for (std::size_t r = 0; r < w; ++r) qt[r] /= norm;
    }

    std::vector<double> rhs(cols);
    for (std::size_t t = 0; t < cols; ++t) {
        const double* qt = q.data() + t * w;
        double dot = 0.0;
        for (std::size_t r = 0; r < w; ++r) dot += qt[r] * y[r];
        rhs[t] = dot;
    }
    std::vector<double> beta(cols);
    for (std::size_t t = cols; t-- > 0;) {
        double v = rhs[t];
        for (std::size_t s = t + 1; s < cols; ++s) v -= rmat[t * cols + s] * beta[s];
        beta[t] = v / rmat[t * cols + t];
    }
    return beta[1] / scale;
}

} // namespace detail

// Local polynomial derivative estimate: at each grid index the w nearest
// points (window shifted inward at the boundaries) are fit with a degree-q
// polynomial in (z - z_i) and the fitted slope at the center is returned.
inline std::vector<double> gold_derivative_values(std::span<const double> grid,
                                                  std::span<const double> values, int window,
                                                  int degree) {
    detail::check_derivative_params(grid.size(), window, degree);
    const std::size_t m = grid.size();
    const auto w = static_cast<std::size_t>(window);
    const std::size_t half = w / 2;

    std::vector<double> out(m);
    std::vector<double> x(w), y(w);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t start = std::min(i > half ? i - half : 0, m - w);
        for (std::size_t r = 0; r < w; ++r) {
            x[r] = grid[start + r] - grid[i];
            y[r] = values[start + r];
        }
        out[i] = detail::window_slope(x, y, degree);
    }
    return out;
}

inline DerivativeVector gold_derivative(const Profile& profile, int window = 7, int degree = 2) {
    DerivativeVector der;
    der.model_id = profile.model_id;
    der.variable = profile.variable;
    der.window = window;
    der.degree = degree;
    der.values = gold_derivative_values(profile.grid.points, profile.values, window, degree);
    return der;
}

namespace detail {

inline void check_same_grid(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || !std::equal(a.begin(), a.end(), b.begin())) {
        throw Error(ErrorCode::grid_mismatch, "profiles live on different grids");
    }
}

inline double trapezoid_l2(std::span<const double> grid, std::span<const double> a,
                           std::span<const double> b) {
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double d0 = a[i] - b[i];
        const double d1 = a[i + 1] - b[i + 1];
        integral += (grid[i + 1] - grid[i]) * (d0 * d0 + d1 * d1) / 2.0;
    }
    return std::sqrt(integral);
}

inline bool uniform_spacing(std::span<const double> grid) {
    const double h0 = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (std::abs(grid[i + 1] - grid[i] - h0) > 1e-9 * std::max(std::abs(h0), 1.0)) {
            return false;
        }
    }
    return true;
}

inline int sign_with_tolerance(double v, double tau) {
    if (std::abs(v) <= tau) return 0;
    return v > 0.0 ? 1 : -1;
}

inline double default_sign_tolerance(std::span<const double> values, double span) {
    double lo = values[0], hi = values[0], max_abs = 0.0;
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        max_abs = std::max(max_abs, std::abs(v));
    }
    // The second term absorbs rounding noise in the fitted slopes of flat
    // profiles, whose value range is zero.
    return std::max(0.01 * (hi - lo) / span, 1e-9 * (1.0 + max_abs) / span);
}

} // namespace detail

inline double l2_profiles_values(std::span<const double> grid, std::span<const double> v1,
                                 std::span<const double> v2) {
    if (grid.size() != v1.size() || grid.size() != v2.size()) {
        throw Error(ErrorCode::grid_mismatch, "profile lengths differ from the grid");
    }
    return detail::trapezoid_l2(grid, v1, v2);
}

inline double l2_profiles(const Profile& p1, const Profile& p2) {
    detail::check_same_grid(p1.grid.points, p2.grid.points);
    return l2_profiles_values(p1.grid.points, p1.values, p2.values);
}

inline double l2_derivatives_values(std::span<const double> grid, std::span<const double> v1,
                                    std::span<const double> v2, int window = 7, int degree = 2) {
    const auto d1 = gold_derivative_values(grid, v1, window, degree);
    const auto d2 = gold_derivative_values(grid, v2, window, degree);
    return detail::trapezoid_l2(grid, d1, d2);
}

inline double l2_derivatives(const Profile& p1, const Profile& p2, int window = 7,
                             int degree = 2) {
    detail::check_same_grid(p1.grid.points, p2.grid.points);
    return l2_derivatives_values(p1.grid.points, p1.values, p2.values, window, degree);
}

// Fraction of the grid where the two profiles' derivative signs disagree,
// each sign read with a dead zone tau. Uniform grids weight every point
// 1/m; non-uniform grids use span-normalized trapezoid weights so the
// result still estimates the domain fraction.
inline double pdi_from_derivatives(std::span<const double> grid, std::span<const double> d1,
                                   std::span<const double> d2, double tau1, double tau2) {
    const std::size_t m = grid.size();
    double result = 0.0;
    if (detail::uniform_spacing(grid)) {
        std::size_t disagreements = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (detail::sign_with_tolerance(d1[i], tau1) !=
                detail::sign_with_tolerance(d2[i], tau2)) {
                ++disagreements;
            }
        }
        result = static_cast<double>(disagreements) / static_cast<double>(m);
    } else {
        const double span = grid.back() - grid.front();
        for (std::size_t i = 0; i < m; ++i) {
            const double left = i == 0 ? grid[0] : grid[i - 1];
            const double right = i + 1 == m ? grid[m - 1] : grid[i + 1];
            if (detail::sign_with_tolerance(d1[i], tau1) !=
                detail::sign_with_tolerance(d2[i], tau2)) {
                result += (right - left) / 2.0 / span;
            }
        }
    }
    return result;
}

inline double pdi_values(std::span<const double> grid, std::span<const double> v1,
                         std::span<const double> v2, int window = 7, int degree = 2,
                         std::optional<double> tau = std::nullopt) {
    if (grid.size() != v1.size() || grid.size() != v2.size()) {
        throw Error(ErrorCode::grid_mismatch, "profile lengths differ from the grid");
    }
    const auto d1 = gold_derivative_values(grid, v1, window, degree);
    const auto d2 = gold_derivative_values(grid, v2, window, degree);
    const double span = grid.back() - grid.front();
    const double tau1 = tau ? *tau : detail::default_sign_tolerance(v1, span);
    const double tau2 = tau ? *tau : detail::default_sign_tolerance(v2, span);
    return pdi_from_derivatives(grid, d1, d2, tau1, tau2);
}

inline double pdi(const Profile& p1, const Profile& p2, int window = 7, int degree = 2,
                  std::optional<double> tau = std::nullopt) {
    detail::check_same_grid(p1.grid.points, p2.grid.points);
    return pdi_values(p1.grid.points, p1.values, p2.values, window, degree, tau);
}

inline double categorical_disparity_values(std::span<const double> v1,
                                           std::span<const double> v2, bool center = true,
                                           bool normalize = true) {
    const std::size_t c = v1.size();
    double mean1 = 0.0, mean2 = 0.0;
    if (center) {
        for (double v : v1) mean1 += v;
        for (double v : v2) mean2 += v;
        mean1 /= static_cast<double>(c);
        mean2 /= static_cast<double>(c);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        const double d = (v1[i] - mean1) - (v2[i] - mean2);
        sum += d * d;
    }
    const double norm = std::sqrt(sum);
    return normalize ? norm / std::sqrt(static_cast<double>(c)) : norm;
}

inline double categorical_disparity(const CategoricalProfile& c1, const CategoricalProfile& c2,
                                    bool center = true, bool normalize = true) {
    if (c1.categories != c2.categories) {
        throw Error(ErrorCode::category_mismatch,
                    "categorical profiles list different categories");
    }
    return categorical_disparity_values(c1.values, c2.values, center, normalize);
}

struct DisparityRecord {
    std::string model_a;
    std::string model_b;
    std::vector<std::pair<std::string, double>> per_variable;
    double average = 0.0;
};

struct DisparityMatrix {
    std::vector<std::string> ids;
    std::vector<double> values; // row-major, ids.size() squared

    double at(std::size_t i, std::size_t j) const { return values[i * ids.size() + j]; }
    int index_of(std::string_view id) const {
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (ids[k] == id) return static_cast<int>(k);
        }
        return -1;
    }
};

struct DisparityResult {
    DisparityMatrix matrix;
    std::vector<DisparityRecord> records;
};

// All pairwise disparities over a bundle. Model ids are sorted so the output
// is independent of the order models were supplied in; derivatives are
// computed once per (model, variable) and shared across pairs.
inline DisparityResult pairwise_disparity(const ProfileBundle& bundle,
                                          const MeasureSpec& spec) {
    DisparityResult result;
    result.matrix.ids = bundle.model_ids;
    std::sort(result.matrix.ids.begin(), result.matrix.ids.end());
    const std::size_t k = result.matrix.ids.size();
    const std::size_t p = bundle.variables.size();
    result.matrix.values.assign(k * k, 0.0);

    std::vector<std::size_t> slot(k);
    for (std::size_t i = 0; i < k; ++i) {
        slot[i] = static_cast<std::size_t>(bundle.model_index(result.matrix.ids[i]));
    }

    const bool needs_derivatives =
        spec.kind == MeasureKind::pdi || spec.kind == MeasureKind::l2_derivatives;
    std::vector<std::vector<std::vector<double>>> derivatives(p);
    std::vector<std::vector<double>> taus(p);
    if (needs_derivatives) {
        for (std::size_t j = 0; j < p; ++j) {
            if (bundle.variables[j].kind != VarKind::numeric) continue;
            derivatives[j].resize(k);
            taus[j].resize(k);
        }
        parallel_for(p * k, [&](std::size_t idx) {
            const std::size_t j = idx / k;
            const std::size_t i = idx % k;
            const BundleVariable& var = bundle.variables[j];
            if (var.kind != VarKind::numeric) return;
            const auto& values = var.values[slot[i]];
            derivatives[j][i] =
                gold_derivative_values(var.grid.points, values, spec.window, spec.degree);
            taus[j][i] = spec.tau ? *spec.tau
                                  : detail::default_sign_tolerance(values, var.grid.span());
        }, spec.threads);
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) pairs.push_back({a, b});
    }
    result.records.resize(pairs.size());

    parallel_for(pairs.size(), [&](std::size_t n) {
        const auto [a, b] = pairs[n];
        DisparityRecord record;
        record.model_a = result.matrix.ids[a];
        record.model_b = result.matrix.ids[b];
        double sum = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const BundleVariable& var = bundle.variables[j];
            const auto& va = var.values[slot[a]];
            const auto& vb = var.values[slot[b]];
            double value = 0.0;
            try {
                if (var.kind == VarKind::categorical) {
                    value = categorical_disparity_values(va, vb, spec.categorical_center,
                                                         spec.categorical_normalize);
                } else if (spec.kind == MeasureKind::l2_profiles) {
                    value = l2_profiles_values(var.grid.points, va, vb);
                } else if (spec.kind == MeasureKind::l2_derivatives) {
                    value = detail::trapezoid_l2(var.grid.points, derivatives[j][a],
                                                 derivatives[j][b]);
                } else {
                    value = pdi_from_derivatives(var.grid.points, derivatives[j][a],
                                                 derivatives[j][b], taus[j][a], taus[j][b]);
                }
            } catch (const Error& e) {
                throw Error(e.code(), "pair (" + record.model_a + ", " + record.model_b +
                                          "), variable '" + var.name + "': " + e.message());
            }
            record.per_variable.push_back({var.name, value});
            sum += value;
        }
        record.average = sum / static_cast<double>(p);
        result.records[n] = std::move(record);
    }, spec.threads);

    for (std::size_t n = 0; n < pairs.size(); ++n) {
        const auto [a, b] = pairs[n];
        result.matrix.values[a * k + b] = result.records[n].average;
        result.matrix.values[b * k + a] = result.records[n].average;
    }
    return result;
}

} // namespace rashodet
