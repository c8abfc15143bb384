#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rashodet/profiles.hpp"

namespace rashodet {

namespace detail {

// Fixed two-decimal formatting keeps SVG bytes identical across runs and
// locales.
inline std::string svg_num(double v) {
    if (!std::isfinite(v)) v = 0.0;
    char buf[48];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    if (ec != std::errc()) return "0.00";
    return std::string(buf, ptr);
}

// Shorter general formatting for tick and cell labels.
inline std::string svg_label(double v) {
    if (!std::isfinite(v)) v = 0.0;
    char buf[48];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 4);
    if (ec != std::errc()) return "0";
    return std::string(buf, ptr);
}

inline std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline const char* selection_color(std::size_t index) {
    static constexpr const char* kPalette[] = {"#d62728", "#2ca02c", "#1f77b4",
                                               "#ff7f0e", "#9467bd", "#8c564b"};
    return kPalette[index % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

} // namespace detail

// Line chart of one numeric variable's profiles: every model in the bundle
// drawn grey, the selected models drawn on top in the palette colors with a
// legend. Selections with fewer than two models render all grey, matching
// the convention that a lone reference is not a detection.
inline std::string profile_svg(const BundleVariable& var,
                               const std::vector<std::string>& model_ids,
                               const std::vector<std::string>& selected) {
    const double width = 720.0, height = 480.0;
    const double left = 64.0, right = 24.0, top = 40.0, bottom = 48.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    const double x_lo = var.grid.points.front();
    const double x_hi = var.grid.points.back();
    double y_lo = var.values[0][0], y_hi = var.values[0][0];
    for (const std::vector<double>& values : var.values) {
        for (double v : values) {
            y_lo = std::min(y_lo, v);
            y_hi = std::max(y_hi, v);
        }
    }
    if (!(y_hi > y_lo)) {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    const auto x_of = [&](double v) { return left + (v - x_lo) / (x_hi - x_lo) * plot_w; };
    const auto y_of = [&](double v) {
        return top + (1.0 - (v - y_lo) / (y_hi - y_lo)) * plot_h;
    };

    const bool highlight = selected.size() >= 2;
    const std::set<std::string> chosen(selected.begin(), selected.end());

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
           "viewBox=\"0 0 720 480\">\n";
    out += "<rect width=\"720\" height=\"480\" fill=\"#ffffff\"/>\n";
    out += "<text x=\"" + detail::svg_num(left) + "\" y=\"24\" font-family=\"sans-serif\" "
           "font-size=\"16\" fill=\"#222222\">" +
           detail::xml_escape(var.name) + "</text>\n";

    for (int t = 0; t <= 4; ++t) {
        const double fx = x_lo + (x_hi - x_lo) * t / 4.0;
        const double fy = y_lo + (y_hi - y_lo) * t / 4.0;
        const std::string gx = detail::svg_num(x_of(fx));
        const std::string gy = detail::svg_num(y_of(fy));
        out += "<line x1=\"" + gx + "\" y1=\"" + detail::svg_num(top) + "\" x2=\"" + gx +
               "\" y2=\"" + detail::svg_num(top + plot_h) +
               "\" stroke=\"#e5e5e5\" stroke-width=\"1\"/>\n";
        out += "<line x1=\"" + detail::svg_num(left) + "\" y1=\"" + gy + "\" x2=\"" +
               detail::svg_num(left + plot_w) + "\" y2=\"" + gy +
               "\" stroke=\"#e5e5e5\" stroke-width=\"1\"/>\n";
        out += "<text x=\"" + gx + "\" y=\"" + detail::svg_num(height - 24.0) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\" "
               "text-anchor=\"middle\">" +
               detail::svg_label(fx) + "</text>\n";
        out += "<text x=\"" + detail::svg_num(left - 8.0) + "\" y=\"" +
               detail::svg_num(y_of(fy) + 4.0) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\" "
               "text-anchor=\"end\">" +
               detail::svg_label(fy) + "</text>\n";
    }
    out += "<rect x=\"" + detail::svg_num(left) + "\" y=\"" + detail::svg_num(top) +
           "\" width=\"" + detail::svg_num(plot_w) + "\" height=\"" + detail::svg_num(plot_h) +
           "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n";

    const auto polyline = [&](const std::vector<double>& values, const std::string& stroke,
                              const char* stroke_width) {
        std::string points;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i > 0) points += ' ';
            points += detail::svg_num(x_of(var.grid.points[i])) + ',' +
                      detail::svg_num(y_of(values[i]));
        }
        out += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
               stroke_width + "\" points=\"" + points + "\"/>\n";
    };

    for (std::size_t k = 0; k < model_ids.size(); ++k) {
        if (highlight && chosen.count(model_ids[k])) continue;
        polyline(var.values[k], "#b9b9b9", "1.2");
    }
    if (highlight) {
        for (std::size_t s = 0; s < selected.size(); ++s) {
            for (std::size_t k = 0; k < model_ids.size(); ++k) {
                if (model_ids[k] != selected[s]) continue;
                polyline(var.values[k], detail::selection_color(s), "2.2");
            }
        }
        for (std::size_t s = 0; s < selected.size(); ++s) {
            const double ly = top + 14.0 + 18.0 * static_cast<double>(s);
            out += "<rect x=\"" + detail::svg_num(left + plot_w - 150.0) + "\" y=\"" +
                   detail::svg_num(ly - 9.0) +
                   "\" width=\"12\" height=\"12\" fill=\"" +
                   detail::selection_color(s) + "\"/>\n";
            out += "<text x=\"" + detail::svg_num(left + plot_w - 132.0) + "\" y=\"" +
                   detail::svg_num(ly + 1.0) +
                   "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222222\">" +
                   detail::xml_escape(selected[s]) + "</text>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

// Heatmap of one model's per-variable disparities against a list of other
// models: rows are the other models, columns the variables, intensity
// white-to-red scaled by the largest shown value.
inline std::string heatmap_svg(const std::string& title,
                               const std::vector<std::string>& row_ids,
                               const std::vector<std::string>& column_names,
                               const std::vector<std::vector<double>>& values) {
    const double cell_w = 74.0, cell_h = 34.0;
    const double left = 96.0, top = 72.0;
    const double width = left + cell_w * static_cast<double>(column_names.size()) + 24.0;
    const double height = top + cell_h * static_cast<double>(row_ids.size()) + 24.0;

    double max_value = 0.0;
    for (const std::vector<double>& row : values) {
        for (double v : row) max_value = std::max(max_value, v);
    }

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(width) +
           "\" height=\"" + detail::svg_num(height) + "\" viewBox=\"0 0 " +
           detail::svg_num(width) + " " + detail::svg_num(height) + "\">\n";
    out += "<rect width=\"" + detail::svg_num(width) + "\" height=\"" +
           detail::svg_num(height) + "\" fill=\"#ffffff\"/>\n";
    out += "<text x=\"12\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" "
           "fill=\"#222222\">" +
           detail::xml_escape(title) + "</text>\n";

    for (std::size_t c = 0; c < column_names.size(); ++c) {
        out += "<text x=\"" +
               detail::svg_num(left + cell_w * (static_cast<double>(c) + 0.5)) +
               "\" y=\"" + detail::svg_num(top - 10.0) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\" "
               "text-anchor=\"middle\">" +
               detail::xml_escape(column_names[c]) + "</text>\n";
    }
    for (std::size_t r = 0; r < row_ids.size(); ++r) {
        out += "<text x=\"" + detail::svg_num(left - 8.0) + "\" y=\"" +
               detail::svg_num(top + cell_h * (static_cast<double>(r) + 0.5) + 4.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\" "
               "text-anchor=\"end\">" +
               detail::xml_escape(row_ids[r]) + "</text>\n";
        for (std::size_t c = 0; c < column_names.size(); ++c) {
            const double v = values[r][c];
            const double intensity = max_value > 0.0 ? std::clamp(v / max_value, 0.0, 1.0)
                                                     : 0.0;
            const int red = 255 - static_cast<int>(std::lround(41.0 * intensity));
            const int other = 255 - static_cast<int>(std::lround(216.0 * intensity));
            char color[8];
            std::snprintf(color, sizeof(color), "#%02x%02x%02x", red, other, other);
            const double x = left + cell_w * static_cast<double>(c);
            const double y = top + cell_h * static_cast<double>(r);
            out += "<rect x=\"" + detail::svg_num(x) + "\" y=\"" + detail::svg_num(y) +
                   "\" width=\"" + detail::svg_num(cell_w) + "\" height=\"" +
                   detail::svg_num(cell_h) + "\" fill=\"" + color +
                   "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
            const char* text_color = intensity > 0.6 ? "#ffffff" : "#333333";
            out += "<text x=\"" + detail::svg_num(x + cell_w / 2.0) + "\" y=\"" +
                   detail::svg_num(y + cell_h / 2.0 + 4.0) +
                   "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + text_color +
                   "\" text-anchor=\"middle\">" + detail::svg_num(v) + "</text>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

} // namespace rashodet
