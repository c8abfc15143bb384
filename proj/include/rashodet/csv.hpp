#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rashodet/dataset.hpp"
#include "rashodet/errors.hpp"
#include "rashodet/numfmt.hpp"

namespace rashodet {

namespace detail {

// One logical CSV record, honoring quoted fields that may contain commas,
// doubled quotes, and embedded newlines. Returns false at end of input.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool quoted = false;
    bool any = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        any = true;
        char c = static_cast<char>(ch);
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            break;
        } else if (c == '\r') {
            if (in.peek() == '\n') in.get();
            break;
        } else {
            field.push_back(c);
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

inline bool is_missing_token(const std::string& s) {
    return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "NULL" ||
           s == "null";
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace detail

struct CsvOptions {
    std::string target_column;
    // Raw label mapped to class 1; when empty the lexicographically larger
    // of the two observed labels becomes class 1.
    std::string positive_label;
    // Optional per-column kind overrides: {"column": "numeric"|"categorical"}.
    nlohmann::json schema = nlohmann::json::object();
    std::string dataset_name;
};

// Load a CSV with a header row into a Dataset. Column kinds are inferred
// (numeric when every non-target cell parses as a double, categorical
// otherwise) unless pinned by options.schema.
inline Dataset load_csv(std::istream& in, const CsvOptions& options) {
    std::vector<std::string> header;
    if (!detail::read_csv_record(in, header) || header.empty()) {
        throw Error(ErrorCode::io_error, "empty input, expected a header row");
    }

    int target_col = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == options.target_column) target_col = static_cast<int>(j);
    }
    if (target_col < 0) {
        throw Error(ErrorCode::missing_target,
                    "target column '" + options.target_column + "' not found in header");
    }
    {
        std::set<std::string> seen(header.begin(), header.end());
        if (seen.size() != header.size()) {
            throw Error(ErrorCode::io_error, "duplicate column names in header");
        }
    }

    std::vector<std::vector<std::string>> cells(header.size());
    std::vector<std::string> record;
    std::size_t row = 0;
    while (detail::read_csv_record(in, record)) {
        if (record.size() == 1 && record[0].empty()) continue; // trailing blank line
        ++row;
        if (record.size() != header.size()) {
            throw Error(ErrorCode::ragged_row,
                        "row " + std::to_string(row) + " has " + std::to_string(record.size()) +
                            " fields, expected " + std::to_string(header.size()));
        }
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (detail::is_missing_token(record[j])) {
                throw Error(ErrorCode::missing_value, "missing value at row " +
                                                          std::to_string(row) + ", column '" +
                                                          header[j] + "'");
            }
            cells[j].push_back(record[j]);
        }
    }
    const std::size_t n = cells[static_cast<std::size_t>(target_col)].size();
    if (n == 0) throw Error(ErrorCode::io_error, "no data rows");

    // Target labels: exactly two distinct raw values.
    const auto& raw_target = cells[static_cast<std::size_t>(target_col)];
    std::vector<std::string> labels;
    for (const auto& s : raw_target) {
        if (std::find(labels.begin(), labels.end(), s) == labels.end()) labels.push_back(s);
    }
    if (labels.size() != 2) {
        throw Error(ErrorCode::non_binary_target, "target has " + std::to_string(labels.size()) +
                                                      " distinct values, expected 2");
    }
    std::sort(labels.begin(), labels.end());
    std::string positive = labels[1];
    if (!options.positive_label.empty()) {
        if (options.positive_label != labels[0] && options.positive_label != labels[1]) {
            throw Error(ErrorCode::bad_argument,
                        "positive label '" + options.positive_label + "' never occurs in target");
        }
        positive = options.positive_label;
    }
    std::string negative = positive == labels[0] ? labels[1] : labels[0];

    Dataset data;
    data.name = options.dataset_name;
    data.target_name = options.target_column;
    data.target_labels = {negative, positive};
    data.target.reserve(n);
    for (const auto& s : raw_target) data.target.push_back(s == positive ? 1 : 0);

    for (std::size_t j = 0; j < header.size(); ++j) {
        if (static_cast<int>(j) == target_col) continue;
        VariableMeta meta;
        meta.name = header[j];

        std::vector<double> parsed(n);
        bool all_numeric = true;
        for (std::size_t i = 0; i < n; ++i) {
            auto v = parse_double(cells[j][i]);
            if (!v) {
                all_numeric = false;
                break;
            }
            parsed[i] = *v;
        }
        meta.kind = all_numeric ? VarKind::numeric : VarKind::categorical;
        if (options.schema.contains(meta.name)) {
            const std::string want = options.schema.at(meta.name).get<std::string>();
            if (want == "numeric") {
                if (!all_numeric) {
                    throw Error(ErrorCode::bad_argument,
                                "column '" + meta.name +
                                    "' declared numeric but has unparseable cells");
                }
                meta.kind = VarKind::numeric;
            } else if (want == "categorical") {
                meta.kind = VarKind::categorical;
            } else {
                throw Error(ErrorCode::bad_argument,
                            "schema kind for '" + meta.name + "' must be numeric or categorical");
            }
        }

        std::vector<double> column(n);
        if (meta.kind == VarKind::numeric) {
            column = parsed;
        } else {
            std::vector<std::string> cats;
            for (const auto& s : cells[j]) {
                if (std::find(cats.begin(), cats.end(), s) == cats.end()) cats.push_back(s);
            }
            std::sort(cats.begin(), cats.end());
            meta.categories = cats;
            for (std::size_t i = 0; i < n; ++i) {
                auto it = std::lower_bound(cats.begin(), cats.end(), cells[j][i]);
                column[i] = static_cast<double>(it - cats.begin());
            }
        }
        data.variables.push_back(std::move(meta));
        data.columns.push_back(std::move(column));
    }

    refresh_observed_domains(data);
    return data;
}

inline Dataset load_csv_file(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
    CsvOptions opts = options;
    if (opts.dataset_name.empty()) opts.dataset_name = path;
    return load_csv(in, opts);
}

// Write the dataset back out; numeric cells use shortest round-trip
// formatting so a load/write/load cycle reproduces values exactly.
inline void write_csv(std::ostream& out, const Dataset& data) {
    for (std::size_t j = 0; j < data.p(); ++j) {
        out << detail::csv_escape(data.variables[j].name) << ',';
    }
    out << detail::csv_escape(data.target_name) << '\n';
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t j = 0; j < data.p(); ++j) {
            const auto& meta = data.variables[j];
            if (meta.kind == VarKind::numeric) {
                out << format_double(data.columns[j][i]);
            } else {
                out << detail::csv_escape(
                    meta.categories[static_cast<std::size_t>(data.columns[j][i])]);
            }
            out << ',';
        }
        out << detail::csv_escape(data.target_labels[static_cast<std::size_t>(data.target[i])])
            << '\n';
    }
}

inline void write_csv_file(const std::string& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    write_csv(out, data);
}

} // namespace rashodet
