#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rashodet/csv.hpp"
#include "rashodet/demo.hpp"
#include "rashodet/detect.hpp"
#include "rashodet/exchange.hpp"
#include "rashodet/learners.hpp"
#include "rashodet/scenarios.hpp"
#include "rashodet/store.hpp"
#include "rashodet/svg.hpp"

namespace rashodet {

namespace detail {

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::io_error, "cannot open '" + path.string() + "' for writing");
    }
    out << content;
    if (!out) throw Error(ErrorCode::io_error, "failed writing '" + path.string() + "'");
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline std::string sanitize_filename(const std::string& name) {
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_';
        out += ok ? c : '_';
    }
    return out.empty() ? std::string("_") : out;
}

// "demo" is a reserved data path naming the built-in synthetic cohort.
inline Dataset load_dataset(const std::string& data_path, const std::string& target,
                            const std::string& positive_label) {
    if (data_path == "demo") {
        if (!target.empty() && target != "outcome") {
            throw Error(ErrorCode::missing_target,
                        "the built-in demo dataset has target column 'outcome'");
        }
        if (!positive_label.empty() && positive_label != "favorable") {
            throw Error(ErrorCode::bad_argument,
                        "the built-in demo dataset maps 'favorable' to class 1");
        }
        return make_demo_dataset();
    }
    CsvOptions options;
    options.target_column = target;
    options.positive_label = positive_label;
    return load_csv_file(data_path, options);
}

inline nlohmann::json zero_filled_json(
    const std::vector<std::pair<std::string, std::string>>& zero_filled) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& [model_id, variable] : zero_filled) {
        list.push_back({{"model_id", model_id}, {"variable", variable}});
    }
    return list;
}

} // namespace detail

struct TrainOptions {
    std::string data_path = "demo";
    std::string target = "outcome";
    std::string positive_label;
    std::string out_dir = "train_run";
    std::uint64_t seed = 0;
    int n_folds = 5;
    unsigned threads = 0;
};

struct TrainOutcome {
    GridSearchResult search;
    std::vector<std::string> files;
};

inline TrainOutcome cmd_train(const TrainOptions& options) {
    if (options.n_folds < 2) {
        throw Error(ErrorCode::bad_argument, "cross-validation needs at least two folds");
    }
    const Dataset data =
        detail::load_dataset(options.data_path, options.target, options.positive_label);
    const GridSpec grid = default_grid(options.seed);
    GridSearchResult search = grid_search(grid, data, options.n_folds, options.threads);

    std::map<std::string, ModelFamily> cell_family;
    for (const GridCell& cell : grid.cells) cell_family[cell.id] = cell.family;

    const std::filesystem::path out(options.out_dir);
    std::filesystem::create_directories(out);

    save_models_file((out / "models.json").string(), search.records);

    std::string metrics = "id,family,cv_auc_mean";
    for (int f = 1; f <= options.n_folds; ++f) {
        metrics += ",cv_auc_fold_" + std::to_string(f);
    }
    metrics += ",test_auc,error\n";
    for (const ModelRecord& record : search.records) {
        metrics += record.model.id + ',' + std::string(family_name(record.model.family)) +
                   ',' + format_double(record.cv_auc_mean);
        for (double fold : record.cv_auc_per_fold) metrics += ',' + format_double(fold);
        metrics += ',';
        if (record.test_auc) metrics += format_double(*record.test_auc);
        metrics += ",\n";
    }
    for (const CellFailure& failure : search.failures) {
        metrics += failure.id + ',' + std::string(family_name(cell_family[failure.id]));
        for (int f = 0; f < options.n_folds + 2; ++f) metrics += ',';
        metrics += ',' + failure.error + '\n';
    }
    detail::write_text_file(out / "metrics.csv", metrics);

    nlohmann::json manifest{{"command", "train"},
                            {"data", options.data_path},
                            {"target", options.target},
                            {"positive_label", options.positive_label},
                            {"out", options.out_dir},
                            {"seed", options.seed},
                            {"folds", options.n_folds},
                            {"threads", options.threads}};
    detail::write_text_file(out / "run_config.json", manifest.dump(2) + "\n");

    return {std::move(search), {"models.json", "metrics.csv", "run_config.json"}};
}

struct DetectOptions {
    std::string data_path = "demo";
    std::string target = "outcome";
    std::string positive_label;
    std::string models_path;
    std::string profiles_path;
    std::string reference_id;
    double epsilon = 0.04;
    int k = 0;
    std::string measure = "pdi";
    std::string variant = "full";
    std::string metric = "cv_mean";
    int grid_size = 101;
    std::uint64_t seed = 0;
    std::string out_dir = "detect_run";
    unsigned threads = 0;
};

struct DetectOutcome {
    DetectResult result;
    std::vector<std::pair<std::string, std::string>> zero_filled;
    std::vector<std::string> warnings;
    std::vector<std::string> files;
};

inline DetectOutcome cmd_detect(const DetectOptions& options) {
    if (!options.models_path.empty() && !options.profiles_path.empty()) {
        throw Error(ErrorCode::bad_argument, "give either --models or --profiles, not both");
    }
    if (options.models_path.empty() && options.profiles_path.empty()) {
        throw Error(ErrorCode::bad_argument, "a model store or a profile file is required");
    }
    if (options.grid_size < 2) {
        throw Error(ErrorCode::bad_argument, "grid size must be at least 2");
    }
    if (options.variant != "full" && options.variant != "greedy") {
        throw Error(ErrorCode::bad_argument,
                    "unknown variant '" + options.variant + "' (use full or greedy)");
    }
    if (options.metric != "cv_mean" && options.metric != "test") {
        throw Error(ErrorCode::bad_argument,
                    "unknown metric '" + options.metric + "' (use cv_mean or test)");
    }

    RashomonConfig config;
    config.epsilon = options.epsilon;
    config.k = options.k;
    config.measure.kind = measure_kind_from_name(options.measure);
    config.measure.threads = options.threads;
    config.reference_id = options.reference_id;
    config.variant =
        options.variant == "greedy" ? DetectVariant::greedy : DetectVariant::full;
    const MetricSource source =
        options.metric == "test" ? MetricSource::test : MetricSource::cv_mean;

    DetectOutcome outcome;
    std::vector<ModelScore> scores;
    ProfileBundle bundle;
    if (!options.profiles_path.empty()) {
        ExchangeData exchange = read_exchange_file(options.profiles_path);
        scores = std::move(exchange.scores);
        bundle = std::move(exchange.bundle);
        outcome.zero_filled = std::move(exchange.zero_filled);
    } else {
        const std::vector<ModelRecord> records = load_models_file(options.models_path);
        const Dataset data = detail::load_dataset(options.data_path, options.target,
                                                  options.positive_label);
        scores = model_scores(records, source);
        const std::string reference = reference_model(scores, config);
        const std::vector<std::string> members =
            build_rashomon_set(scores, reference, config.epsilon);

        std::vector<PredictiveModel> models;
        for (const std::string& id : members) {
            for (const ModelRecord& record : records) {
                if (record.model.id == id) models.push_back(record.model);
            }
        }
        BundleOptions bundle_options;
        bundle_options.grid_size = static_cast<std::size_t>(options.grid_size);
        bundle_options.seed = options.seed;
        bundle_options.threads = options.threads;
        bundle = profile_bundle(models, data, bundle_options);
    }

    outcome.result = rashomon_detect(std::span<const ModelScore>(scores), bundle, config);
    const DetectResult& result = outcome.result;
    if (result.k_requested > static_cast<int>(result.rashomon_ids.size())) {
        outcome.warnings.push_back(
            "requested k=" + std::to_string(result.k_requested) +
            " exceeds the rashomon set size " + std::to_string(result.rashomon_ids.size()) +
            "; returning all members");
    }

    const std::filesystem::path out(options.out_dir);
    std::filesystem::create_directories(out);

    const ProfileBundle members_bundle = detail::restrict_bundle(bundle, result.rashomon_ids);
    std::map<std::string, double> metric_of;
    for (const ModelScore& score : scores) metric_of[score.id] = score.metric;
    std::vector<ModelScore> member_scores;
    for (const std::string& id : result.rashomon_ids) {
        member_scores.push_back({id, metric_of[id]});
    }

    const auto matrix_csv = [&](auto&& value_at) {
        std::string csv = "id";
        for (const std::string& id : result.matrix.ids) csv += ',' + id;
        csv += '\n';
        for (std::size_t i = 0; i < result.matrix.ids.size(); ++i) {
            csv += result.matrix.ids[i];
            for (std::size_t j = 0; j < result.matrix.ids.size(); ++j) {
                csv += ',' + format_double(value_at(i, j));
            }
            csv += '\n';
        }
        return csv;
    };
    detail::write_text_file(out / "matrix_average.csv",
                            matrix_csv([&](std::size_t i, std::size_t j) {
                                return result.matrix.at(i, j);
                            }));

    std::map<std::pair<std::size_t, std::size_t>, const DisparityRecord*> record_of;
    for (const DisparityRecord& record : result.records) {
        const auto a = static_cast<std::size_t>(result.matrix.index_of(record.model_a));
        const auto b = static_cast<std::size_t>(result.matrix.index_of(record.model_b));
        record_of[{std::min(a, b), std::max(a, b)}] = &record;
    }
    nlohmann::json matrix_files{{"average", "matrix_average.csv"},
                                {"per_variable", nlohmann::json::object()}};
    std::map<std::string, int> used_names;
    for (std::size_t v = 0; v < members_bundle.variables.size(); ++v) {
        const std::string& variable = members_bundle.variables[v].name;
        std::string base = detail::sanitize_filename(variable);
        const int repeat = used_names[base]++;
        if (repeat > 0) base += "_" + std::to_string(repeat + 1);
        const std::string filename = "matrix_" + base + ".csv";
        detail::write_text_file(
            out / filename, matrix_csv([&](std::size_t i, std::size_t j) {
                if (i == j) return 0.0;
                const auto key = std::make_pair(std::min(i, j), std::max(i, j));
                return record_of.at(key)->per_variable[v].second;
            }));
        matrix_files["per_variable"][variable] = filename;
    }

    std::string profiles = "model,variable,z,value,selected\n";
    for (const BundleVariable& var : members_bundle.variables) {
        for (std::size_t k = 0; k < members_bundle.model_ids.size(); ++k) {
            const std::string& id = members_bundle.model_ids[k];
            const bool selected = std::find(result.selected.begin(), result.selected.end(),
                                            id) != result.selected.end();
            const std::size_t count = var.kind == VarKind::numeric
                                          ? var.grid.points.size()
                                          : var.categories.size();
            for (std::size_t i = 0; i < count; ++i) {
                profiles += detail::csv_escape(id) + ',' + detail::csv_escape(var.name) + ',';
                profiles += var.kind == VarKind::numeric
                                ? format_double(var.grid.points[i])
                                : detail::csv_escape(var.categories[i]);
                profiles += ',' + format_double(var.values[k][i]) + ',' +
                            (selected ? '1' : '0') + '\n';
            }
        }
    }
    detail::write_text_file(out / "profiles.csv", profiles);

    struct PairRow {
        std::string a, b;
        double value;
    };
    std::vector<PairRow> pairs;
    for (std::size_t i = 0; i < result.selected.size(); ++i) {
        for (std::size_t j = i + 1; j < result.selected.size(); ++j) {
            std::string a = result.selected[i];
            std::string b = result.selected[j];
            if (b < a) std::swap(a, b);
            const double value =
                result.matrix.at(static_cast<std::size_t>(result.matrix.index_of(a)),
                                 static_cast<std::size_t>(result.matrix.index_of(b)));
            pairs.push_back({std::move(a), std::move(b), value});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const PairRow& x, const PairRow& y) {
        if (x.value != y.value) return x.value > y.value;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    std::string summary = "model_a,model_b,average\n";
    for (const PairRow& pair : pairs) {
        summary += detail::csv_escape(pair.a) + ',' + detail::csv_escape(pair.b) + ',' +
                   format_double(pair.value) + '\n';
    }
    detail::write_text_file(out / "summary.csv", summary);

    write_exchange_file((out / "profiles_exchange.json").string(), members_bundle,
                        member_scores);

    nlohmann::json result_json{
        {"reference_id", result.reference_id},
        {"epsilon", config.epsilon},
        {"k_requested", result.k_requested},
        {"k_effective", result.k_effective},
        {"measure",
         {{"kind", std::string(measure_kind_name(config.measure.kind))},
          {"window", config.measure.window},
          {"degree", config.measure.degree},
          {"tau", config.measure.tau ? nlohmann::json(*config.measure.tau)
                                     : nlohmann::json(nullptr)}}},
        {"variant", std::string(detect_variant_name(config.variant))},
        {"metric_source", std::string(metric_source_name(source))},
        {"selected", result.selected},
        {"selection_scores", result.selection_scores},
        {"matrix_files", matrix_files},
        {"zero_filled", detail::zero_filled_json(outcome.zero_filled)},
        {"warnings", outcome.warnings}};
    nlohmann::json members_json = nlohmann::json::array();
    for (const ModelScore& score : member_scores) {
        members_json.push_back({{"id", score.id}, {"metric", score.metric}});
    }
    result_json["rashomon"] = members_json;
    detail::write_text_file(out / "result.json", result_json.dump(2) + "\n");

    nlohmann::json manifest{{"command", "detect"},
                            {"data", options.data_path},
                            {"target", options.target},
                            {"positive_label", options.positive_label},
                            {"models", options.models_path},
                            {"profiles", options.profiles_path},
                            {"reference", options.reference_id},
                            {"epsilon", options.epsilon},
                            {"k", options.k},
                            {"measure", options.measure},
                            {"variant", options.variant},
                            {"metric", options.metric},
                            {"grid_size", options.grid_size},
                            {"seed", options.seed},
                            {"out", options.out_dir},
                            {"threads", options.threads}};
    if (!outcome.zero_filled.empty()) {
        manifest["zero_filled"] = detail::zero_filled_json(outcome.zero_filled);
    }
    detail::write_text_file(out / "run_config.json", manifest.dump(2) + "\n");

    outcome.files = {"result.json",  "matrix_average.csv",     "profiles.csv",
                     "summary.csv",  "profiles_exchange.json", "run_config.json"};
    for (const auto& [variable, filename] : matrix_files["per_variable"].items()) {
        outcome.files.push_back(filename.get<std::string>());
    }
    return outcome;
}

struct ScenarioOptions {
    int n_pairs = 100;
    double sigma = 0.01;
    int grid_size = 101;
    std::uint64_t seed = 0;
    std::string out_dir = "scenario_run";
    unsigned threads = 0;
};

struct ScenarioOutcome {
    std::vector<ScenarioResult> results;
    std::vector<std::string> files;
};

inline ScenarioOutcome cmd_scenarios(const ScenarioOptions& options) {
    std::vector<ScenarioSpec> specs;
    for (int id = 1; id <= 8; ++id) {
        ScenarioSpec spec;
        spec.id = id;
        spec.n_pairs = options.n_pairs;
        spec.sigma = options.sigma;
        spec.seed = options.seed;
        spec.m = options.grid_size;
        specs.push_back(spec);
    }
    std::vector<MeasureSpec> measures(3);
    measures[0].kind = MeasureKind::pdi;
    measures[1].kind = MeasureKind::l2_profiles;
    measures[2].kind = MeasureKind::l2_derivatives;

    ScenarioOutcome outcome;
    outcome.results = evaluate_scenarios(specs, measures, options.threads);

    const std::filesystem::path out(options.out_dir);
    std::filesystem::create_directories(out);

    std::string values = "scenario,pair,measure,value\n";
    for (const ScenarioResult& result : outcome.results) {
        for (int pair = 0; pair < options.n_pairs; ++pair) {
            for (const MeasureSummary& summary : result.measures) {
                values += std::to_string(result.id) + ',' + std::to_string(pair) + ',' +
                          std::string(measure_kind_name(summary.kind)) + ',' +
                          format_double(summary.values[static_cast<std::size_t>(pair)]) +
                          '\n';
            }
        }
    }
    detail::write_text_file(out / "scenario_values.csv", values);

    nlohmann::json scenarios_json = nlohmann::json::array();
    for (const ScenarioResult& result : outcome.results) {
        nlohmann::json measures_json;
        for (const MeasureSummary& summary : result.measures) {
            measures_json[std::string(measure_kind_name(summary.kind))] = {
                {"median", summary.median}, {"q1", summary.q1}, {"q3", summary.q3}};
        }
        scenarios_json.push_back({{"id", result.id},
                                  {"label", std::string(scenario_label(result.id))},
                                  {"measures", measures_json}});
    }
    nlohmann::json summary_json{{"n_pairs", options.n_pairs},
                                {"sigma", options.sigma},
                                {"grid_size", options.grid_size},
                                {"seed", options.seed},
                                {"scenarios", scenarios_json}};
    detail::write_text_file(out / "scenario_summary.json", summary_json.dump(2) + "\n");

    nlohmann::json manifest{{"command", "scenarios"}, {"pairs", options.n_pairs},
                            {"sigma", options.sigma}, {"grid_size", options.grid_size},
                            {"seed", options.seed},   {"out", options.out_dir},
                            {"threads", options.threads}};
    detail::write_text_file(out / "run_config.json", manifest.dump(2) + "\n");

    outcome.files = {"scenario_values.csv", "scenario_summary.json", "run_config.json"};
    return outcome;
}

struct ExportPlotsOptions {
    std::string run_dir;
    std::string out_dir; // empty: <run_dir>/plots
};

struct ExportPlotsOutcome {
    std::vector<std::string> files;
};

inline ExportPlotsOutcome cmd_export_plots(const ExportPlotsOptions& options) {
    const std::filesystem::path run(options.run_dir);
    if (options.run_dir.empty() || !std::filesystem::is_directory(run)) {
        throw Error(ErrorCode::missing_run_directory,
                    "'" + options.run_dir + "' is not a detect output directory");
    }
    if (!std::filesystem::exists(run / "result.json")) {
        throw Error(ErrorCode::missing_run_directory,
                    "'" + options.run_dir + "' has no result.json");
    }

    nlohmann::json result;
    try {
        result = nlohmann::json::parse(detail::read_text_file(run / "result.json"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::corrupt_payload,
                    std::string("result.json is not readable: ") + e.what());
    }

    const ExchangeData exchange =
        read_exchange_file((run / "profiles_exchange.json").string());
    const ProfileBundle& bundle = exchange.bundle;

    std::vector<std::string> selected;
    std::vector<std::string> member_ids;
    std::map<std::string, std::string> matrix_files;
    try {
        selected = result.at("selected").get<std::vector<std::string>>();
        for (const auto& member : result.at("rashomon")) {
            member_ids.push_back(member.at("id").get<std::string>());
        }
        for (const auto& [variable, filename] :
             result.at("matrix_files").at("per_variable").items()) {
            matrix_files[variable] = filename.get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::corrupt_payload,
                    std::string("result.json is missing fields: ") + e.what());
    }

    // Per-variable matrices feed the heatmaps: id header row, one row per id.
    std::map<std::string, std::map<std::pair<std::string, std::string>, double>> cells;
    for (const auto& [variable, filename] : matrix_files) {
        std::ifstream in(run / filename, std::ios::binary);
        if (!in) {
            throw Error(ErrorCode::io_error, "cannot open '" + filename + "'");
        }
        std::vector<std::string> header;
        if (!detail::read_csv_record(in, header) || header.size() < 2) {
            throw Error(ErrorCode::corrupt_payload, "'" + filename + "' has no id header");
        }
        std::vector<std::string> row;
        while (detail::read_csv_record(in, row)) {
            if (row.size() != header.size()) {
                throw Error(ErrorCode::corrupt_payload,
                            "'" + filename + "' has a short row");
            }
            for (std::size_t j = 1; j < row.size(); ++j) {
                const auto value = parse_double(row[j]);
                if (!value) {
                    throw Error(ErrorCode::corrupt_payload,
                                "'" + filename + "' holds a non-numeric cell");
                }
                cells[variable][{row[0], header[j]}] = *value;
            }
        }
    }

    const std::filesystem::path out =
        options.out_dir.empty() ? run / "plots" : std::filesystem::path(options.out_dir);
    std::filesystem::create_directories(out);

    ExportPlotsOutcome outcome;
    std::map<std::string, int> used_names;
    for (const BundleVariable& var : bundle.variables) {
        if (var.kind != VarKind::numeric) continue;
        std::string base = detail::sanitize_filename(var.name);
        const int repeat = used_names[base]++;
        if (repeat > 0) base += "_" + std::to_string(repeat + 1);
        const std::string filename = "profile_" + base + ".svg";
        detail::write_text_file(out / filename,
                                profile_svg(var, bundle.model_ids, selected));
        outcome.files.push_back(filename);
    }

    std::vector<std::string> column_names;
    for (const BundleVariable& var : bundle.variables) column_names.push_back(var.name);
    for (const std::string& id : selected) {
        std::vector<std::string> row_ids;
        for (const std::string& other : member_ids) {
            if (other != id) row_ids.push_back(other);
        }
        if (row_ids.empty()) continue;
        std::vector<std::vector<double>> values;
        for (const std::string& other : row_ids) {
            std::vector<double> row;
            for (const std::string& variable : column_names) {
                row.push_back(cells.at(variable).at({id, other}));
            }
            values.push_back(std::move(row));
        }
        const std::string filename =
            "heatmap_" + detail::sanitize_filename(id) + ".svg";
        detail::write_text_file(out / filename,
                                heatmap_svg("disparity of " + id, row_ids, column_names,
                                            values));
        outcome.files.push_back(filename);
    }

    nlohmann::json manifest{{"command", "export-plots"},
                            {"run", options.run_dir},
                            {"out", out.string()}};
    detail::write_text_file(out / "run_config.json", manifest.dump(2) + "\n");
    outcome.files.push_back("run_config.json");
    return outcome;
}

} // namespace rashodet
