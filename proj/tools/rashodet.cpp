#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rashodet/commands.hpp"

namespace {

void print_error(const std::string& name, const std::string& message) {
    const nlohmann::json payload{{"error", name}, {"message", message}};
    std::cerr << payload.dump() << '\n';
}

// --config names a JSON file whose keys mirror the long flags; flags given
// on the command line keep priority over values read from the file.
void apply_config_file(CLI::App& command, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw rashodet::Error(rashodet::ErrorCode::io_error,
                              "cannot open config file '" + path + "'");
    }
    nlohmann::json config;
    try {
        config = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw rashodet::Error(rashodet::ErrorCode::bad_argument,
                              "config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!config.is_object()) {
        throw rashodet::Error(rashodet::ErrorCode::bad_argument,
                              "config file '" + path + "' must hold a JSON object");
    }
    for (const auto& [key, value] : config.items()) {
        if (key == "config") continue;
        CLI::Option* option = command.get_option_no_throw("--" + key);
        if (option == nullptr) {
            throw rashodet::Error(rashodet::ErrorCode::bad_argument, "config key '" + key +
                                      "' matches no option of this command");
        }
        if (option->count() > 0) continue;
        option->add_result(value.is_string() ? value.get<std::string>() : value.dump());
        try {
            option->run_callback();
        } catch (const CLI::ParseError& e) {
            throw rashodet::Error(rashodet::ErrorCode::bad_argument,
                                  "config key '" + key + "': " + e.what());
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rashomon set disparity detection over model profiles"};
    app.require_subcommand(1);

    rashodet::TrainOptions train;
    CLI::App* cmd_train = app.add_subcommand(
        "train", "fit the hyperparameter grid and store the scored models");
    cmd_train->add_option("--data", train.data_path,
                          "CSV dataset path, or 'demo' for the built-in cohort");
    cmd_train->add_option("--target", train.target, "target column name");
    cmd_train->add_option("--positive-label", train.positive_label,
                          "label mapped to class 1");
    cmd_train->add_option("--out", train.out_dir, "output directory");
    cmd_train->add_option("--seed", train.seed, "random seed");
    cmd_train->add_option("--folds", train.n_folds, "cross-validation folds");
    cmd_train->add_option("--threads", train.threads, "worker threads, 0 = hardware");
    std::string train_config;
    cmd_train->add_option("--config", train_config, "JSON file with option defaults");

    rashodet::DetectOptions detect;
    CLI::App* cmd_detect = app.add_subcommand(
        "detect", "pick the most functionally distinct models of a Rashomon set");
    cmd_detect->add_option("--data", detect.data_path,
                           "CSV dataset path, or 'demo' for the built-in cohort");
    cmd_detect->add_option("--target", detect.target, "target column name");
    cmd_detect->add_option("--positive-label", detect.positive_label,
                           "label mapped to class 1");
    cmd_detect->add_option("--models", detect.models_path, "model store from train");
    cmd_detect->add_option("--profiles", detect.profiles_path,
                           "profile exchange file (skips model evaluation)");
    cmd_detect->add_option("--reference", detect.reference_id,
                           "explicit reference model id");
    cmd_detect->add_option("--epsilon", detect.epsilon, "Rashomon set tolerance");
    cmd_detect->add_option("--k", detect.k, "models to select, 0 = sqrt rule");
    cmd_detect->add_option("--measure", detect.measure, "pdi, l2, or l2der");
    cmd_detect->add_option("--variant", detect.variant, "full or greedy");
    cmd_detect->add_option("--metric", detect.metric, "cv_mean or test");
    cmd_detect->add_option("--grid-size", detect.grid_size, "profile grid points");
    cmd_detect->add_option("--seed", detect.seed, "random seed");
    cmd_detect->add_option("--out", detect.out_dir, "output directory");
    cmd_detect->add_option("--threads", detect.threads, "worker threads, 0 = hardware");
    std::string detect_config;
    cmd_detect->add_option("--config", detect_config, "JSON file with option defaults");

    rashodet::ScenarioOptions scenarios;
    CLI::App* cmd_scenarios = app.add_subcommand(
        "scenarios", "run the synthetic curve-pair benchmark for all measures");
    cmd_scenarios->add_option("--pairs", scenarios.n_pairs, "curve pairs per scenario");
    cmd_scenarios->add_option("--sigma", scenarios.sigma, "noise level");
    cmd_scenarios->add_option("--grid-size", scenarios.grid_size, "grid points per curve");
    cmd_scenarios->add_option("--seed", scenarios.seed, "random seed");
    cmd_scenarios->add_option("--out", scenarios.out_dir, "output directory");
    cmd_scenarios->add_option("--threads", scenarios.threads,
                              "worker threads, 0 = hardware");
    std::string scenarios_config;
    cmd_scenarios->add_option("--config", scenarios_config, "JSON file with option defaults");

    rashodet::ExportPlotsOptions plots;
    CLI::App* cmd_plots = app.add_subcommand(
        "export-plots", "render SVG profile plots and heatmaps for a detect run");
    cmd_plots->add_option("--run", plots.run_dir, "detect output directory");
    cmd_plots->add_option("--out", plots.out_dir, "plot directory, default <run>/plots");
    std::string plots_config;
    cmd_plots->add_option("--config", plots_config, "JSON file with option defaults");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        print_error("BadArgument", e.what());
        return 2;
    }

    try {
        CLI::App* active = app.get_subcommands().front();
        if (active == cmd_train) {
            if (!train_config.empty()) apply_config_file(*cmd_train, train_config);
            const rashodet::TrainOutcome outcome = rashodet::cmd_train(train);
            std::cout << "trained " << outcome.search.records.size() << " models ("
                      << outcome.search.failures.size() << " failures) into "
                      << train.out_dir << '\n';
        } else if (active == cmd_detect) {
            if (!detect_config.empty()) apply_config_file(*cmd_detect, detect_config);
            const rashodet::DetectOutcome outcome = rashodet::cmd_detect(detect);
            for (const std::string& warning : outcome.warnings) {
                std::cerr << "warning: " << warning << '\n';
            }
            std::cout << "rashomon set of " << outcome.result.rashomon_ids.size()
                      << " around " << outcome.result.reference_id << "; selected";
            for (const std::string& id : outcome.result.selected) std::cout << ' ' << id;
            std::cout << "; outputs in " << detect.out_dir << '\n';
        } else if (active == cmd_scenarios) {
            if (!scenarios_config.empty()) {
                apply_config_file(*cmd_scenarios, scenarios_config);
            }
            const rashodet::ScenarioOutcome outcome = rashodet::cmd_scenarios(scenarios);
            std::cout << "evaluated " << outcome.results.size() << " scenarios into "
                      << scenarios.out_dir << '\n';
        } else {
            if (!plots_config.empty()) apply_config_file(*cmd_plots, plots_config);
            const rashodet::ExportPlotsOutcome outcome = rashodet::cmd_export_plots(plots);
            std::cout << "wrote " << outcome.files.size() << " plot files\n";
        }
    } catch (const rashodet::Error& e) {
        print_error(std::string(e.name()), e.message());
        return 2;
    } catch (const std::exception& e) {
        print_error("Internal", e.what());
        return 1;
    }
    return 0;
}
