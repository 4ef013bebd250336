#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wptsim/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int load_and_validate(const std::string& config, wpt::ValidationResult& result) {
    std::string source;
    try {
        source = wpt::read_config_source(config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    result = wpt::validate_config(source);
    if (!result.ok()) {
        for (const std::string& error : result.errors)
            std::cerr << "error: " << error << "\n";
        return kExitValidation;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wpt: closed-loop WPT/SWIPT link simulator"};
    app.require_subcommand(1);

    std::string config;
    std::optional<std::string> out_dir;
    std::string sweep_var;
    std::vector<double> sweep_values;

    CLI::App* validate =
        app.add_subcommand("validate", "check a scenario config and print the "
                                       "resolved form");
    validate->add_option("config", config, "config file or built-in name")
        ->required();

    CLI::App* run = app.add_subcommand(
        "run", "run a scenario and write result CSV, resolved config, manifest");
    run->add_option("config", config, "config file or built-in name")
        ->required();
    run->add_option("--out-dir", out_dir,
                    "output directory (overrides config and WPTSIM_OUT_DIR)");

    CLI::App* sweep = app.add_subcommand(
        "sweep", "sweep one variable and write a long-form CSV");
    sweep->add_option("config", config, "config file or built-in name")
        ->required();
    sweep->add_option("--var", sweep_var,
                      "variable: M | N | bits | rho | tau | beta | distance");
    sweep->add_option("--values", sweep_values, "sweep values")
        ->delimiter(',');
    sweep->add_option("--out-dir", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    wpt::ValidationResult result;
    if (int code = load_and_validate(config, result); code != kExitOk)
        return code;
    const wpt::Scenario& scenario = *result.scenario;

    try {
        if (validate->parsed()) {
            std::cout << scenario.resolved_json() << "\n";
            return kExitOk;
        }
        if (run->parsed()) {
            const wpt::RunResult files = wpt::run_scenario(scenario, out_dir);
            std::cout << "wrote " << files.csv_path.string() << "\n"
                      << "wrote " << files.resolved_path.string() << "\n"
                      << "wrote " << files.manifest_path.string() << "\n";
            return kExitOk;
        }
        // sweep
        std::string var = sweep_var;
        std::vector<double> values = sweep_values;
        if (var.empty() && scenario.sweep) var = scenario.sweep->variable;
        if (values.empty() && scenario.sweep) values = scenario.sweep->values;
        if (var.empty() || values.empty()) {
            std::cerr << "error: sweep needs --var and --values (or a sweep "
                         "block in the config)\n";
            return kExitValidation;
        }
        const wpt::RunResult files =
            wpt::sweep_scenario(scenario, var, values, out_dir);
        std::cout << "wrote " << files.csv_path.string() << "\n"
                  << "wrote " << files.resolved_path.string() << "\n"
                  << "wrote " << files.manifest_path.string() << "\n";
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
