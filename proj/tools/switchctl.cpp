// Command line front end: `switchctl solve` runs one homotopy and writes
// controls.csv / summary.json (/ controls.svg); `switchctl sweep` produces a
// parameter table.

#include "switching/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kExitConfigError = 1;
constexpr int kExitSolverFailure = 2;

struct CommonFlags {
    std::string config_path;
    std::optional<int> components;
    std::optional<std::string> alpha;
    std::optional<std::string> gamma_min;
    std::optional<std::string> horizon;
    std::optional<int> time_intervals;
    std::optional<std::string> mesh_edge;
    std::optional<std::string> out;
    bool emit_svg = false;

    void attach(CLI::App& app) {
        app.add_option("--config", config_path, "Configuration file (key = value)");
        app.add_option("--N", components, "Number of control components");
        app.add_option("--alpha", alpha, "Switching penalty weight");
        app.add_option("--gamma-min", gamma_min, "Smallest regularization parameter");
        app.add_option("--T", horizon, "Time horizon");
        app.add_option("--time-intervals", time_intervals, "Number of time intervals");
        app.add_option("--mesh-edge", mesh_edge, "Mesh cell size");
        app.add_option("--out", out, "Output directory");
        app.add_flag("--emit-svg", emit_svg, "Also write controls.svg");
    }

    switching::RunConfig load() const {
        switching::ConfigOverrides overrides;
        if (components)
            overrides["N"] = std::to_string(*components);
        if (alpha)
            overrides["alpha"] = *alpha;
        if (gamma_min)
            overrides["gamma_min"] = *gamma_min;
        if (horizon)
            overrides["T"] = *horizon;
        if (time_intervals)
            overrides["time_intervals"] = std::to_string(*time_intervals);
        if (mesh_edge)
            overrides["mesh_edge"] = *mesh_edge;
        if (out)
            overrides["output_dir"] = *out;
        if (emit_svg)
            overrides["emit_svg"] = "true";
        if (config_path.empty())
            return switching::parse_config("", overrides);
        return switching::parse_config_file(config_path, overrides);
    }
};

std::vector<double> parse_values(const std::string& list) {
    std::vector<double> values;
    std::stringstream in(list);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty())
            continue;
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw switching::ConfigError("sweep: cannot parse value '" + item + "'");
        }
    }
    return values;
}

int run_solve(const CommonFlags& flags) {
    const auto config = flags.load();
    const auto output = switching::run_experiment(config);
    const auto& diag = output.report.diagnostics;
    std::cout << "gamma_bar = " << output.report.last_gamma << "\n";
    for (std::size_t j = 0; j < diag.tau.size(); ++j)
        std::cout << "tau_" << (j + 1) << " = " << diag.tau[j] << "\n";
    std::cout << "switch_points = " << diag.switch_points << "\n";
    std::cout << "wrote " << output.controls_csv.string() << ", " << output.summary.string() << "\n";
    return 0;
}

int run_sweep(const CommonFlags& flags, const std::string& parameter_name, const std::string& value_list) {
    const auto config = flags.load();
    const auto parameter = switching::parse_sweep_parameter(parameter_name);
    const auto values = parse_values(value_list);
    const auto rows = switching::run_table_sweep(config, parameter, values);

    std::filesystem::create_directories(config.output_dir);
    const auto path = config.output_dir / ("sweep_" + parameter_name + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    switching::write_sweep_csv(out, parameter, rows);
    switching::write_sweep_csv(std::cout, parameter, rows);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Switching control of the 2D heat equation by semismooth Newton continuation"};
    app.require_subcommand(1);

    CommonFlags solve_flags;
    auto* solve = app.add_subcommand("solve", "Solve one configuration");
    solve_flags.attach(*solve);

    CommonFlags sweep_flags;
    std::string parameter;
    std::string values;
    auto* sweep = app.add_subcommand("sweep", "Tabulate diagnostics over alpha or gamma");
    sweep_flags.attach(*sweep);
    sweep->add_option("--param", parameter, "alpha or gamma")->required();
    sweep->add_option("--values", values, "Comma separated values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfigError;
    }

    try {
        if (solve->parsed())
            return run_solve(solve_flags);
        return run_sweep(sweep_flags, parameter, values);
    } catch (const switching::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfigError;
    } catch (const switching::FirstStageFailed& e) {
        std::cerr << e.what() << "\n";
        return kExitSolverFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
}
