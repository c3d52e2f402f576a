#include "switching/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace switching {

OptimalControlProblem ExperimentSetup::problem(double alpha, double gamma) const {
    return OptimalControlProblem{heat, target, PenaltyParams{alpha, gamma}};
}

ExperimentSetup build_setup(const RunConfig& config) {
    config.validate();
    ExperimentSetup setup;
    auto mesh = std::make_shared<SpatialMesh>(build_mesh(config.mesh_edge));
    auto geometry = std::make_shared<ControlGeometry>(assemble_control_geometry(*mesh, config.components));
    const TimeGrid grid{config.horizon, config.time_intervals};
    setup.target = std::make_shared<StateTrajectory>(target_yd(grid, *mesh, *geometry));
    setup.heat = std::make_shared<HeatSolver>(mesh, geometry, grid);
    setup.mesh = std::move(mesh);
    setup.geometry = std::move(geometry);
    return setup;
}

SolveReport solve_configured(const RunConfig& config, const ExperimentSetup& setup) {
    return run_homotopy(setup.problem(config.alpha, config.homotopy.gamma_start), config.homotopy, config.solver);
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

std::string format_double(double value) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << value;
    return os.str();
}

// Shortest representation that reads back to the same value.
std::string format_short(double value) {
    std::array<char, 32> buffer{};
    const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    return std::string(buffer.data(), result.ptr);
}

} // namespace

void write_controls_csv(std::ostream& out, const ControlTrajectory& u, const TimeGrid& grid) {
    out << "t";
    for (Eigen::Index j = 0; j < u.cols(); ++j)
        out << ",u" << (j + 1);
    out << '\n';
    for (Eigen::Index m = 0; m < u.rows(); ++m) {
        out << format_double(grid.midpoint(static_cast<int>(m)));
        for (Eigen::Index j = 0; j < u.cols(); ++j)
            out << ',' << format_double(u(m, j));
        out << '\n';
    }
}

ControlTrajectory read_controls_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("controls csv: missing header");
    const auto columns = std::count(line.begin(), line.end(), ',');

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::stringstream fields(line);
        std::string field;
        std::vector<double> row;
        std::getline(fields, field, ',');  // time
        while (std::getline(fields, field, ','))
            row.push_back(std::stod(field));
        if (static_cast<long>(row.size()) != columns)
            throw std::runtime_error("controls csv: ragged row");
        rows.push_back(std::move(row));
    }
    ControlTrajectory u(static_cast<Eigen::Index>(rows.size()), columns);
    for (std::size_t m = 0; m < rows.size(); ++m)
        for (Eigen::Index j = 0; j < columns; ++j)
            u(static_cast<Eigen::Index>(m), j) = rows[m][j];
    return u;
}

std::string summary_json(const RunConfig& config, const SolveReport& report) {
    using nlohmann::json;
    json stages = json::array();
    for (const auto& stage : report.stages) {
        json residuals = json::array();
        json changes = json::array();
        json steps = json::array();
        json cg = json::array();
        for (const auto& record : stage.history) {
            residuals.push_back(record.residual_norm);
            if (record.iteration > 0) {
                changes.push_back(record.active_changes);
                steps.push_back(record.step);
                cg.push_back(record.cg_iterations);
            }
        }
        json entry = {
            {"gamma", stage.gamma},
            {"status", to_string(stage.status)},
            {"ssn", stage.newton_iterations},
            {"cg_last", stage.last_cg_iterations},
            {"residuals", residuals},
            {"active_changes", changes},
            {"steps", steps},
            {"cg", cg},
        };
        if (stage.status == StageStatus::Converged) {
            entry["tau"] = stage.diagnostics.tau;
            entry["switch_points"] = stage.diagnostics.switch_points;
        }
        stages.push_back(std::move(entry));
    }

    json never_active = json::array();
    for (int j : report.diagnostics.never_active)
        never_active.push_back(j + 1);

    const auto& last = report.last_successful_stage();
    const json summary = {
        {"N", config.components},
        {"alpha", config.alpha},
        {"T", config.horizon},
        {"time_intervals", config.time_intervals},
        {"mesh_edge", config.mesh_edge},
        {"gamma_bar", report.last_gamma},
        {"tau", report.diagnostics.tau},
        {"switch_points", report.diagnostics.switch_points},
        {"never_active", never_active},
        {"ssn", last.newton_iterations},
        {"cg", last.last_cg_iterations},
        {"total_ssn", report.total_newton_iterations()},
        {"stages", stages},
    };
    return summary.dump(2) + "\n";
}

void write_controls_svg(std::ostream& out, const ControlTrajectory& u, const TimeGrid& grid) {
    static constexpr std::array<const char*, 8> palette = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                                           "#66a61e", "#e6ab02", "#a6761d", "#666666"};
    constexpr double width = 800.0, height = 320.0, margin = 40.0;

    std::vector<double> envelope(u.rows(), 0.0);
    std::vector<int> leader(u.rows(), -1);
    std::vector<bool> mixed(u.rows(), false);
    double extent = 0.0;
    for (Eigen::Index m = 0; m < u.rows(); ++m) {
        Eigen::Index lead = 0;
        const double largest = u.row(m).cwiseAbs().maxCoeff(&lead);
        const int nonzero = static_cast<int>((u.row(m).array() != 0.0).count());
        mixed[m] = nonzero > 1;
        if (largest > 0.0) {
            leader[m] = static_cast<int>(lead);
            envelope[m] = (u(m, lead) > 0.0 ? 1.0 : -1.0) * u.row(m).lpNorm<1>();
        }
        extent = std::max(extent, std::abs(envelope[m]));
    }
    if (extent == 0.0)
        extent = 1.0;

    auto x_of = [&](double t) { return margin + (width - 2 * margin) * t / grid.horizon; };
    auto y_of = [&](double v) { return height / 2 - (height / 2 - margin) * v / extent; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    out << "<line x1=\"" << x_of(0) << "\" y1=\"" << y_of(0) << "\" x2=\"" << x_of(grid.horizon) << "\" y2=\""
        << y_of(0) << "\" stroke=\"black\"/>\n";
    for (Eigen::Index m = 0; m < u.rows(); ++m) {
        const double t0 = grid.node(static_cast<int>(m));
        const double t1 = grid.node(static_cast<int>(m) + 1);
        if (leader[m] >= 0) {
            out << "<line x1=\"" << x_of(t0) << "\" y1=\"" << y_of(envelope[m]) << "\" x2=\"" << x_of(t1)
                << "\" y2=\"" << y_of(envelope[m]) << "\" stroke=\"" << palette[leader[m] % palette.size()]
                << "\" stroke-width=\"2\"/>\n";
        }
        if (mixed[m]) {
            const double tm = grid.midpoint(static_cast<int>(m));
            out << "<line x1=\"" << x_of(tm) << "\" y1=\"" << y_of(0) - 4 << "\" x2=\"" << x_of(tm) << "\" y2=\""
                << y_of(0) + 4 << "\" stroke=\"red\"/>\n";
        }
    }
    double legend_y = margin / 2;
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
        if ((u.col(j).array() == 0.0).all())
            continue;
        out << "<text x=\"" << width - margin << "\" y=\"" << legend_y << "\" font-size=\"12\" fill=\""
            << palette[j % palette.size()] << "\">u" << (j + 1) << "</text>\n";
        legend_y += 14;
    }
    out << "</svg>\n";
}

ExperimentOutput run_experiment(const RunConfig& config) {
    const ExperimentSetup setup = build_setup(config);
    ExperimentOutput output;
    output.report = solve_configured(config, setup);

    std::filesystem::create_directories(config.output_dir);
    output.controls_csv = config.output_dir / "controls.csv";
    output.summary = config.output_dir / "summary.json";
    {
        auto out = open_output(output.controls_csv);
        write_controls_csv(out, output.report.u, setup.heat->grid());
    }
    {
        auto out = open_output(output.summary);
        out << summary_json(config, output.report);
    }
    if (config.emit_svg) {
        output.svg = config.output_dir / "controls.svg";
        auto out = open_output(output.svg);
        write_controls_svg(out, output.report.u, setup.heat->grid());
    }
    return output;
}

SweepParameter parse_sweep_parameter(const std::string& name) {
    if (name == "alpha")
        return SweepParameter::Alpha;
    if (name == "gamma")
        return SweepParameter::Gamma;
    throw ConfigError("sweep: unknown parameter '" + name + "' (expected alpha or gamma)");
}

namespace {

SweepRow row_from_stage(double value, const StageRecord& stage) {
    SweepRow row;
    row.value = value;
    row.gamma = stage.gamma;
    row.newton_iterations = stage.newton_iterations;
    row.cg_iterations = stage.last_cg_iterations;
    row.status = to_string(stage.status);
    row.tau.assign(3, 0);
    if (stage.status == StageStatus::Converged) {
        for (std::size_t j = 0; j < 3 && j < stage.diagnostics.tau.size(); ++j)
            row.tau[j] = stage.diagnostics.tau[j];
    }
    return row;
}

} // namespace

std::vector<SweepRow> run_table_sweep(const RunConfig& base, SweepParameter parameter,
                                      const std::vector<double>& values) {
    std::vector<SweepRow> rows;
    if (values.empty())
        return rows;

    if (parameter == SweepParameter::Alpha) {
        RunConfig config = base;
        config.alpha = values.front();
        const ExperimentSetup setup = build_setup(config);
        for (double alpha : values) {
            config.alpha = alpha;
            config.validate();
            const SolveReport report = solve_configured(config, setup);
            rows.push_back(row_from_stage(alpha, report.last_successful_stage()));
        }
        return rows;
    }

    RunConfig config = base;
    config.homotopy.gamma_min = std::min(*std::min_element(values.begin(), values.end()), config.homotopy.gamma_min);
    config.validate();
    const ExperimentSetup setup = build_setup(config);

    // Converged stages by decreasing gamma, with their duals for warm starts.
    std::vector<std::pair<StageRecord, DualTrajectory>> converged;
    run_homotopy(setup.problem(config.alpha, config.homotopy.gamma_start), config.homotopy, config.solver,
                 [&](const StageRecord& stage, const ControlTrajectory&, const DualTrajectory& p) {
                     converged.emplace_back(stage, p);
                 });

    for (double gamma : values) {
        // Nearest converged stage at or above gamma.
        const std::pair<StageRecord, DualTrajectory>* anchor = nullptr;
        for (const auto& entry : converged) {
            if (entry.first.gamma >= gamma * (1 - 1e-9))
                anchor = &entry;
        }
        if (anchor && std::abs(anchor->first.gamma - gamma) <= 1e-9 * gamma) {
            rows.push_back(row_from_stage(gamma, anchor->first));
            continue;
        }

        // Off the schedule: one fixed-gamma solve from the anchor.
        const auto problem = setup.problem(config.alpha, gamma);
        const DualTrajectory start =
            anchor ? anchor->second : DualTrajectory::Zero(setup.heat->intervals(), setup.heat->components());
        StageRecord stage;
        stage.gamma = gamma;
        try {
            const FixedGammaResult result = solve_fixed_gamma(start, problem, config.solver);
            stage.newton_iterations = result.state.iteration;
            stage.history = result.state.history;
            stage.diagnostics = switching_diagnostics(result.u, result.state.p, problem.penalty);
        } catch (const SolverFailure& e) {
            stage.status = dynamic_cast<const NotConverged*>(&e) ? StageStatus::NotConverged
                                                                  : StageStatus::LineSearchFailed;
            stage.newton_iterations = e.state().iteration;
            stage.history = e.state().history;
        }
        stage.last_cg_iterations = stage.history.back().cg_iterations;
        rows.push_back(row_from_stage(gamma, stage));
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, SweepParameter parameter, const std::vector<SweepRow>& rows) {
    out << (parameter == SweepParameter::Alpha ? "alpha" : "gamma") << ",tau1,tau2,tau3,"
        << (parameter == SweepParameter::Alpha ? "gamma_bar" : "gamma") << ",ssn,cg,status\n";
    for (const auto& row : rows) {
        out << format_short(row.value) << ',' << row.tau[0] << ',' << row.tau[1] << ',' << row.tau[2] << ','
            << format_short(row.gamma) << ',' << row.newton_iterations << ',' << row.cg_iterations << ','
            << row.status << '\n';
    }
}

} // namespace switching
