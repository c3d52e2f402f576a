#pragma once

#include "switching/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace switching {

/// Everything needed to solve one configured problem.
struct ExperimentSetup {
    std::shared_ptr<const SpatialMesh> mesh;
    std::shared_ptr<const ControlGeometry> geometry;
    std::shared_ptr<HeatSolver> heat;
    std::shared_ptr<const StateTrajectory> target;

    OptimalControlProblem problem(double alpha, double gamma) const;
};

ExperimentSetup build_setup(const RunConfig& config);

struct ExperimentOutput {
    SolveReport report;
    std::filesystem::path controls_csv;
    std::filesystem::path summary;
    std::filesystem::path svg;  // empty unless requested
};

/// Solves the configured problem by homotopy and writes controls.csv,
/// summary.json and (optionally) controls.svg into config.output_dir.
/// Throws FirstStageFailed on solver failure and std::runtime_error on I/O
/// failure.
ExperimentOutput run_experiment(const RunConfig& config);
SolveReport solve_configured(const RunConfig& config, const ExperimentSetup& setup);

/// CSV with header "t,u1,...,uN" and one row per interval (midpoint time).
void write_controls_csv(std::ostream& out, const ControlTrajectory& u, const TimeGrid& grid);
ControlTrajectory read_controls_csv(std::istream& in);

/// Structured summary of a homotopy run (JSON).
std::string summary_json(const RunConfig& config, const SolveReport& report);

/// Step plot of the signed l1 envelope; the leading component of each
/// interval carries the sign and selects the colour, intervals with more than
/// one nonzero component are ticked on the t-axis.
void write_controls_svg(std::ostream& out, const ControlTrajectory& u, const TimeGrid& grid);

enum class SweepParameter { Alpha, Gamma };

SweepParameter parse_sweep_parameter(const std::string& name);

struct SweepRow {
    double value = 0.0;
    std::vector<int> tau;  // tau_1..tau_3, padded with zeros
    double gamma = 0.0;    // gamma_bar for alpha sweeps, the stage gamma otherwise
    int newton_iterations = 0;
    int cg_iterations = 0;
    std::string status;
};

/// One homotopy per alpha, or a single homotopy whose stages are reported at
/// the listed gammas. A gamma that is not on the schedule is solved directly,
/// warm started from the nearest converged stage above it.
std::vector<SweepRow> run_table_sweep(const RunConfig& base, SweepParameter parameter,
                                      const std::vector<double>& values);
void write_sweep_csv(std::ostream& out, SweepParameter parameter, const std::vector<SweepRow>& rows);

} // namespace switching
