#pragma once

#include "switching/optimality.hpp"

#include <functional>
#include <string>
#include <vector>

namespace switching {

struct HomotopySchedule {
    double gamma_start = 1e-2;
    double reduction_factor = 10.0;
    double gamma_min = 1e-12;
    /// Warm start each stage from the previous stage's p (cold: p = 0).
    bool warm_start = true;

    void validate() const;
    /// gamma_start / reduction_factor^k for every k with gamma >= gamma_min.
    std::vector<double> gammas() const;
};

enum class StageStatus { Converged, NotConverged, LineSearchFailed };

std::string to_string(StageStatus status);

struct StageRecord {
    double gamma = 0.0;
    StageStatus status = StageStatus::Converged;
    /// Newton steps taken in this stage.
    int newton_iterations = 0;
    /// CG iterations of the last Newton step (0 if no step was taken).
    int last_cg_iterations = 0;
    std::vector<IterationRecord> history;
    /// Only filled for converged stages.
    SwitchingDiagnostics diagnostics;
    double control_norm = 0.0;
};

struct SolveReport {
    std::vector<StageRecord> stages;
    /// Smallest gamma whose stage converged.
    double last_gamma = 0.0;
    PenaltyParams penalty;
    ControlTrajectory u;
    DualTrajectory p;
    SwitchingDiagnostics diagnostics;

    int total_newton_iterations() const;
    const StageRecord& last_successful_stage() const;
};

class FirstStageFailed : public std::runtime_error {
public:
    FirstStageFailed(const std::string& what, StageRecord stage)
        : std::runtime_error(what), stage_(std::move(stage)) {}
    const StageRecord& stage() const { return stage_; }

private:
    StageRecord stage_;
};

/// Called with every converged stage and its solution.
using StageObserver =
    std::function<void(const StageRecord&, const ControlTrajectory& u, const DualTrajectory& p)>;

/// Continuation in gamma: solves the regularized system for decreasing gamma,
/// stopping at the first stage that fails or once gamma_min is passed. The
/// returned report carries the solution of the last converged stage.
SolveReport run_homotopy(const OptimalControlProblem& problem, const HomotopySchedule& schedule,
                         const SolverSettings& settings, const StageObserver& observer = {});

} // namespace switching
