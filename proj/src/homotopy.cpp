#include "switching/homotopy.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>

namespace switching {

void HomotopySchedule::validate() const {
    if (!(gamma_min > 0.0) || !(gamma_start > gamma_min))
        throw std::invalid_argument("HomotopySchedule: need gamma_start > gamma_min > 0");
    if (!(reduction_factor > 1.0))
        throw std::invalid_argument("HomotopySchedule: reduction_factor must exceed 1");
}

std::vector<double> HomotopySchedule::gammas() const {
    validate();
    // Relative slack so that e.g. 1e-2 / 1e10 still counts as reaching 1e-12.
    const double floor = gamma_min * (1.0 - 1e-9);
    std::vector<double> values;
    for (int k = 0;; ++k) {
        // Round to 15 digits so a decimal schedule yields 1e-11, not 1.0000000000000001e-11.
        char text[32];
        std::snprintf(text, sizeof text, "%.15g", gamma_start / std::pow(reduction_factor, k));
        const double gamma = std::strtod(text, nullptr);
        if (gamma < floor)
            break;
        values.push_back(gamma);
    }
    return values;
}

std::string to_string(StageStatus status) {
    switch (status) {
    case StageStatus::Converged:
        return "converged";
    case StageStatus::NotConverged:
        return "not_converged";
    case StageStatus::LineSearchFailed:
        return "line_search_failed";
    }
    return "unknown";
}

int SolveReport::total_newton_iterations() const {
    int total = 0;
    for (const auto& stage : stages)
        total += stage.newton_iterations;
    return total;
}

const StageRecord& SolveReport::last_successful_stage() const {
    for (auto it = stages.rbegin(); it != stages.rend(); ++it) {
        if (it->status == StageStatus::Converged)
            return *it;
    }
    throw std::logic_error("SolveReport: no converged stage");
}

namespace {

StageRecord failed_stage(double gamma, StageStatus status, const NewtonState& state) {
    StageRecord record;
    record.gamma = gamma;
    record.status = status;
    record.newton_iterations = state.iteration;
    record.history = state.history;
    if (!record.history.empty())
        record.last_cg_iterations = record.history.back().cg_iterations;
    return record;
}

} // namespace

SolveReport run_homotopy(const OptimalControlProblem& problem, const HomotopySchedule& schedule,
                         const SolverSettings& settings, const StageObserver& observer) {
    const auto gammas = schedule.gammas();
    const HeatSolver& heat = problem.solver();
    const DualTrajectory zero = DualTrajectory::Zero(heat.intervals(), heat.components());

    SolveReport report;
    report.penalty = problem.penalty;
    report.p = zero;

    for (double gamma : gammas) {
        const OptimalControlProblem stage_problem = problem.with_gamma(gamma);
        const DualTrajectory& start = (schedule.warm_start && !report.stages.empty()) ? report.p : zero;

        std::optional<StageRecord> failure;
        try {
            FixedGammaResult result = solve_fixed_gamma(start, stage_problem, settings);
            StageRecord record;
            record.gamma = gamma;
            record.newton_iterations = result.state.iteration;
            record.history = result.state.history;
            record.last_cg_iterations = record.history.back().cg_iterations;
            record.diagnostics = switching_diagnostics(result.u, result.state.p, stage_problem.penalty);
            record.control_norm = heat.control_norm(result.u);
            if (observer)
                observer(record, result.u, result.state.p);

            report.last_gamma = gamma;
            report.penalty = stage_problem.penalty;
            report.diagnostics = record.diagnostics;
            report.u = std::move(result.u);
            report.p = std::move(result.state.p);
            report.stages.push_back(std::move(record));
        } catch (const NotConverged& e) {
            failure = failed_stage(gamma, StageStatus::NotConverged, e.state());
        } catch (const LineSearchFailed& e) {
            failure = failed_stage(gamma, StageStatus::LineSearchFailed, e.state());
        }

        if (!failure)
            continue;
        if (report.stages.empty())
            throw FirstStageFailed("homotopy: no solution at the initial gamma", std::move(*failure));
        report.stages.push_back(std::move(*failure));
        break;
    }
    return report;
}

} // namespace switching
