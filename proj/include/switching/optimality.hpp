#pragma once

#include "switching/heat.hpp"
#include "switching/prox.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace switching {

/// Reduced optimality system at a fixed regularization gamma:
///   F(p) = p + S^*(S H_gamma(p) - y_d) = 0.
struct OptimalControlProblem {
    std::shared_ptr<const HeatSolver> heat;
    std::shared_ptr<const StateTrajectory> target;
    PenaltyParams penalty;

    const HeatSolver& solver() const { return *heat; }
    OptimalControlProblem with_gamma(double gamma) const;
};

struct SolverSettings {
    double newton_tol_rel = 1e-6;
    int newton_max_iter = 30;
    double cg_tol_rel = 1e-6;
    int cg_max_iter = 50;
    double linesearch_factor = 0.5;
    int linesearch_max = 20;
    /// Also stop once ||F|| <= factor * eps * ||p||, the rounding level of
    /// p + S^*(...). 0 disables the floor.
    double rounding_floor_factor = 100.0;

    void validate() const;
};

/// Per-interval Newton derivative blocks of H_gamma at some p, together with
/// the clamped components of every interval. D_m is positive definite on its
/// active components and vanishes on all others.
struct SliceDerivatives {
    std::vector<Matrix> blocks;
    std::vector<std::vector<int>> active;

    /// (D v)_m = D_m v_m
    TimeSeries apply(const TimeSeries& v) const;
    /// <v, w>_D = tau sum_m v_m^T D_m w_m
    double inner(const TimeSeries& v, const TimeSeries& w, double tau) const;
    /// Zero out active (keep_active = false) or inactive components.
    TimeSeries project(const TimeSeries& v, bool keep_active) const;
};

/// u = H_gamma(p), slice-wise hgamma.
ControlTrajectory apply_H(const DualTrajectory& p, const PenaltyParams& params);
SliceDerivatives newton_derivatives(const DualTrajectory& p, const PenaltyParams& params);

DualTrajectory residual_F(const DualTrajectory& p, const OptimalControlProblem& problem);

/// dp + S^* S_0 D dp for the derivative D taken at the current iterate.
DualTrajectory newton_apply(const SliceDerivatives& derivative, const DualTrajectory& dp,
                            const OptimalControlProblem& problem);

struct NewtonStep {
    DualTrajectory dp;
    int cg_iterations = 0;
    /// Final CG residual relative to the right-hand side (tau-weighted norm).
    double cg_relative_residual = 0.0;
};

/// Solves (I + S^* S_0 D) dp = -F(p_k) by CG in the D-weighted inner product.
///
/// CG runs on the components that are clamped in each interval, where D is
/// definite. On the remaining components the operator is the identity plus
/// a coupling from the active part, so they are recovered afterwards from the
/// right-hand side and the accumulated operator applications.
NewtonStep solve_newton_step(const DualTrajectory& p_k, const DualTrajectory& residual,
                             const OptimalControlProblem& problem, const SolverSettings& settings);
NewtonStep solve_newton_step(const DualTrajectory& p_k, const OptimalControlProblem& problem,
                             const SolverSettings& settings);

struct LineSearchStep {
    DualTrajectory p;
    DualTrajectory residual;
    double residual_norm = 0.0;
    double step = 0.0;
    int trials = 0;
};

/// Backtracking on ||F||: tries step = factor^j, j < linesearch_max, and takes
/// the first one that strictly decreases the residual norm. nullopt on failure.
std::optional<LineSearchStep> line_search(const DualTrajectory& p_k, double residual_norm,
                                          const DualTrajectory& dp, const OptimalControlProblem& problem,
                                          const SolverSettings& settings);

struct IterationRecord {
    int iteration = 0;
    double residual_norm = 0.0;
    double step = 0.0;
    int cg_iterations = 0;
    /// Intervals whose set of nonzero control components changed; -1 for the
    /// initial iterate.
    int active_changes = -1;
};

struct NewtonState {
    DualTrajectory p;
    double residual_norm = 0.0;
    double initial_residual_norm = 0.0;
    int iteration = 0;
    std::vector<IterationRecord> history;
};

struct FixedGammaResult {
    NewtonState state;
    ControlTrajectory u;
};

class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, NewtonState state)
        : std::runtime_error(what), state_(std::move(state)) {}
    const NewtonState& state() const { return state_; }

private:
    NewtonState state_;
};

class NotConverged : public SolverFailure {
public:
    using SolverFailure::SolverFailure;
};

class LineSearchFailed : public SolverFailure {
public:
    using SolverFailure::SolverFailure;
};

/// Semismooth Newton method for F(p) = 0 from p0, stopping once
/// ||F(p_k)|| <= newton_tol_rel ||F(p0)|| or the residual has reached the
/// rounding floor (see SolverSettings). Throws NotConverged or
/// LineSearchFailed, both carrying the iteration history.
FixedGammaResult solve_fixed_gamma(const DualTrajectory& p0, const OptimalControlProblem& problem,
                                   const SolverSettings& settings);

int count_active_changes(const ControlTrajectory& before, const ControlTrajectory& after);

struct SwitchingDiagnostics {
    /// tau[j-1] = number of intervals with exactly j clamped components.
    std::vector<int> tau;
    int switch_points = 0;
    /// Clamped component count per interval.
    std::vector<int> clamped;
    /// Components that are zero on every interval.
    std::vector<int> never_active;

    int perfect_switching_intervals() const { return tau.empty() ? 0 : tau[0]; }
};

SwitchingDiagnostics switching_diagnostics(const ControlTrajectory& u, const DualTrajectory& p,
                                           const PenaltyParams& params);

} // namespace switching
