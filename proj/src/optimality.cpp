#include "switching/optimality.hpp"

#include <cmath>
#include <limits>

namespace switching {

OptimalControlProblem OptimalControlProblem::with_gamma(double gamma) const {
    OptimalControlProblem copy = *this;
    copy.penalty.gamma = gamma;
    return copy;
}

void SolverSettings::validate() const {
    if (!(newton_tol_rel > 0.0) || !(cg_tol_rel > 0.0))
        throw std::invalid_argument("SolverSettings: tolerances must be positive");
    if (newton_max_iter < 1 || cg_max_iter < 1 || linesearch_max < 1)
        throw std::invalid_argument("SolverSettings: iteration limits must be positive");
    if (!(linesearch_factor > 0.0 && linesearch_factor < 1.0))
        throw std::invalid_argument("SolverSettings: linesearch_factor must lie in (0, 1)");
    if (!(rounding_floor_factor >= 0.0))
        throw std::invalid_argument("SolverSettings: rounding_floor_factor must be nonnegative");
}

TimeSeries SliceDerivatives::apply(const TimeSeries& v) const {
    TimeSeries out = TimeSeries::Zero(v.rows(), v.cols());
    for (Eigen::Index m = 0; m < v.rows(); ++m) {
        const auto& idx = active[m];
        for (int j : idx) {
            double sum = 0.0;
            for (int i : idx)
                sum += blocks[m](j, i) * v(m, i);
            out(m, j) = sum;
        }
    }
    return out;
}

double SliceDerivatives::inner(const TimeSeries& v, const TimeSeries& w, double tau) const {
    return tau * v.cwiseProduct(apply(w)).sum();
}

TimeSeries SliceDerivatives::project(const TimeSeries& v, bool keep_active) const {
    TimeSeries out = keep_active ? TimeSeries::Zero(v.rows(), v.cols()) : v;
    for (Eigen::Index m = 0; m < v.rows(); ++m) {
        for (int j : active[m])
            out(m, j) = keep_active ? v(m, j) : 0.0;
    }
    return out;
}

ControlTrajectory apply_H(const DualTrajectory& p, const PenaltyParams& params) {
    ControlTrajectory u(p.rows(), p.cols());
    for (Eigen::Index m = 0; m < p.rows(); ++m) {
        const Vector q = p.row(m).transpose();
        u.row(m) = hgamma(q, params).transpose();
    }
    return u;
}

SliceDerivatives newton_derivatives(const DualTrajectory& p, const PenaltyParams& params) {
    SliceDerivatives out;
    out.blocks.reserve(p.rows());
    out.active.reserve(p.rows());
    for (Eigen::Index m = 0; m < p.rows(); ++m) {
        const Vector q = p.row(m).transpose();
        const ProxResult prox = prox_gstar(q, params);
        out.blocks.push_back(newton_derivative_from_prox(q, prox, params));
        out.active.push_back(prox.active_set);
    }
    return out;
}

DualTrajectory residual_F(const DualTrajectory& p, const OptimalControlProblem& problem) {
    const HeatSolver& heat = problem.solver();
    const StateTrajectory y = heat.apply_S(apply_H(p, problem.penalty));
    const StateTrajectory misfit{y.nodes - problem.target->nodes};
    return p + heat.apply_Sstar(misfit);
}

namespace {

DualTrajectory coupling(const SliceDerivatives& derivative, const DualTrajectory& dp,
                        const OptimalControlProblem& problem) {
    const HeatSolver& heat = problem.solver();
    return heat.apply_Sstar(heat.apply_S0(derivative.apply(dp)));
}

} // namespace

DualTrajectory newton_apply(const SliceDerivatives& derivative, const DualTrajectory& dp,
                            const OptimalControlProblem& problem) {
    return dp + coupling(derivative, dp, problem);
}

NewtonStep solve_newton_step(const DualTrajectory& p_k, const DualTrajectory& residual,
                             const OptimalControlProblem& problem, const SolverSettings& settings) {
    const HeatSolver& heat = problem.solver();
    const double tau = heat.grid().step();
    const SliceDerivatives D = newton_derivatives(p_k, problem.penalty);

    const DualTrajectory rhs = -residual;
    const DualTrajectory rhs_active = D.project(rhs, true);

    NewtonStep step;
    DualTrajectory x = DualTrajectory::Zero(rhs.rows(), rhs.cols());
    DualTrajectory coupled_x = x;

    const double rhs_norm = heat.control_norm(rhs_active);
    if (rhs_norm > 0.0) {
        DualTrajectory r = rhs_active;
        DualTrajectory dir = r;
        double rho = D.inner(r, r, tau);
        double r_norm = rhs_norm;
        while (step.cg_iterations < settings.cg_max_iter) {
            const DualTrajectory coupled_dir = coupling(D, dir, problem);
            const DualTrajectory image = dir + D.project(coupled_dir, true);
            const double curvature = D.inner(dir, image, tau);
            if (!(curvature > 0.0) || !(rho > 0.0))
                break;
            const double a = rho / curvature;
            x += a * dir;
            coupled_x += a * coupled_dir;
            r -= a * image;
            ++step.cg_iterations;

            r_norm = heat.control_norm(r);
            if (r_norm <= settings.cg_tol_rel * rhs_norm)
                break;
            const double rho_next = D.inner(r, r, tau);
            dir = r + (rho_next / rho) * dir;
            rho = rho_next;
        }
        step.cg_relative_residual = r_norm / rhs_norm;
    }

    step.dp = x + D.project(rhs - coupled_x, false);
    return step;
}

NewtonStep solve_newton_step(const DualTrajectory& p_k, const OptimalControlProblem& problem,
                             const SolverSettings& settings) {
    return solve_newton_step(p_k, residual_F(p_k, problem), problem, settings);
}

std::optional<LineSearchStep> line_search(const DualTrajectory& p_k, double residual_norm,
                                          const DualTrajectory& dp, const OptimalControlProblem& problem,
                                          const SolverSettings& settings) {
    const HeatSolver& heat = problem.solver();
    double step = 1.0;
    for (int trial = 1; trial <= settings.linesearch_max; ++trial) {
        LineSearchStep candidate;
        candidate.p = p_k + step * dp;
        candidate.residual = residual_F(candidate.p, problem);
        candidate.residual_norm = heat.control_norm(candidate.residual);
        if (candidate.residual_norm < residual_norm) {
            candidate.step = step;
            candidate.trials = trial;
            return candidate;
        }
        step *= settings.linesearch_factor;
    }
    return std::nullopt;
}

int count_active_changes(const ControlTrajectory& before, const ControlTrajectory& after) {
    int changes = 0;
    for (Eigen::Index m = 0; m < after.rows(); ++m) {
        for (Eigen::Index j = 0; j < after.cols(); ++j) {
            if ((before(m, j) != 0.0) != (after(m, j) != 0.0)) {
                ++changes;
                break;
            }
        }
    }
    return changes;
}

FixedGammaResult solve_fixed_gamma(const DualTrajectory& p0, const OptimalControlProblem& problem,
                                   const SolverSettings& settings) {
    settings.validate();
    problem.penalty.validate();
    if (!p0.allFinite())
        throw std::invalid_argument("solve_fixed_gamma: initial iterate is not finite");

    const HeatSolver& heat = problem.solver();
    NewtonState state;
    state.p = p0;
    DualTrajectory residual = residual_F(state.p, problem);
    state.residual_norm = heat.control_norm(residual);
    state.initial_residual_norm = state.residual_norm;
    state.history.push_back({0, state.residual_norm, 0.0, 0, -1});

    ControlTrajectory u = apply_H(state.p, problem.penalty);
    const double target = settings.newton_tol_rel * state.initial_residual_norm;
    auto converged = [&] {
        const double floor =
            settings.rounding_floor_factor * std::numeric_limits<double>::epsilon() * heat.control_norm(state.p);
        return state.residual_norm <= target || state.residual_norm <= floor;
    };

    while (!converged()) {
        if (state.iteration >= settings.newton_max_iter)
            throw NotConverged("semismooth Newton: iteration limit reached", std::move(state));

        const NewtonStep step = solve_newton_step(state.p, residual, problem, settings);
        auto accepted = line_search(state.p, state.residual_norm, step.dp, problem, settings);
        if (!accepted)
            throw LineSearchFailed("semismooth Newton: line search failed", std::move(state));

        ControlTrajectory next_u = apply_H(accepted->p, problem.penalty);
        const int changes = count_active_changes(u, next_u);
        u = std::move(next_u);
        state.p = std::move(accepted->p);
        residual = std::move(accepted->residual);
        state.residual_norm = accepted->residual_norm;
        ++state.iteration;
        state.history.push_back({state.iteration, state.residual_norm, accepted->step, step.cg_iterations, changes});
    }
    return {std::move(state), std::move(u)};
}

SwitchingDiagnostics switching_diagnostics(const ControlTrajectory& u, const DualTrajectory& p,
                                           const PenaltyParams& params) {
    if (u.rows() != p.rows() || u.cols() != p.cols())
        throw std::invalid_argument("switching_diagnostics: shape mismatch");

    SwitchingDiagnostics diag;
    diag.tau.assign(p.cols(), 0);
    diag.clamped.reserve(p.rows());

    int previous_leader = -1;
    for (Eigen::Index m = 0; m < p.rows(); ++m) {
        const Vector q = p.row(m).transpose();
        const ProxResult prox = prox_gstar(q, params);
        diag.clamped.push_back(prox.d);
        if (prox.d >= 1)
            ++diag.tau[prox.d - 1];

        // Only intervals with a single clamped component have a unique leader.
        const int leader = prox.d == 1 ? prox.active_set.front() : -1;
        if (leader >= 0 && previous_leader >= 0 && leader != previous_leader)
            ++diag.switch_points;
        previous_leader = leader;
    }

    for (Eigen::Index j = 0; j < u.cols(); ++j) {
        if ((u.col(j).array() == 0.0).all())
            diag.never_active.push_back(static_cast<int>(j));
    }
    return diag;
}

} // namespace switching
