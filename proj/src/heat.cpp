#include "switching/heat.hpp"

#include <numbers>
#include <stdexcept>

namespace switching {

void TimeGrid::validate() const {
    if (!(horizon > 0.0))
        throw std::invalid_argument("TimeGrid: horizon must be positive");
    if (intervals < 1)
        throw std::invalid_argument("TimeGrid: at least one interval required");
}

double control_angle(int i, int components) {
    return std::numbers::pi / 4.0 + 2.0 * std::numbers::pi * i / components;
}

ControlGeometry assemble_control_geometry(const SpatialMesh& mesh, int components,
                                          const GeometryOptions& options) {
    if (components < 1)
        throw std::invalid_argument("assemble_control_geometry: need at least one component");

    ControlGeometry geometry;
    geometry.observation = Disk{Point::Zero(), options.obs_radius};
    geometry.load.resize(static_cast<Eigen::Index>(mesh.num_vertices()), components);
    for (int i = 0; i < components; ++i) {
        const double phi = control_angle(i, components);
        const Disk disk{options.control_circle * Point(std::cos(phi), std::sin(phi)), options.control_radius};
        geometry.controls.push_back(disk);
        geometry.load.col(i) = options.quadrature.load(mesh, disk);
    }
    geometry.obs_mass = options.quadrature.mass(mesh, geometry.observation);
    return geometry;
}

StateTrajectory target_yd(const TimeGrid& grid, const SpatialMesh& mesh, const ControlGeometry& geometry) {
    const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
    StateTrajectory target = StateTrajectory::zero(grid.intervals + 1, nv);
    for (int m = 0; m <= grid.intervals; ++m) {
        const double t = grid.node(m);
        const double envelope = std::pow(std::sin(2.0 * std::numbers::pi * t / grid.horizon), 2);
        for (Eigen::Index k = 0; k < nv; ++k) {
            double value = 0.0;
            for (int i = 0; i < geometry.components(); ++i)
                value += std::cos((i + 1) + t) * (mesh.vertices[k] - geometry.controls[i].center).squaredNorm();
            target.nodes(m, k) = envelope * value;
        }
    }
    return target;
}

HeatSolver::HeatSolver(std::shared_ptr<const SpatialMesh> mesh, std::shared_ptr<const ControlGeometry> geometry,
                       TimeGrid grid)
    : mesh_(std::move(mesh)), geometry_(std::move(geometry)), grid_(grid) {
    if (!mesh_ || !geometry_)
        throw std::invalid_argument("HeatSolver: mesh and geometry are required");
    grid_.validate();
    if (geometry_->load.rows() != vertices())
        throw std::invalid_argument("HeatSolver: geometry was assembled on a different mesh");

    const double half_step = 0.5 * grid_.step();
    const SparseMatrix implicit_part = mesh_->mass + half_step * mesh_->stiffness;
    explicit_part_ = mesh_->mass - half_step * mesh_->stiffness;
    implicit_factor_.compute(implicit_part);
    if (implicit_factor_.info() != Eigen::Success)
        throw std::runtime_error("HeatSolver: factorization of M + tau/2 K failed (invalid mesh)");

    mass_row_sums_ = mesh_->mass * Eigen::VectorXd::Ones(vertices());
    control_areas_ = geometry_->control_areas();
}

void HeatSolver::check_control_shape(const TimeSeries& u) const {
    if (u.rows() != intervals() || u.cols() != components())
        throw std::invalid_argument("HeatSolver: control trajectory has the wrong shape");
}

double HeatSolver::trapezoid_weight(int m) const {
    const double tau = grid_.step();
    return (m == 0 || m == intervals()) ? 0.5 * tau : tau;
}

StateTrajectory HeatSolver::apply_S(const ControlTrajectory& u) const {
    check_control_shape(u);
    const double tau = grid_.step();
    const auto& load = geometry_->load;

    StateTrajectory y = StateTrajectory::zero(intervals() + 1, vertices());
    Eigen::VectorXd rhs(vertices());
    for (int m = 0; m < intervals(); ++m) {
        rhs.noalias() = explicit_part_ * y.nodes.row(m).transpose();
        rhs.noalias() += tau * (load * u.row(m).transpose());
        y.nodes.row(m + 1) = implicit_factor_.solve(rhs).transpose();
    }
    if (observer_)
        observer_(u, y);
    return y;
}

StateTrajectory HeatSolver::apply_S0(const ControlTrajectory& u) const { return apply_S(u); }

DualTrajectory HeatSolver::apply_Sstar(const StateTrajectory& r) const {
    if (r.time_nodes() != intervals() + 1 || r.vertices() != vertices())
        throw std::invalid_argument("HeatSolver: residual trajectory has the wrong shape");
    const auto& load = geometry_->load;
    const auto& obs_mass = geometry_->obs_mass;

    // Backward sweep: lambda_m = w_m M_obs r_m + (M - tau/2 K) eta_{m+1},
    // eta_m = (M + tau/2 K)^{-1} lambda_m and p_{m-1} = B^T eta_m.
    DualTrajectory p(intervals(), components());
    Eigen::VectorXd lambda(vertices());
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(vertices());
    for (int m = intervals(); m >= 1; --m) {
        lambda.noalias() = trapezoid_weight(m) * (obs_mass * r.nodes.row(m).transpose());
        if (m < intervals())
            lambda.noalias() += explicit_part_ * eta;
        eta = implicit_factor_.solve(lambda);
        p.row(m - 1) = (load.transpose() * eta).transpose();
    }
    return p;
}

double HeatSolver::observed_inner(const StateTrajectory& y, const StateTrajectory& r) const {
    double sum = 0.0;
    for (int m = 0; m <= intervals(); ++m)
        sum += trapezoid_weight(m) * y.nodes.row(m).dot((geometry_->obs_mass * r.nodes.row(m).transpose()).transpose());
    return sum;
}

double HeatSolver::control_inner(const TimeSeries& u, const TimeSeries& p) const {
    return grid_.step() * u.cwiseProduct(p).sum();
}

double HeatSolver::tracking_term(const StateTrajectory& y, const StateTrajectory& target) const {
    const StateTrajectory diff{y.nodes - target.nodes};
    return 0.5 * observed_inner(diff, diff);
}

double HeatSolver::evaluate_objective(const ControlTrajectory& u, const StateTrajectory& target,
                                      double alpha) const {
    const double penalty = 0.5 * alpha * grid_.step() * u.rowwise().lpNorm<1>().squaredNorm();
    return tracking_term(apply_S(u), target) + penalty;
}

double HeatSolver::mass_balance_defect(const ControlTrajectory& u, const StateTrajectory& y) const {
    check_control_shape(u);
    const double tau = grid_.step();
    const double total_mass = mass_row_sums_.dot(y.nodes.row(intervals()).transpose());
    const double injected = tau * (u * control_areas_).sum();
    const double scale = tau * (u.cwiseAbs() * control_areas_.cwiseAbs()).sum();
    const double defect = std::abs(total_mass - injected);
    return scale > 0.0 ? defect / scale : defect;
}

} // namespace switching
