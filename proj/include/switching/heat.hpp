#pragma once

#include "switching/mesh.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <functional>
#include <memory>

namespace switching {

/// Row-major time series: one row per time interval (controls, adjoint
/// controls) or per time node (states).
using TimeSeries = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Piecewise constant control u (intervals x components).
using ControlTrajectory = TimeSeries;
/// Adjoint control variable p (intervals x components), the Newton unknown.
using DualTrajectory = TimeSeries;

/// Finite element state at every time node, (intervals + 1) x vertices.
struct StateTrajectory {
    TimeSeries nodes;

    static StateTrajectory zero(Eigen::Index time_nodes, Eigen::Index vertices) {
        return {TimeSeries::Zero(time_nodes, vertices)};
    }
    Eigen::Index time_nodes() const { return nodes.rows(); }
    Eigen::Index vertices() const { return nodes.cols(); }
};

struct TimeGrid {
    double horizon = 10.0;
    int intervals = 200;

    double step() const { return horizon / intervals; }
    double node(int m) const { return horizon * m / intervals; }
    double midpoint(int m) const { return horizon * (m + 0.5) / intervals; }
    void validate() const;
};

/// Circular control subdomains on the circle of radius 1/sqrt(2) and the
/// observation disk, with their finite element representations.
struct ControlGeometry {
    std::vector<Disk> controls;
    Disk observation;
    /// Column i holds b_i = int chi_{omega_i} phi_k.
    Eigen::MatrixXd load;
    /// int chi_{omega_obs} phi_k phi_l
    SparseMatrix obs_mass;

    int components() const { return static_cast<int>(controls.size()); }
    /// Discrete measure of omega_i, i.e. the entry sum of b_i.
    Eigen::VectorXd control_areas() const { return load.colwise().sum().transpose(); }
};

struct GeometryOptions {
    double control_radius = 0.1;
    double control_circle = 1.0 / std::sqrt(2.0);
    double obs_radius = 0.5;
    IndicatorQuadrature quadrature{};
};

/// Angle of control center i (0-based).
double control_angle(int i, int components);

ControlGeometry assemble_control_geometry(const SpatialMesh& mesh, int components,
                                          const GeometryOptions& options = {});

/// Nodal interpolant of the tracking target
///   y_d(t, x) = sum_i cos(i + t) sin^2(2 pi t / T) |x - x_i|^2   (i = 1..N)
/// at every time node.
StateTrajectory target_yd(const TimeGrid& grid, const SpatialMesh& mesh,
                          const ControlGeometry& geometry);

/// Crank-Nicolson / P1 discretization of y_t - Laplace(y) = B u with Neumann
/// boundary and zero initial state, together with its exact discrete adjoint.
///
/// Pairings: states are paired by <y, r>_obs = sum_m w_m y_m^T M_obs r_m with
/// trapezoidal weights w_m, controls by <u, p> = tau sum_m u_m^T p_m.
/// apply_Sstar is the transpose of apply_S with respect to these pairings.
class HeatSolver {
public:
    using ForwardObserver = std::function<void(const ControlTrajectory&, const StateTrajectory&)>;

    HeatSolver(std::shared_ptr<const SpatialMesh> mesh, std::shared_ptr<const ControlGeometry> geometry,
               TimeGrid grid);

    const SpatialMesh& mesh() const { return *mesh_; }
    const ControlGeometry& geometry() const { return *geometry_; }
    const TimeGrid& grid() const { return grid_; }
    int components() const { return geometry_->components(); }
    int intervals() const { return grid_.intervals; }
    Eigen::Index vertices() const { return static_cast<Eigen::Index>(mesh_->num_vertices()); }

    /// Control to state map S; throws std::invalid_argument on a shape mismatch.
    StateTrajectory apply_S(const ControlTrajectory& u) const;
    /// Solution operator with homogeneous data. Identical to apply_S since the
    /// initial state is zero.
    StateTrajectory apply_S0(const ControlTrajectory& u) const;
    /// Adjoint of u -> observed state, applied to a state-shaped residual.
    DualTrajectory apply_Sstar(const StateTrajectory& r) const;

    double observed_inner(const StateTrajectory& y, const StateTrajectory& r) const;
    double control_inner(const TimeSeries& u, const TimeSeries& p) const;
    double control_norm(const TimeSeries& u) const { return std::sqrt(control_inner(u, u)); }

    /// 1/2 ||S u - y_d||_obs^2 + (alpha/2) tau sum_m |u_m|_1^2
    double evaluate_objective(const ControlTrajectory& u, const StateTrajectory& target, double alpha) const;
    double tracking_term(const StateTrajectory& y, const StateTrajectory& target) const;

    /// |1^T M y_M - tau sum_m sum_i |omega_i| (u_m)_i| relative to the
    /// magnitude tau sum_m sum_i |omega_i| |(u_m)_i| (absolute when that is 0).
    double mass_balance_defect(const ControlTrajectory& u, const StateTrajectory& y) const;

    /// Called after every forward sweep. Not synchronized; install before
    /// sharing the solver across threads.
    void set_forward_observer(ForwardObserver observer) { observer_ = std::move(observer); }

private:
    void check_control_shape(const TimeSeries& u) const;
    double trapezoid_weight(int m) const;

    std::shared_ptr<const SpatialMesh> mesh_;
    std::shared_ptr<const ControlGeometry> geometry_;
    TimeGrid grid_;
    SparseMatrix explicit_part_;  // M - tau/2 K
    Eigen::SimplicialLLT<SparseMatrix> implicit_factor_;  // M + tau/2 K
    Eigen::VectorXd mass_row_sums_;
    Eigen::VectorXd control_areas_;
    ForwardObserver observer_;
};

} // namespace switching
