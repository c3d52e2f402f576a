#pragma once

// Brute-force reference implementations used by the test suites. Nothing in
// here calls the proximal kernels, the sweeps of HeatSolver, or the Newton
// solver; only the assembled matrices from the mesh/geometry step are shared.

#include "switching/heat.hpp"
#include "switching/prox.hpp"

#include <vector>

namespace switching::oracle {

/// (1/(2 gamma))|w - q|^2 + (1/(2 alpha))|w|_inf^2
double prox_objective(const Vector& w, const Vector& q, const PenaltyParams& params);

/// Clamped set and value of the best candidate found by prox_oracle.
struct ProxCandidate {
    Vector w;
    std::vector<int> clamped;
};

/// prox_{gamma g^*}(q) by enumerating all 2^N - 1 candidate clamped sets.
/// Requires N <= 16 (intended for N <= 8).
ProxCandidate prox_oracle_candidate(const Vector& q, const PenaltyParams& params);
Vector prox_oracle(const Vector& q, const PenaltyParams& params);

/// (q - prox_oracle(q)) / gamma
Vector hgamma_oracle(const Vector& q, const PenaltyParams& params);

/// Jacobian of the candidate map that prox_oracle selects at q, i.e.
/// (I - d prox/dq) / gamma for the winning clamped set. Clamped zero
/// components take the average of the one-sided Jacobians.
Matrix derivative_oracle(const Vector& q, const PenaltyParams& params);

/// sup of <q, v> - g(v) over the cubic grid [-radius, radius]^N with
/// `points` nodes per axis. Requires N <= 3.
double conjugate_oracle(const Vector& q, double alpha, double radius, int points);

/// Dense assembly of the discrete control-to-observation map, built by direct
/// time stepping with a dense LU of M + tau/2 K.
///
/// Vectors over the controls are flattened row-major (interval m, component i
/// -> m * N + i); the control pairing is tau times the Euclidean product.
class DenseModel {
public:
    DenseModel(const SpatialMesh& mesh, const ControlGeometry& geometry, const TimeGrid& grid,
               const StateTrajectory& target);

    int intervals() const { return intervals_; }
    int components() const { return components_; }
    double step() const { return tau_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(intervals_) * components_; }

    /// States at nodes 1..M stacked, for the flattened control u.
    Vector state(const Vector& u) const;
    /// S^* S as an (MN x MN) matrix.
    const Matrix& gram() const { return gram_; }
    /// S^* y_d
    const Vector& adjoint_target() const { return adjoint_target_; }

    Vector apply_H(const Vector& p, const PenaltyParams& params) const;
    Matrix derivative(const Vector& p, const PenaltyParams& params) const;
    /// p + S^*(S H(p) - y_d)
    Vector residual(const Vector& p, const PenaltyParams& params) const;
    /// Dense solve of (I + S^* S D(p)) dp = -F(p); throws std::runtime_error
    /// if the matrix is numerically singular.
    Vector newton_step(const Vector& p, const PenaltyParams& params) const;
    /// The Newton matrix I + S^* S D(p).
    Matrix newton_matrix(const Vector& p, const PenaltyParams& params) const;

    /// 1/2 ||S u - y_d||_obs^2
    double tracking(const Vector& u) const;
    /// tracking + tau sum_m [g(u_m) + gamma/2 |u_m|^2]
    double regularized_objective(const Vector& u, const PenaltyParams& params) const;

    /// Proximal gradient method with backtracking on the regularized
    /// objective, started from u = 0. Objective values per iteration are
    /// appended to `history` when given.
    Vector proxgrad(const PenaltyParams& params, int iterations, std::vector<double>* history = nullptr) const;

    static Vector flatten(const TimeSeries& v);
    TimeSeries unflatten(const Vector& v) const;

private:
    int intervals_ = 0;
    int components_ = 0;
    double tau_ = 0.0;
    Matrix state_map_;     // (M nv) x (M N)
    Matrix weights_;       // block diagonal w_m M_obs for nodes 1..M
    Vector target_;        // y_d at nodes 1..M
    double initial_tracking_ = 0.0;  // node 0 contribution (y_0 = 0)
    Matrix gram_;
    Vector adjoint_target_;
};

} // namespace switching::oracle
