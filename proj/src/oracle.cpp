#include "switching/oracle.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace switching::oracle {

namespace {

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

} // namespace

double prox_objective(const Vector& w, const Vector& q, const PenaltyParams& params) {
    const double linf = w.size() ? w.cwiseAbs().maxCoeff() : 0.0;
    return (w - q).squaredNorm() / (2.0 * params.gamma) + linf * linf / (2.0 * params.alpha);
}

ProxCandidate prox_oracle_candidate(const Vector& q, const PenaltyParams& params) {
    const auto n = static_cast<int>(q.size());
    if (n > 16)
        throw std::invalid_argument("prox_oracle: dimension too large for enumeration");
    ProxCandidate best{q, {}};
    if (n == 0)
        return best;

    double best_value = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        double magnitude_sum = 0.0;
        std::vector<int> clamped;
        for (int j = 0; j < n; ++j) {
            if (mask & (1u << j)) {
                clamped.push_back(j);
                magnitude_sum += std::abs(q[j]);
            }
        }
        const auto size = static_cast<double>(clamped.size());
        const double level = params.alpha * magnitude_sum / (size * params.alpha + params.gamma);
        Vector w = q;
        for (int j : clamped)
            w[j] = sgn(q[j]) * level;

        const double value = prox_objective(w, q, params);
        const double slack = 1e-15 * std::abs(best_value);
        const bool first = best.clamped.empty();
        const bool better = value < best_value - slack;
        const bool tie_but_larger = std::abs(value - best_value) <= slack && clamped.size() > best.clamped.size();
        if (first || better || tie_but_larger) {
            best_value = first ? value : std::min(value, best_value);
            best.w = std::move(w);
            best.clamped = std::move(clamped);
        }
    }
    return best;
}

Vector prox_oracle(const Vector& q, const PenaltyParams& params) { return prox_oracle_candidate(q, params).w; }

Vector hgamma_oracle(const Vector& q, const PenaltyParams& params) {
    return (q - prox_oracle(q, params)) / params.gamma;
}

Matrix derivative_oracle(const Vector& q, const PenaltyParams& params) {
    const ProxCandidate best = prox_oracle_candidate(q, params);
    const auto d = static_cast<double>(best.clamped.size());
    const double coupling = params.alpha / (d * params.alpha + params.gamma);
    // On the clamped set prox is w_j = sgn(q_j) * coupling * sum_i sgn(q_i) q_i.
    // A clamped q_j = 0 has no sign; the Jacobians for q_j -> 0+ and 0- are
    // averaged, so sgn(q_j)^2 -> 1 and sgn(q_j) sgn(q_i) -> 0 for i != j.
    auto sign_product = [&](int j, int i) { return i == j ? 1.0 : sgn(q[j]) * sgn(q[i]); };
    Matrix D = Matrix::Zero(q.size(), q.size());
    for (int j : best.clamped) {
        for (int i : best.clamped) {
            const double dprox = coupling * sign_product(j, i);
            D(j, i) = ((i == j ? 1.0 : 0.0) - dprox) / params.gamma;
        }
    }
    return D;
}

double conjugate_oracle(const Vector& q, double alpha, double radius, int points) {
    const auto n = static_cast<int>(q.size());
    if (n < 1 || n > 3)
        throw std::invalid_argument("conjugate_oracle: supports 1 <= N <= 3");
    if (points < 2)
        throw std::invalid_argument("conjugate_oracle: need at least two grid points");

    const double h = 2.0 * radius / (points - 1);
    long total = 1;
    for (int k = 0; k < n; ++k)
        total *= points;

    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> index(n, 0);
    for (long flat = 0; flat < total; ++flat) {
        long rest = flat;
        double inner = 0.0;
        double l1 = 0.0;
        for (int k = 0; k < n; ++k) {
            index[k] = static_cast<int>(rest % points);
            rest /= points;
            const double v = -radius + h * index[k];
            inner += q[k] * v;
            l1 += std::abs(v);
        }
        best = std::max(best, inner - 0.5 * alpha * l1 * l1);
    }
    return best;
}

DenseModel::DenseModel(const SpatialMesh& mesh, const ControlGeometry& geometry, const TimeGrid& grid,
                       const StateTrajectory& target)
    : intervals_(grid.intervals), components_(geometry.components()), tau_(grid.step()) {
    const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
    const Eigen::Index M = intervals_;
    const Eigen::Index N = components_;
    if (M * N > 60)
        throw std::invalid_argument("DenseModel: intended for M * N <= 60");
    if (target.time_nodes() != M + 1 || target.vertices() != nv)
        throw std::invalid_argument("DenseModel: target has the wrong shape");

    const Matrix mass = Matrix(mesh.mass);
    const Matrix stiffness = Matrix(mesh.stiffness);
    const Matrix obs_mass = Matrix(geometry.obs_mass);
    const Eigen::PartialPivLU<Matrix> implicit_lu(mass + 0.5 * tau_ * stiffness);
    const Matrix propagator = implicit_lu.solve(mass - 0.5 * tau_ * stiffness);
    const Matrix injection = implicit_lu.solve(tau_ * geometry.load);

    state_map_ = Matrix::Zero(M * nv, M * N);
    for (Eigen::Index k = 0; k < M; ++k) {
        for (Eigen::Index i = 0; i < N; ++i) {
            Vector y = injection.col(i);
            for (Eigen::Index node = k + 1; node <= M; ++node) {
                if (node > k + 1)
                    y = propagator * y;
                state_map_.block((node - 1) * nv, k * N + i, nv, 1) = y;
            }
        }
    }

    weights_ = Matrix::Zero(M * nv, M * nv);
    target_.resize(M * nv);
    for (Eigen::Index node = 1; node <= M; ++node) {
        const double w = (node == M) ? 0.5 * tau_ : tau_;
        weights_.block((node - 1) * nv, (node - 1) * nv, nv, nv) = w * obs_mass;
        target_.segment((node - 1) * nv, nv) = target.nodes.row(node).transpose();
    }
    const Vector y0 = target.nodes.row(0).transpose();
    initial_tracking_ = 0.5 * (0.5 * tau_) * y0.dot(obs_mass * y0);

    gram_ = state_map_.transpose() * weights_ * state_map_ / tau_;
    adjoint_target_ = state_map_.transpose() * (weights_ * target_) / tau_;
}

Vector DenseModel::flatten(const TimeSeries& v) { return Eigen::Map<const Vector>(v.data(), v.size()); }

TimeSeries DenseModel::unflatten(const Vector& v) const {
    return Eigen::Map<const TimeSeries>(v.data(), intervals_, components_);
}

Vector DenseModel::state(const Vector& u) const { return state_map_ * u; }

Vector DenseModel::apply_H(const Vector& p, const PenaltyParams& params) const {
    Vector u(p.size());
    for (int m = 0; m < intervals_; ++m)
        u.segment(m * components_, components_) = hgamma_oracle(p.segment(m * components_, components_), params);
    return u;
}

Matrix DenseModel::derivative(const Vector& p, const PenaltyParams& params) const {
    Matrix D = Matrix::Zero(size(), size());
    for (int m = 0; m < intervals_; ++m) {
        D.block(m * components_, m * components_, components_, components_) =
            derivative_oracle(p.segment(m * components_, components_), params);
    }
    return D;
}

Vector DenseModel::residual(const Vector& p, const PenaltyParams& params) const {
    return p + gram_ * apply_H(p, params) - adjoint_target_;
}

Matrix DenseModel::newton_matrix(const Vector& p, const PenaltyParams& params) const {
    return Matrix::Identity(size(), size()) + gram_ * derivative(p, params);
}

Vector DenseModel::newton_step(const Vector& p, const PenaltyParams& params) const {
    const Eigen::FullPivLU<Matrix> lu(newton_matrix(p, params));
    if (!lu.isInvertible())
        throw std::runtime_error("DenseModel: singular Newton matrix");
    return lu.solve(-residual(p, params));
}

double DenseModel::tracking(const Vector& u) const {
    const Vector misfit = state(u) - target_;
    return 0.5 * misfit.dot(weights_ * misfit) + initial_tracking_;
}

double DenseModel::regularized_objective(const Vector& u, const PenaltyParams& params) const {
    double penalty = 0.0;
    for (int m = 0; m < intervals_; ++m) {
        const auto slice = u.segment(m * components_, components_);
        const double l1 = slice.lpNorm<1>();
        penalty += 0.5 * params.alpha * l1 * l1 + 0.5 * params.gamma * slice.squaredNorm();
    }
    return tracking(u) + tau_ * penalty;
}

Vector DenseModel::proxgrad(const PenaltyParams& params, int iterations, std::vector<double>* history) const {
    // Euclidean gradient of the tracking term: tau (S^*S u - S^* y_d).
    auto gradient = [&](const Vector& u) -> Vector { return tau_ * (gram_ * u - adjoint_target_); };

    // prox of step * tau * (g + gamma/2 |.|^2) on one slice, through the
    // Moreau decomposition prox_{l g}(x) = x - l prox_{g^*/l}(x / l).
    auto slice_prox = [&](const Vector& v, double step) -> Vector {
        const double scaled = step * tau_;
        const double shrink = 1.0 + scaled * params.gamma;
        const Vector x = v / shrink;
        const double lambda = scaled / shrink;
        return x - lambda * prox_oracle(x / lambda, PenaltyParams{params.alpha, 1.0 / lambda});
    };

    Vector u = Vector::Zero(size());
    double step = 1.0;
    double f = tracking(u);
    if (history)
        history->push_back(regularized_objective(u, params));

    for (int it = 0; it < iterations; ++it) {
        const Vector grad = gradient(u);
        Vector next(size());
        double f_next = 0.0;
        for (int backtrack = 0; backtrack < 200; ++backtrack) {
            const Vector forward = u - step * grad;
            for (int m = 0; m < intervals_; ++m)
                next.segment(m * components_, components_) =
                    slice_prox(forward.segment(m * components_, components_), step);
            f_next = tracking(next);
            const Vector delta = next - u;
            if (f_next <= f + grad.dot(delta) + delta.squaredNorm() / (2.0 * step) + 1e-15 * std::abs(f))
                break;
            step *= 0.5;
        }
        u = std::move(next);
        f = f_next;
        if (history)
            history->push_back(regularized_objective(u, params));
    }
    return u;
}

} // namespace switching::oracle
