#include "switching/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace switching {

void PenaltyParams::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("PenaltyParams: alpha must be positive");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("PenaltyParams: gamma must be positive");
}

double g_value(ConstVectorRef v, double alpha) {
    const double l1 = v.lpNorm<1>();
    return 0.5 * alpha * l1 * l1;
}

double gstar_value(ConstVectorRef q, double alpha) {
    if (q.size() == 0)
        return 0.0;
    const double linf = q.lpNorm<Eigen::Infinity>();
    return linf * linf / (2.0 * alpha);
}

bool subdiff_contains(ConstVectorRef q, ConstVectorRef u, double alpha, double tol) {
    if (q.size() != u.size())
        throw std::invalid_argument("subdiff_contains: dimension mismatch");
    if (q.size() == 0)
        return true;

    // All tests are carried out on v = alpha*u, which lives in the units of q.
    const Vector v = alpha * u;
    const double qmax = q.lpNorm<Eigen::Infinity>();

    if (qmax <= tol)
        return v.lpNorm<Eigen::Infinity>() <= tol;

    std::vector<Eigen::Index> maximal;
    for (Eigen::Index j = 0; j < q.size(); ++j) {
        if (std::abs(q[j]) >= qmax - tol)
            maximal.push_back(j);
        else if (std::abs(v[j]) > tol)
            return false;
    }

    // Least squares for v_j = s_j q_j on the maximal set subject to sum s = 1.
    double ratio_sum = 0.0;
    double inv_sq_sum = 0.0;
    for (auto j : maximal) {
        ratio_sum += v[j] / q[j];
        inv_sq_sum += 1.0 / (q[j] * q[j]);
    }
    const double half_lambda = (ratio_sum - 1.0) / inv_sq_sum;
    for (auto j : maximal) {
        const double s = v[j] / q[j] - half_lambda / (q[j] * q[j]);
        if (s * qmax < -tol)
            return false;
        if (std::abs(v[j] - s * q[j]) > tol)
            return false;
    }
    return true;
}

ProxResult prox_gstar(ConstVectorRef q, const PenaltyParams& params) {
    const auto n = static_cast<int>(q.size());
    const double alpha = params.alpha;
    const double gamma = params.gamma;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return std::abs(q[a]) > std::abs(q[b]); });

    ProxResult result;
    result.w = q;
    if (n == 0)
        return result;

    double partial = 0.0;
    double level = 0.0;
    int d = n;
    for (int k = 1; k <= n; ++k) {
        partial += std::abs(q[order[k - 1]]);
        level = alpha * partial / (k * alpha + gamma);
        if (k < n && std::abs(q[order[k]]) < level) {
            d = k;
            break;
        }
    }

    result.d = d;
    result.active_set.assign(order.begin(), order.begin() + d);
    for (int j : result.active_set)
        result.w[j] = sign0(q[j]) * level;
    return result;
}

Vector hgamma_from_prox(ConstVectorRef q, const ProxResult& prox, const PenaltyParams& params) {
    // (q_j - w_j)/gamma cancels badly for small gamma since w_j ~ q_j. Expand
    // |q_j| - alpha S_d/(d alpha + gamma) and keep the near-tie differences
    // |q_j| - |q_i| explicit instead.
    const double alpha = params.alpha;
    const double gamma = params.gamma;
    const double denom = prox.d * alpha + gamma;
    Vector u = Vector::Zero(q.size());
    for (int j : prox.active_set) {
        const double a = std::abs(q[j]);
        double spread = 0.0;
        for (int i : prox.active_set)
            spread += a - std::abs(q[i]);
        u[j] = sign0(q[j]) * (a + alpha * spread / gamma) / denom;
    }
    return u;
}

Vector hgamma(ConstVectorRef q, const PenaltyParams& params) {
    return hgamma_from_prox(q, prox_gstar(q, params), params);
}

Matrix newton_derivative_from_prox(ConstVectorRef q, const ProxResult& prox,
                                   const PenaltyParams& params) {
    const double alpha = params.alpha;
    const double gamma = params.gamma;
    const int d = prox.d;
    const double scale = 1.0 / (gamma * (d * alpha + gamma));
    const double diag = ((d - 1) * alpha + gamma) * scale;

    Matrix D = Matrix::Zero(q.size(), q.size());
    for (int j : prox.active_set) {
        for (int i : prox.active_set) {
            D(j, i) = (i == j) ? diag : -alpha * scale * sign0(q[j] * q[i]);
        }
    }
    return D;
}

Matrix newton_derivative(ConstVectorRef q, const PenaltyParams& params) {
    return newton_derivative_from_prox(q, prox_gstar(q, params), params);
}

} // namespace switching
