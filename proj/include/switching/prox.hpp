#pragma once

#include <Eigen/Dense>
#include <vector>

namespace switching {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ConstVectorRef = Eigen::Ref<const Vector>;

/// Weights of the squared-l1 switching penalty g(v) = (alpha/2)|v|_1^2 and of
/// its Moreau-Yosida regularization.
struct PenaltyParams {
    double alpha = 1.0;
    double gamma = 1.0;

    /// Throws std::invalid_argument unless alpha > 0 and gamma > 0.
    void validate() const;
};

/// Proximal point of gamma*g^* at q.
///
/// Components listed in `active_set` (decreasing magnitude of q, ties by
/// index) are clamped to a common magnitude; every other component is passed
/// through unchanged. `d == active_set.size()`.
struct ProxResult {
    Vector w;
    int d = 0;
    std::vector<int> active_set;
};

/// sign with sign(0) = 0.
inline double sign0(double x) { return (x > 0.0) - (x < 0.0); }

/// (alpha/2)(sum |v_i|)^2
double g_value(ConstVectorRef v, double alpha);

/// Fenchel conjugate of g: (1/(2 alpha)) max_i |q_i|^2.
double gstar_value(ConstVectorRef q, double alpha);

/// Membership test u in dg^*(q), componentwise and within `tol`.
///
/// Non-maximal components of q must carry u_j = 0. On the maximal set A the
/// weights s_j = alpha u_j / q_j are fitted by least squares and must be
/// nonnegative and sum to one. Throws std::invalid_argument on size mismatch.
bool subdiff_contains(ConstVectorRef q, ConstVectorRef u, double alpha, double tol);

/// prox_{gamma g^*}(q), O(N log N).
ProxResult prox_gstar(ConstVectorRef q, const PenaltyParams& params);

/// Regularized subdifferential h_gamma(q) = (q - prox_{gamma g^*}(q)) / gamma.
Vector hgamma(ConstVectorRef q, const PenaltyParams& params);

/// Same as hgamma() but reuses an already computed prox.
Vector hgamma_from_prox(ConstVectorRef q, const ProxResult& prox, const PenaltyParams& params);

/// Newton derivative (Clarke selection) of h_gamma at q; symmetric N x N.
Matrix newton_derivative(ConstVectorRef q, const PenaltyParams& params);

/// Same as newton_derivative() but reuses an already computed prox.
Matrix newton_derivative_from_prox(ConstVectorRef q, const ProxResult& prox,
                                   const PenaltyParams& params);

} // namespace switching
