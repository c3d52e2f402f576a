#include "switching/oracle.hpp"
#include "switching/prox.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace switching;
using switching::testing::random_vector;

namespace {

Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    std::copy(values.begin(), values.end(), v.data());
    return v;
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

} // namespace

TEST(Penalty, GValue) {
    EXPECT_DOUBLE_EQ(g_value(vec({0, 0, 0}), 1.0), 0.0);
    EXPECT_DOUBLE_EQ(g_value(vec({1, -1}), 2.0), 4.0);
    EXPECT_DOUBLE_EQ(g_value(vec({3}), 1.0), 4.5);
}

TEST(Penalty, GStarValue) {
    EXPECT_DOUBLE_EQ(gstar_value(vec({0, 0}), 1.0), 0.0);
    EXPECT_DOUBLE_EQ(gstar_value(vec({3, 4}), 1.0), 8.0);
    EXPECT_DOUBLE_EQ(gstar_value(vec({-5, 2, 5}), 2.0), 6.25);
}

TEST(Penalty, ParamsValidate) {
    EXPECT_THROW((PenaltyParams{0.0, 1.0}.validate()), std::invalid_argument);
    EXPECT_THROW((PenaltyParams{1.0, -1.0}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((PenaltyParams{1.0, 1e-12}.validate()));
}

TEST(SubdiffContains, Examples) {
    EXPECT_TRUE(subdiff_contains(vec({2, 1}), vec({2, 0}), 1.0, 1e-12));
    EXPECT_TRUE(subdiff_contains(vec({2, 2}), vec({1, 1}), 1.0, 1e-12));
    EXPECT_FALSE(subdiff_contains(vec({2, 1}), vec({0, 1}), 1.0, 1e-12));
}

TEST(SubdiffContains, TieWeightsAndSigns) {
    // s = (1/4, 3/4) on a tie with mixed signs.
    EXPECT_TRUE(subdiff_contains(vec({-2, 2, 1}), vec({-0.5, 1.5, 0}), 1.0, 1e-12));
    // negative weight
    EXPECT_FALSE(subdiff_contains(vec({2, 2}), vec({-1, 3}), 1.0, 1e-12));
    // weights not summing to one
    EXPECT_FALSE(subdiff_contains(vec({2, 2}), vec({1, 2}), 1.0, 1e-12));
    // wrong sign on the unique maximizer
    EXPECT_FALSE(subdiff_contains(vec({2, 1}), vec({-2, 0}), 1.0, 1e-12));
    EXPECT_TRUE(subdiff_contains(vec({0, 0}), vec({0, 0}), 1.0, 0.0));
    EXPECT_FALSE(subdiff_contains(vec({0, 0}), vec({1, 0}), 1.0, 1e-12));
    EXPECT_THROW(subdiff_contains(vec({0, 0}), vec({0}), 1.0, 0.0), std::invalid_argument);
}

TEST(SubdiffContains, ToleranceIsRespected) {
    EXPECT_TRUE(subdiff_contains(vec({2, 1}), vec({2 + 1e-9, 1e-9}), 1.0, 1e-8));
    EXPECT_FALSE(subdiff_contains(vec({2, 1}), vec({2 + 1e-6, 0}), 1.0, 1e-8));
}

TEST(ProxGstar, Examples) {
    const PenaltyParams unit{1.0, 1.0};

    const auto zero = prox_gstar(Vector::Zero(4), unit);
    EXPECT_EQ(zero.d, 4);
    EXPECT_TRUE(zero.w.isZero(0.0));

    const auto a = prox_gstar(vec({3, 1}), unit);
    EXPECT_EQ(a.d, 1);
    EXPECT_NEAR(a.w[0], 1.5, 1e-15);
    EXPECT_NEAR(a.w[1], 1.0, 1e-15);
    EXPECT_EQ(a.active_set, std::vector<int>({0}));

    const auto b = prox_gstar(vec({2, 2}), unit);
    EXPECT_EQ(b.d, 2);
    EXPECT_NEAR(b.w[0], 4.0 / 3.0, 1e-15);
    EXPECT_NEAR(b.w[1], 4.0 / 3.0, 1e-15);

    const auto c = prox_gstar(vec({-3, 1}), unit);
    EXPECT_EQ(c.d, 1);
    EXPECT_NEAR(c.w[0], -1.5, 1e-15);
    EXPECT_NEAR(c.w[1], 1.0, 1e-15);
}

TEST(ProxGstar, EmptyInput) {
    const auto r = prox_gstar(Vector(0), PenaltyParams{});
    EXPECT_EQ(r.d, 0);
    EXPECT_EQ(r.w.size(), 0);
}

TEST(Hgamma, Examples) {
    const PenaltyParams unit{1.0, 1.0};
    const Vector a = hgamma(vec({3, 1}), unit);
    EXPECT_NEAR(a[0], 1.5, 1e-15);
    EXPECT_EQ(a[1], 0.0);
    const Vector b = hgamma(vec({2, 2}), unit);
    EXPECT_NEAR(b[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(b[1], 2.0 / 3.0, 1e-15);
    EXPECT_TRUE(hgamma(vec({0, 0}), unit).isZero(0.0));
}

TEST(Hgamma, UniqueMaximumIsPerfectlySwitching) {
    const PenaltyParams params{0.1, 1e-9};
    const Vector q = vec({0.3, -0.29999, 0.1});
    const Vector u = hgamma(q, params);
    EXPECT_NEAR(u[0], q[0] / (params.alpha + params.gamma), 1e-15);
    EXPECT_EQ(u[1], 0.0);
    EXPECT_EQ(u[2], 0.0);
}

TEST(Hgamma, AccurateForSmallGamma) {
    // On a near tie the result is dominated by the spread divided by gamma;
    // compare with the textbook formula evaluated in quad precision.
    const PenaltyParams params{0.1, 1e-12};
    const Vector q = vec({-0.00308583, 0.0030858300000004});
    const Vector u = hgamma(q, params);
    using quad = __float128;
    const quad a = params.alpha, g = params.gamma;
    const quad q0 = q[0], q1 = q[1];
    const quad level = a * (-q0 + q1) / (2 * a + g);
    const double u0 = static_cast<double>((q0 + level) / g);
    const double u1 = static_cast<double>((q1 - level) / g);
    EXPECT_NEAR(u[0], u0, 1e-10 * std::abs(u0));
    EXPECT_NEAR(u[1], u1, 1e-10 * std::abs(u1));
}

TEST(NewtonDerivative, Examples) {
    const PenaltyParams unit{1.0, 1.0};
    const Matrix a = newton_derivative(vec({3, 1}), unit);
    EXPECT_NEAR(a(0, 0), 0.5, 1e-15);
    EXPECT_EQ(a(0, 1), 0.0);
    EXPECT_EQ(a(1, 0), 0.0);
    EXPECT_EQ(a(1, 1), 0.0);

    const Matrix b = newton_derivative(vec({2, 2}), unit);
    EXPECT_NEAR(b(0, 0), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(b(0, 1), -1.0 / 3.0, 1e-15);
    EXPECT_NEAR(b(1, 0), -1.0 / 3.0, 1e-15);
    EXPECT_NEAR(b(1, 1), 2.0 / 3.0, 1e-15);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(b);
    EXPECT_NEAR(eig.eigenvalues()[0], 1.0 / 3.0, 1e-14);
    EXPECT_NEAR(eig.eigenvalues()[1], 1.0, 1e-14);

    const PenaltyParams params{0.5, 0.25};
    const Matrix c = newton_derivative(vec({0.1, -4.0, 0.2, 0.3}), params);
    Matrix expected = Matrix::Zero(4, 4);
    expected(1, 1) = 1.0 / (params.alpha + params.gamma);
    EXPECT_TRUE(c.isApprox(expected, 1e-15));
}

TEST(NewtonDerivative, OppositeSignsFlipCoupling) {
    const Matrix D = newton_derivative(vec({2, -2}), PenaltyParams{1.0, 1.0});
    EXPECT_NEAR(D(0, 1), 1.0 / 3.0, 1e-15);
}

class ProxRandom : public ::testing::Test {
protected:
    std::mt19937_64 rng{20240611};

    struct Sample {
        Vector q;
        PenaltyParams params;
    };

    Sample draw(int max_n = 8) {
        std::uniform_int_distribution<int> dim(1, max_n);
        Sample s;
        s.q = random_vector(dim(rng), rng, log_uniform(rng, 1e-2, 1e2));
        s.params = {log_uniform(rng, 1e-6, 1e2), log_uniform(rng, 1e-6, 1e2)};
        return s;
    }
};

TEST_F(ProxRandom, ResolventIdentity) {
    for (int trial = 0; trial < 5000; ++trial) {
        const auto [q, params] = draw();
        const Vector w = prox_gstar(q, params).w;
        const Vector u = hgamma(q, params);
        const double scale = q.lpNorm<Eigen::Infinity>();
        EXPECT_LE((w + params.gamma * u - q).lpNorm<Eigen::Infinity>(), 1e-14 * scale);
    }
}

TEST_F(ProxRandom, MatchesOracle) {
    for (int trial = 0; trial < 2000; ++trial) {
        const auto [q, params] = draw();
        const Vector w = prox_gstar(q, params).w;
        const Vector ref = oracle::prox_oracle(q, params);
        ASSERT_LE((w - ref).lpNorm<Eigen::Infinity>(), 1e-6)
            << "q = " << q.transpose() << " alpha = " << params.alpha << " gamma = " << params.gamma;
    }
}

TEST_F(ProxRandom, FirmlyNonexpansive) {
    for (int trial = 0; trial < 2000; ++trial) {
        const auto [q1, params] = draw();
        const Vector q2 = q1 + random_vector(q1.size(), rng, q1.norm() + 1e-3);
        const Vector w1 = prox_gstar(q1, params).w;
        const Vector w2 = prox_gstar(q2, params).w;
        const double dw = (w1 - w2).squaredNorm();
        EXPECT_LE((w1 - w2).norm(), (q1 - q2).norm() * (1 + 1e-12));
        // firm: |Pq1 - Pq2|^2 <= <Pq1 - Pq2, q1 - q2>
        EXPECT_LE(dw, (w1 - w2).dot(q1 - q2) + 1e-12 * (q1 - q2).squaredNorm());
    }
}

TEST_F(ProxRandom, PermutationAndSignEquivariance) {
    for (int trial = 0; trial < 500; ++trial) {
        const auto [q, params] = draw();
        std::vector<int> perm(q.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Vector pq(q.size()), flips(q.size());
        std::bernoulli_distribution coin;
        for (Eigen::Index i = 0; i < q.size(); ++i) {
            flips[i] = coin(rng) ? -1.0 : 1.0;
            pq[i] = flips[i] * q[perm[i]];
        }
        const Vector w = prox_gstar(q, params).w;
        const Vector pw = prox_gstar(pq, params).w;
        for (Eigen::Index i = 0; i < q.size(); ++i)
            EXPECT_NEAR(pw[i], flips[i] * w[perm[i]], 1e-14 * q.lpNorm<Eigen::Infinity>());
    }
}

TEST_F(ProxRandom, DerivativeMatchesFiniteDifferences) {
    int checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const auto [q, params] = draw(6);
        const auto prox = prox_gstar(q, params);
        const Matrix D = newton_derivative(q, params);
        const double h = 1e-6 * q.lpNorm<Eigen::Infinity>();
        bool smooth = true;
        Matrix fd(q.size(), q.size());
        for (Eigen::Index i = 0; i < q.size() && smooth; ++i) {
            Vector qp = q, qm = q;
            qp[i] += h;
            qm[i] -= h;
            smooth = prox_gstar(qp, params).active_set == prox.active_set &&
                     prox_gstar(qm, params).active_set == prox.active_set;
            fd.col(i) = (hgamma(qp, params) - hgamma(qm, params)) / (2 * h);
        }
        if (!smooth)
            continue;
        ++checked;
        EXPECT_LE((fd - D).lpNorm<Eigen::Infinity>(), 1e-5 * std::max(1.0, D.lpNorm<Eigen::Infinity>()));
        EXPECT_TRUE((D - D.transpose()).isZero(0.0));
        EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(D).eigenvalues().minCoeff(),
                  -1e-12 * D.lpNorm<Eigen::Infinity>());
    }
    EXPECT_GT(checked, 300);
}

TEST_F(ProxRandom, DerivativeMatchesOracle) {
    for (int trial = 0; trial < 500; ++trial) {
        const auto [q, params] = draw(6);
        const Matrix D = newton_derivative(q, params);
        const Matrix ref = oracle::derivative_oracle(q, params);
        EXPECT_LE((D - ref).lpNorm<Eigen::Infinity>(), 1e-9 * std::max(1.0, ref.lpNorm<Eigen::Infinity>()));
    }
}

TEST_F(ProxRandom, HgammaLiesInSubdifferentialAtProx) {
    for (int trial = 0; trial < 2000; ++trial) {
        const auto [q, params] = draw();
        const Vector w = prox_gstar(q, params).w;
        const Vector u = hgamma(q, params);
        EXPECT_TRUE(subdiff_contains(w, u, params.alpha, 1e-9 * q.lpNorm<Eigen::Infinity>()))
            << "q = " << q.transpose();
    }
}

TEST_F(ProxRandom, ClampedCountShrinksWithGamma) {
    for (int trial = 0; trial < 500; ++trial) {
        auto [q, params] = draw();
        int previous = prox_gstar(q, params).d;
        for (int k = 0; k < 12; ++k) {
            params.gamma /= 10.0;
            const int d = prox_gstar(q, params).d;
            EXPECT_LE(d, previous);
            previous = d;
        }
    }
}
