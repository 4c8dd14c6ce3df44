#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "tucker/errors.hpp"
#include "tucker/objective.hpp"

using namespace tucker;
using namespace tucker::testing;

namespace {

struct Case {
    FactorPoint p;
    Tensor3 t;
};

Case random_case(std::uint64_t seed, std::size_t r = 2, std::size_t d = 4, double scale = 1.0) {
    Rng rng(seed);
    Tensor3 t = random_unit_tensor(d, rng);
    return {FactorPoint::random_normal(r, d, scale, rng), std::move(t)};
}

}  // namespace

TEST(Objective, DefaultLambda) {
    EXPECT_DOUBLE_EQ(default_lambda(1), 1.0 / 16.0);
    EXPECT_DOUBLE_EQ(default_lambda(2), 1.0 / 256.0);
}

TEST(Objective, LossAndPhiMatchOracles) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Case c = random_case(seed, 1 + seed % 3, 3 + seed % 2);
        EXPECT_NEAR(loss_L(c.p, c.t), naive_loss(c.p, c.t), 1e-10 * (1 + naive_loss(c.p, c.t)));
        EXPECT_NEAR(reg_phi(c.p), naive_phi(c.p), 1e-10 * (1 + naive_phi(c.p)));
    }
}

TEST(Objective, ReportComposition) {
    const Case c = random_case(11);
    const ObjectiveReport rep = objective_f(c.p, c.t, 0.5);
    EXPECT_DOUBLE_EQ(rep.R, rep.phi * rep.phi);
    EXPECT_DOUBLE_EQ(rep.f, rep.L + 0.5 * rep.R);
    EXPECT_THROW(objective_f(c.p, c.t, -1.0), std::invalid_argument);
}

TEST(Objective, ShapeMismatchThrows) {
    Rng rng(12);
    const FactorPoint p = FactorPoint::random_normal(2, 4, 1.0, rng);
    EXPECT_THROW(loss_L(p, Tensor3({3, 3, 3})), DimensionError);
}

TEST(Objective, ZeroPointValues) {
    Rng rng(13);
    const Tensor3 t = random_unit_tensor(3, rng);
    const ObjectiveReport rep = objective_f(FactorPoint::zeros(2, 3), t, default_lambda(2));
    EXPECT_NEAR(rep.L, 1.0, 1e-14);
    EXPECT_EQ(rep.R, 0.0);
}

TEST(Objective, GradientMatchesFiniteDifferences) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Case c = random_case(100 + seed, 2, 4);
        const double lambda = default_lambda(2);
        const FactorPoint g = grad_f(c.p, c.t, lambda);
        const FactorPoint fd =
            finite_difference_gradient(c.p, [&](const FactorPoint& q) { return objective_f(q, c.t, lambda).f; });
        EXPECT_LE(norm_f(g - fd), 1e-6 * norm_f(g));
    }
}

TEST(Objective, GradientPartsSeparately) {
    const Case c = random_case(200);
    const GradientParts parts = gradient_parts(c.p, c.t);
    const FactorPoint fd_L = finite_difference_gradient(c.p, [&](const FactorPoint& q) { return loss_L(q, c.t); });
    const FactorPoint fd_phi = finite_difference_gradient(c.p, [&](const FactorPoint& q) { return reg_phi(q); });
    EXPECT_LE(norm_f(parts.grad_L - fd_L), 1e-6 * norm_f(parts.grad_L));
    EXPECT_LE(norm_f(parts.grad_phi - fd_phi), 1e-6 * norm_f(parts.grad_phi));
    EXPECT_LE(norm_f(parts.grad_R() - (2.0 * parts.phi) * parts.grad_phi), 1e-12 * norm_f(parts.grad_R()));
}

TEST(Objective, GradientVanishesAtOrigin) {
    Rng rng(14);
    const Tensor3 t = random_unit_tensor(4, rng);
    EXPECT_EQ(norm_f(grad_f(FactorPoint::zeros(2, 4), t, default_lambda(2))), 0.0);
}

TEST(Objective, EulerIdentityForPhi) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Case c = random_case(300 + seed, 3, 5);
        const GradientParts g = gradient_parts(c.p, c.t);
        EXPECT_NEAR(inner(g.grad_phi, c.p), 4.0 * g.phi, 1e-9 * (1 + 4 * g.phi));
    }
}

TEST(Objective, GaugeInvarianceOfLoss) {
    const Case c = random_case(15, 2, 4);
    Rng rng(16);
    const Matrix q = random_matrix(2, 2, rng) + 3.0 * Matrix::Identity(2, 2);
    FactorPoint moved(multilinear_transform(c.p.S, q.inverse(), Matrix::Identity(2, 2), Matrix::Identity(2, 2)),
                      q * c.p.A, c.p.B, c.p.C);
    EXPECT_NEAR(loss_L(moved, c.t), loss_L(c.p, c.t), 1e-10);
}

TEST(Objective, HvpMatchesSecondDifferences) {
    const Case c = random_case(17, 2, 3, 0.7);
    const double lambda = default_lambda(2);
    Rng rng(18);
    FactorPoint dir = FactorPoint::random_normal(2, 3, 1.0, rng);
    const FactorPoint hv = hvp(c.p, dir, c.t, lambda);
    // <H v, v> against a second difference of f itself.
    const double h = 1e-4;
    const double f0 = objective_f(c.p, c.t, lambda).f;
    const double fp = objective_f(axpy(c.p, h, dir), c.t, lambda).f;
    const double fm = objective_f(axpy(c.p, -h, dir), c.t, lambda).f;
    const double second = (fp - 2 * f0 + fm) / (h * h);
    EXPECT_NEAR(inner(hv, dir), second, 1e-4 * std::abs(second) + 1e-6);
}

TEST(Objective, HvpIsSymmetric) {
    const Case c = random_case(19, 2, 3, 0.7);
    Rng rng(20);
    const FactorPoint u = FactorPoint::random_normal(2, 3, 1.0, rng);
    const FactorPoint v = FactorPoint::random_normal(2, 3, 1.0, rng);
    const double lambda = default_lambda(2);
    const double a = inner(hvp(c.p, u, c.t, lambda), v);
    const double b = inner(hvp(c.p, v, c.t, lambda), u);
    EXPECT_NEAR(a, b, 1e-6 * (std::abs(a) + 1));
}

TEST(Objective, HvpZeroDirectionThrows) {
    const Case c = random_case(21);
    EXPECT_THROW(hvp(c.p, FactorPoint::zeros(2, 4), c.t, 0.1), std::invalid_argument);
}

TEST(Objective, EvalAlongMatchesObjective) {
    const Case c = random_case(22);
    Rng rng(23);
    const FactorPoint dir = FactorPoint::random_normal(2, 4, 1.0, rng);
    const std::vector<double> steps{0.0, 0.1, -0.3};
    const auto vals = eval_along(c.p, dir, c.t, 0.2, steps);
    ASSERT_EQ(vals.size(), steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        EXPECT_EQ(vals[i].first, steps[i]);
        EXPECT_EQ(vals[i].second, objective_f(axpy(c.p, steps[i], dir), c.t, 0.2).f);
    }
}

TEST(Objective, RegularizerZeroOnBalancedPoint) {
    // Orthonormal factor rows with a core whose flattenings also have orthonormal rows.
    FactorPoint p = FactorPoint::zeros(2, 3);
    p.S(0, 0, 0) = 1.0;
    p.S(1, 1, 1) = 1.0;
    for (int m = 1; m <= 3; ++m) {
        p.factor(m)(0, 0) = 1.0;
        p.factor(m)(1, 2) = 1.0;
    }
    EXPECT_EQ(reg_phi(p), 0.0);
    for (int m = 1; m <= 3; ++m) EXPECT_EQ(gram_difference(p, m).norm(), 0.0);
}
