#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "test_util.hpp"
#include "tucker/errors.hpp"
#include "tucker/escape.hpp"
#include "tucker/objective.hpp"
#include "tucker/verify.hpp"

using namespace tucker;
using namespace tucker::testing;

TEST(Escape, SevenBlocks) {
    const auto& blocks = escape_blocks();
    ASSERT_EQ(blocks.size(), 7u);
    std::set<BlockIndex> seen(blocks.begin(), blocks.end());
    EXPECT_EQ(seen.size(), 7u);
    EXPECT_EQ(seen.count(BlockIndex{1, 1, 1}), 0u);
    EXPECT_EQ(blocks.front(), (BlockIndex{1, 1, 2}));
    EXPECT_EQ(blocks.back(), (BlockIndex{2, 2, 2}));
}

TEST(Escape, SamplerVectorsLieInSubspaces) {
    Rng rng(1);
    const Tensor3 t = random_unit_tensor(4, rng);
    FactorPoint p = FactorPoint::zeros(2, 4);
    p.A(0, 0) = 1.0;
    p.A(1, 1) = 0.5;
    p.B(0, 2) = 2.0;
    p.C(0, 1) = 1.0;
    p.C(1, 3) = 1.0;
    const SubspaceSplit s = split_point(p, t, 0.1);
    Rng sampler(2);
    const SampledVectors v = sample_missing_directions(s, {1, 2, 1}, sampler);
    EXPECT_NEAR(v.a.norm(), 1.0, 1e-12);
    EXPECT_NEAR(v.u.norm(), 1.0, 1e-12);
    EXPECT_NEAR(v.b.norm(), 1.0, 1e-12);
    EXPECT_NEAR(v.v.norm(), 1.0, 1e-12);
    const MatrixSplit& a = s.mode(1).parts;
    const MatrixSplit& b = s.mode(2).parts;
    EXPECT_LE((projector(a.U1, 4) * v.a - v.a).norm(), 1e-12);
    EXPECT_LE((projector(b.U2, 4) * v.b - v.b).norm(), 1e-12);
    EXPECT_LE((projector(b.V2, 2) * v.v - v.v).norm(), 1e-12);
    // index-1 modes satisfy M1^T u = alpha a
    EXPECT_LE((a.M1.transpose() * v.u - v.alpha[0] * v.a).norm(), 1e-12);
    EXPECT_EQ(v.alpha[1], 0.0);
}

TEST(Escape, SamplerThrowsOnTrivialSubspace) {
    Rng rng(3);
    const Tensor3 t = random_unit_tensor(3, rng);
    const SubspaceSplit zero = split_point(FactorPoint::zeros(2, 3), t, 0.1);
    Rng sampler(4);
    EXPECT_THROW(sample_missing_directions(zero, {1, 2, 2}, sampler), NoMissingDirection);
    // full-rank factors have no missing direction
    const SubspaceSplit full = split_point(FactorPoint::random_normal(3, 3, 1.0, rng), t, 1e-6);
    EXPECT_THROW(sample_missing_directions(full, {2, 2, 2}, sampler), NoMissingDirection);
}

TEST(Escape, BuildDirectionScales) {
    SampledVectors v;
    v.a = v.b = v.c = Vector::Unit(3, 1);
    v.u = v.v = v.w = Vector::Unit(2, 1);
    v.ijk = {2, 1, 1};
    const ImprovementDirection one = build_sampled_direction(v, 0.01);
    EXPECT_NEAR(one.delta.A(1, 1), 0.01, 1e-15);
    EXPECT_EQ(one.delta.B.norm(), 0.0);
    EXPECT_EQ(one.delta.S(1, 1, 1), 1.0);
    EXPECT_EQ(one.label(), "sampled(2,1,1)");
    v.ijk = {2, 2, 2};
    const ImprovementDirection three = build_sampled_direction(v, 0.01);
    EXPECT_EQ(three.delta.C(1, 1), 1.0);
    v.ijk = {1, 1, 1};
    EXPECT_THROW(build_sampled_direction(v, 0.01), std::invalid_argument);
    v.ijk = {2, 2, 2};
    v.w = Vector::Unit(3, 1);
    EXPECT_THROW(build_sampled_direction(v, 0.01), DimensionError);
}

TEST(Escape, OriginSamplerImproves) {
    Rng rng(5);
    const Tensor3 t = random_unit_tensor(4, rng);
    const FactorPoint p = FactorPoint::zeros(2, 4);
    const double lambda = default_lambda(2);
    const SubspaceSplit s = split_point(p, t, 1e-2);
    const std::vector<double> grid = delta_grid(delta_center({2, 2, 2}, 1e-2));
    Rng sampler(6);
    const ImprovementDirection dir = build_sampled_direction(sample_missing_directions(s, {2, 2, 2}, sampler), 1e-2);
    const SignSearchResult res = sign_flip_search(p, t, lambda, dir, grid);
    EXPECT_GT(res.improvement, 0.0);
    const double realized = objective_f(axpy(p, res.step, res.direction.delta), t, lambda).f;
    EXPECT_NEAR(realized, res.f_after, 1e-15);
    EXPECT_NEAR(res.f_before - res.f_after, res.improvement, 1e-15);
    // the regularizer stays at zero along the sampled direction
    EXPECT_LE(objective_f(axpy(p, res.step, res.direction.delta), t, lambda).R, 1e-30);
}

TEST(Escape, SignSearchNeverWorsens) {
    Rng rng(7);
    const Tensor3 t = random_unit_tensor(3, rng);
    const FactorPoint p = FactorPoint::random_normal(2, 3, 0.5, rng);
    ImprovementDirection dir;
    dir.delta = FactorPoint::random_normal(2, 3, 1.0, rng);
    const SignSearchResult res = sign_flip_search(p, t, 0.1, dir, delta_grid(0.1));
    EXPECT_GE(res.improvement, 0.0);
    EXPECT_LE(res.f_after, res.f_before);
    EXPECT_EQ(res.evaluations, 16 * 13);
}

TEST(Escape, SignSearchSkipsZeroBlocks) {
    Rng rng(8);
    const Tensor3 t = random_unit_tensor(3, rng);
    const FactorPoint p = FactorPoint::random_normal(2, 3, 0.5, rng);
    ImprovementDirection dir;
    dir.delta = FactorPoint::zeros(2, 3);
    dir.delta.A = random_matrix(2, 3, rng);
    EXPECT_EQ(sign_flip_search(p, t, 0.1, dir, {0.1}).evaluations, 2);
}

TEST(Escape, DeltaGrid) {
    const std::vector<double> g = delta_grid(1.0, 5, 2.0);
    ASSERT_EQ(g.size(), 5u);
    EXPECT_NEAR(g.front(), 1e-2, 1e-16);
    EXPECT_NEAR(g[2], 1.0, 1e-15);
    EXPECT_NEAR(g.back(), 1e2, 1e-12);
    EXPECT_THROW(delta_grid(0.0), std::invalid_argument);
    EXPECT_NEAR(delta_center({2, 2, 2}, 1e-8), 1e-1, 1e-15);
    EXPECT_NEAR(delta_center({1, 2, 2}, 1e-8), 1e-2, 1e-16);
}

TEST(Escape, RemoveExtraneousImproves) {
    // Exact solution plus a component outside the true span in mode 1.
    Rng rng(9);
    const FactorPoint gt = FactorPoint::random_normal(2, 4, 1.0, rng);
    const Tensor3 t = reconstruct(gt);
    FactorPoint p = hosvd(t, 2);
    const SubspaceSplit s0 = split_point(p, t, 1e-2);
    EXPECT_THROW(remove_extraneous_direction(p, s0, 1), NoDirection);
    const Matrix outside = Matrix::Identity(4, 4) - s0.mode(1).P;
    p.A += 0.3 * random_matrix(2, 4, rng) * outside;
    const SubspaceSplit s = split_point(p, t, 1e-2);
    const ImprovementDirection dir = remove_extraneous_direction(p, s, 1);
    EXPECT_EQ(dir.label(), "remove-extraneous(1)");
    const FactorPoint q = axpy(p, 1.0, dir.delta);
    EXPECT_LE((q.A * outside).norm(), 1e-12);
    EXPECT_LT(loss_L(q, t), loss_L(p, t));
}

TEST(Escape, CoreFixRestoresExactCore) {
    Rng rng(10);
    const FactorPoint gt = FactorPoint::random_normal(2, 4, 1.0, rng);
    const Tensor3 t = reconstruct(gt);
    FactorPoint p = gt;
    p.S += Tensor3::random_normal({2, 2, 2}, rng);
    const SubspaceSplit s = split_point(p, t, 1e-6);
    const ImprovementDirection dir = core_fix_direction(p, t, s);
    EXPECT_EQ(dir.kind, DirectionKind::CoreFix);
    EXPECT_LE(loss_L(axpy(p, 1.0, dir.delta), t), 1e-18 + 1e-20);
    const SubspaceSplit empty = split_point(FactorPoint::zeros(2, 4), t, 1e-2);
    EXPECT_THROW(core_fix_direction(FactorPoint::zeros(2, 4), t, empty), NoDirection);
}

TEST(Escape, PseudoinverseProperties) {
    Rng rng(11);
    const Matrix m = random_matrix(2, 4, rng);
    const Matrix pi = pseudoinverse(m);
    EXPECT_LE((m * pi * m - m).norm(), 1e-12);
    EXPECT_LE((pi * m * pi - pi).norm(), 1e-12);
    EXPECT_EQ(pseudoinverse(Matrix::Zero(2, 3)).norm(), 0.0);
}

TEST(Escape, OneMissingGalleryPointHasNegativeCurvature) {
    const verify::GalleryPoint g = verify::one_missing_point();
    const double lambda = default_lambda(2);
    EXPECT_EQ(norm_f(grad_f(g.point, g.T, lambda)), 0.0);
    FactorPoint dir = g.direction;
    dir *= 1.0 / norm_f(dir);
    EXPECT_LT(inner(hvp(g.point, dir, g.T, lambda), dir), -0.1);
}
