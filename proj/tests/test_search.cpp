#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "tucker/errors.hpp"
#include "tucker/generate.hpp"
#include "tucker/search.hpp"
#include "tucker/verify.hpp"

using namespace tucker;
using namespace tucker::testing;

TEST(Schedule, TableFormulas) {
    const Thresholds th = Thresholds::from_tau(0.5, 2, 3.0, 1e-48, 1.0);
    EXPECT_DOUBLE_EQ(th.lambda, 1.0 / 256.0);
    EXPECT_NEAR(th.gamma, 0.1, 1e-15);
    EXPECT_NEAR(th.sigma, std::sqrt(0.1), 1e-15);
    EXPECT_NEAR(th.kappa0, std::sqrt(0.1), 1e-15);
    EXPECT_NEAR(th.kappa1, 6.0 * std::pow(th.sigma, 0.75), 1e-14);
    EXPECT_NEAR(th.kappa2, 6.0 * std::pow(th.sigma, 0.125), 1e-14);
    EXPECT_NEAR(th.kappa3, 6.0 * std::pow(th.sigma, 0.5), 1e-14);
    EXPECT_NEAR(th.tau1, 4.0 * th.lambda * 1e-48 / 3.0, 1e-62);
    EXPECT_NEAR(th.tau2, std::pow(th.sigma, 3.75), 1e-15);
    EXPECT_TRUE(th.consistent);
}

TEST(Schedule, InfeasibleAtDeskScaleAdvisesPracticalMode) {
    try {
        schedule(1e-3, 2, 8, 1.0);
        FAIL() << "expected ScheduleError";
    } catch (const ScheduleError& e) {
        EXPECT_NE(std::string(e.what()).find("practical"), std::string::npos);
    }
    EXPECT_THROW(schedule(1.5, 2, 8, 1.0), std::invalid_argument);
    EXPECT_THROW(schedule(0.0, 2, 8, 1.0), std::invalid_argument);
}

TEST(Schedule, FeasibilityIsMonotoneInTau) {
    // Feasible tau values form a down-set: smaller epsilon needs a smaller tau.
    const double big = 1e-200, small = 1e-300;
    const Thresholds a = Thresholds::from_tau(0.9, 1, 1e-30, big);
    const Thresholds b = Thresholds::from_tau(0.9, 1, 1e-30, small);
    EXPECT_LT(b.tau1, a.tau1);
    EXPECT_LT(b.tau2, a.tau2);
    if (a.feasible(2)) {
        EXPECT_TRUE(b.feasible(2));
    }
}

TEST(NegativeCurvature, ToySaddle) {
    // r = d = 1, lambda = 0: f = (s a b c - 1)^2 at (1, 1, 0, 0); the Hessian
    // restricted to (b, c) is [[0, -2], [-2, 0]], eigenvalue -2 along (1, 1)/sqrt 2.
    FactorPoint p = FactorPoint::zeros(1, 1);
    p.S(0, 0, 0) = 1.0;
    p.A(0, 0) = 1.0;
    Tensor3 t({1, 1, 1});
    t(0, 0, 0) = 1.0;
    Rng rng(1);
    const CurvatureProbe probe = negative_curvature_direction(p, t, 0.0, 1e-4, 200, rng);
    ASSERT_TRUE(probe.direction.has_value());
    const double q = inner(hvp(p, *probe.direction, t, 0.0), *probe.direction);
    EXPECT_LE(q, -0.5e-4);
    // with enough iterations the estimate approaches the analytic value
    Rng rng2(2);
    const CurvatureProbe deep = negative_curvature_direction(p, t, 0.0, 3.9, 400, rng2);
    ASSERT_TRUE(deep.direction.has_value());
    EXPECT_NEAR(deep.min_curvature, -2.0, 0.2);
}

TEST(NegativeCurvature, NoneAtGlobalMinimum) {
    Rng rng(3);
    const FactorPoint gt = FactorPoint::random_normal(2, 3, 1.0, rng);
    const Tensor3 t = reconstruct(gt);
    const FactorPoint p = hosvd(t, 2);
    // HOSVD is exact but not balanced; use lambda = 0 so it is a global minimum.
    Rng probe_rng(4);
    const CurvatureProbe probe = negative_curvature_direction(p, t, 0.0, 1e-4, 50, probe_rng);
    EXPECT_FALSE(probe.direction.has_value());
}

TEST(FindSosp, OriginIsReturnedUnchanged) {
    Rng rng(5);
    const Tensor3 t = random_unit_tensor(4, rng);
    const FactorPoint p0 = FactorPoint::zeros(2, 4);
    Rng search(6);
    const SospResult res = find_sosp(p0, t, default_lambda(2), SospOptions{}, search);
    EXPECT_EQ(res.point, p0);
    EXPECT_TRUE(res.is_sosp);
    EXPECT_LE(std::abs(*res.min_curvature), 1e-8);
}

TEST(FindSosp, EscapesOneMissingSaddle) {
    const verify::GalleryPoint g = verify::one_missing_point();
    const double lambda = default_lambda(2);
    const double f0 = objective_f(g.point, g.T, lambda).f;
    Rng rng(7);
    SospOptions opts;
    opts.budget = 2000;
    const SospResult res = find_sosp(g.point, g.T, lambda, opts, rng);
    ASSERT_FALSE(res.steps.empty());
    EXPECT_EQ(res.steps.front().step_kind, "negative-curvature");
    EXPECT_LT(res.report.f, f0);
}

TEST(FindSosp, ConvergesToStationaryPoint) {
    Rng rng(8);
    const Tensor3 t = random_unit_tensor(3, rng);
    Rng search(9);
    SospOptions opts;
    opts.budget = 20000;
    const SospResult res = find_sosp(FactorPoint::random_normal(2, 3, 0.5, rng), t, default_lambda(2), opts, search);
    for (std::size_t i = 1; i < res.steps.size(); ++i) EXPECT_LE(res.steps[i].f, res.steps[i - 1].f);
    if (res.is_sosp) {
        EXPECT_LE(res.grad_norm, opts.tau1);
    }
}

TEST(Run, ZeroTensorTerminatesImmediately) {
    const RunResult res = run(Tensor3({3, 3, 3}), FactorPoint::zeros(2, 3), SearchConfig{});
    EXPECT_EQ(res.status, RunStatus::Converged);
    EXPECT_EQ(res.report.f, 0.0);
    EXPECT_TRUE(res.trace.records.empty());
}

TEST(Run, ExactInstanceConverges) {
    const GeneratedTensor g = generate_exact(2, 6, 11);
    SearchConfig cfg;
    cfg.seed = 3;
    const RunResult res = run(g.T, FactorPoint::zeros(2, 6), cfg);
    EXPECT_EQ(res.status, RunStatus::Converged);
    EXPECT_LE(res.report.f, cfg.epsilon);
    EXPECT_GE(res.escapes, 1);
}

TEST(Run, TraceInvariants) {
    const GeneratedTensor g = generate_exact(2, 5, 12);
    SearchConfig cfg;
    cfg.seed = 4;
    const RunResult res = run(g.T, FactorPoint::zeros(2, 5), cfg);
    double prev = objective_f(FactorPoint::zeros(2, 5), g.T, default_lambda(2)).f;
    int sampled = 0;
    for (const TraceRecord& rec : res.trace.records) {
        EXPECT_LE(rec.f, prev);
        EXPECT_NEAR(prev - rec.f, rec.improvement, 1e-12);
        if (rec.step_kind.rfind("sampled", 0) == 0) {
            ++sampled;
            ASSERT_TRUE(rec.predicted_f.has_value());
            EXPECT_NEAR(*rec.predicted_f, rec.f, 1e-10);
        }
        prev = rec.f;
    }
    EXPECT_GE(sampled, 1);
}

TEST(Run, Reproducible) {
    const GeneratedTensor g = generate_exact(2, 5, 13);
    SearchConfig cfg;
    cfg.seed = 5;
    const RunResult a = run(g.T, FactorPoint::zeros(2, 5), cfg);
    const RunResult b = run(g.T, FactorPoint::zeros(2, 5), cfg);
    EXPECT_EQ(a.point, b.point);
    ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
    for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
        EXPECT_EQ(a.trace.records[i].f, b.trace.records[i].f);
        EXPECT_EQ(a.trace.records[i].seed, b.trace.records[i].seed);
        EXPECT_EQ(a.trace.records[i].step_kind, b.trace.records[i].step_kind);
    }
}

TEST(Run, HosvdStartNeverIncreasesObjective) {
    const GeneratedTensor g = generate_exact(2, 5, 14);
    const FactorPoint p0 = hosvd(g.T, 2);
    SearchConfig cfg;
    cfg.epsilon = 1e-12;
    cfg.budget = 3000;
    const RunResult res = run(g.T, p0, cfg);
    double prev = objective_f(p0, g.T, default_lambda(2)).f;
    for (const TraceRecord& rec : res.trace.records) {
        EXPECT_LE(rec.f, prev);
        prev = rec.f;
    }
    EXPECT_LT(res.report.R, objective_f(p0, g.T, default_lambda(2)).R);
}

TEST(Run, TheoryModeReportsScheduleError) {
    const GeneratedTensor g = generate_exact(2, 4, 15);
    SearchConfig cfg;
    cfg.mode = SearchMode::Theory;
    EXPECT_THROW(run(g.T, FactorPoint::zeros(2, 4), cfg), ScheduleError);
}

TEST(Run, RejectsBadInput) {
    SearchConfig cfg;
    EXPECT_THROW(run(Tensor3({3, 3, 3}), FactorPoint::zeros(2, 4), cfg), DimensionError);
    cfg.epsilon = -1.0;
    EXPECT_THROW(run(Tensor3({3, 3, 3}), FactorPoint::zeros(2, 3), cfg), std::invalid_argument);
    Tensor3 bad({3, 3, 3});
    bad(0, 0, 0) = std::nan("");
    EXPECT_THROW(run(bad, FactorPoint::zeros(2, 3), SearchConfig{}), NonFiniteError);
}

TEST(Run, SamplesPerBlockDefault) {
    SearchConfig cfg;
    cfg.epsilon = 1e-3;
    EXPECT_EQ(cfg.resolved_samples_per_block(), static_cast<int>(std::ceil(8.0 * std::log(1e3))));
    cfg.samples_per_block = 3;
    EXPECT_EQ(cfg.resolved_samples_per_block(), 3);
}

TEST(Run, StatusNames) {
    EXPECT_EQ(to_string(RunStatus::NoDirection), "no-direction");
    EXPECT_EQ(to_string(SearchMode::Theory), "theory");
}
