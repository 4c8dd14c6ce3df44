#include "tucker/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tucker/errors.hpp"
#include "tucker/subspace.hpp"

namespace tucker {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

FactorPoint random_unit_point(const FactorPoint& shape, Rng& rng) {
    FactorPoint v = FactorPoint::random_normal(shape.rank(), shape.dim(), 1.0, rng);
    v *= 1.0 / norm_f(v);
    return v;
}

void require_finite(const ObjectiveReport& rep, const char* where) {
    if (!std::isfinite(rep.f)) throw NonFiniteError(std::string("non-finite objective in ") + where);
}

}  // namespace

Thresholds Thresholds::from_tau(double epsilon, std::size_t r, double K, double tau, double c_gamma) {
    Thresholds th;
    th.epsilon = epsilon;
    th.lambda = default_lambda(r);
    th.K = K;
    th.tau = tau;
    th.c_gamma = c_gamma;
    th.gamma = c_gamma * std::pow(tau, 1.0 / 48.0);
    th.sigma = std::sqrt(th.gamma);
    th.kappa0 = std::sqrt(th.gamma);
    th.kappa1 = 2.0 * K * std::pow(th.sigma, 0.75);
    th.kappa2 = 2.0 * K * std::pow(th.sigma, 0.125);
    th.kappa3 = 2.0 * K * std::pow(th.sigma, 0.5);
    th.tau1 = 4.0 * th.lambda * tau / K;
    th.tau2 = std::pow(th.sigma, 3.75);
    th.consistent = th.kappa2 > th.kappa3 && th.kappa3 > th.kappa1;
    return th;
}

bool Thresholds::feasible(std::size_t d) const {
    const double dd = static_cast<double>(d);
    const double limit = std::sqrt(epsilon) / 4.0;
    return kappa0 < limit && dd * kappa1 + K * K * K * sigma < limit &&
           dd * kappa2 + K * K * sigma * sigma < limit && dd * kappa3 + K * std::pow(sigma, 3) < limit &&
           tau < epsilon / 2.0;
}

Thresholds schedule(double epsilon, std::size_t r, std::size_t d, double K_est, double c_gamma) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("schedule: epsilon must lie in (0, 1)");
    if (!(K_est > 0.0)) throw std::invalid_argument("schedule: K must be positive");
    const double floor = std::numeric_limits<double>::min();
    for (int k = 1;; ++k) {
        const double tau = std::pow(10.0, -static_cast<double>(k) / 8.0);
        if (tau < floor) break;
        Thresholds th = Thresholds::from_tau(epsilon, r, K_est, tau, c_gamma);
        if (th.feasible(d)) return th;
    }
    throw ScheduleError("no tau above the double-precision floor satisfies the theory schedule for epsilon=" +
                        std::to_string(epsilon) + ", d=" + std::to_string(d) + ", K=" + std::to_string(K_est) +
                        "; use practical mode (--mode practical) with explicit thresholds");
}

double max_block_norm(const FactorPoint& p) {
    return std::max({norm_f(p.S), p.A.norm(), p.B.norm(), p.C.norm()});
}

CurvatureProbe negative_curvature_direction(const FactorPoint& p, const Tensor3& t, double lambda, double tau2,
                                            int iters, Rng& rng) {
    CurvatureProbe out;
    out.min_curvature = std::numeric_limits<double>::infinity();
    auto apply = [&](const FactorPoint& v) {
        out.grad_evals += 2;
        return hvp(p, v, t, lambda);
    };

    FactorPoint v = random_unit_point(p, rng);
    auto note = [&](const FactorPoint& x, const FactorPoint& hx) {
        const double q = inner(hx, x);
        if (q < out.min_curvature) {
            out.min_curvature = q;
            if (q <= -0.5 * tau2) out.direction = x;
        }
    };

    // Bound ||H|| with a few plain power iterations.
    double norm_est = 0.0;
    FactorPoint probe = v;
    for (int i = 0; i < 6; ++i) {
        const FactorPoint hv = apply(probe);
        note(probe, hv);
        if (out.direction) return out;
        const double n = norm_f(hv);
        norm_est = std::max(norm_est, n);
        if (n == 0.0) break;
        probe = (1.0 / n) * hv;
    }
    const double shift = 2.0 * norm_est + tau2;

    for (int i = 0; i < iters; ++i) {
        const FactorPoint hv = apply(v);
        note(v, hv);
        if (out.direction) return out;
        FactorPoint next = shift * v;
        next -= hv;
        const double n = norm_f(next);
        if (n == 0.0) break;
        v = (1.0 / n) * next;
    }
    return out;
}

SospResult find_sosp(const FactorPoint& p0, const Tensor3& t, double lambda, const SospOptions& opts, Rng& rng) {
    if (opts.budget <= 0) throw std::invalid_argument("find_sosp: budget must be positive");
    SospResult res;
    res.point = p0;
    const auto start = Clock::now();
    FactorPoint& p = res.point;
    ObjectiveReport rep = objective_f(p, t, lambda);
    ++res.f_evals;
    require_finite(rep, "find_sosp");
    double step = 1e-2;
    int perturbations = 0;

    auto record = [&](const std::string& kind, double step_size, double improvement, double grad_norm,
                      std::optional<double> curvature) {
        TraceRecord rec;
        rec.f = rep.f;
        rec.L = rep.L;
        rec.R = rep.R;
        rec.grad_norm = grad_norm;
        rec.min_curvature = curvature;
        rec.step_kind = kind;
        rec.step_size = step_size;
        rec.improvement = improvement;
        rec.wall_time_s = seconds_since(start);
        res.steps.push_back(std::move(rec));
    };

    while (true) {
        if (rep.f <= opts.f_target) {
            res.reached_target = true;
            break;
        }
        if (res.grad_evals >= opts.budget) {
            res.budget_exhausted = true;
            break;
        }
        const FactorPoint g = grad_f(p, t, lambda);
        ++res.grad_evals;
        if (!g.all_finite()) throw NonFiniteError("non-finite gradient in find_sosp");
        const double gn = norm_f(g);
        res.grad_norm = gn;

        if (gn > opts.tau1) {
            // Armijo backtracking from a doubled previous step.
            step = std::min(step * 2.0, 1e6);
            const double gn2 = gn * gn;
            bool accepted = false;
            for (int halvings = 0; halvings < 80; ++halvings) {
                FactorPoint trial = axpy(p, -step, g);
                const ObjectiveReport tr = objective_f(trial, t, lambda);
                ++res.f_evals;
                if (std::isfinite(tr.f) && tr.f <= rep.f - 1e-4 * step * gn2) {
                    const double improvement = rep.f - tr.f;
                    p = std::move(trial);
                    rep = tr;
                    record("gradient", step, improvement, gn, std::nullopt);
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (accepted) continue;
            // No Armijo step at this precision: treat as stationary.
        }

        const long remaining = opts.budget - res.grad_evals;
        if (remaining <= 0) {
            res.budget_exhausted = true;
            break;
        }
        Rng probe_rng = rng.fork();
        const int iters = static_cast<int>(std::min<long>(opts.curvature_iters, std::max<long>(1, remaining / 2 - 6)));
        CurvatureProbe probe = negative_curvature_direction(p, t, lambda, opts.tau2, iters, probe_rng);
        res.grad_evals += probe.grad_evals;
        res.min_curvature = probe.min_curvature;
        if (!probe.direction) {
            res.is_sosp = gn <= opts.tau1;
            break;
        }
        FactorPoint dir = std::move(*probe.direction);
        if (inner(g, dir) > 0.0) dir *= -1.0;
        bool moved = false;
        for (double eta = 1.0; eta > 1e-10 && !moved; eta *= 0.5) {
            for (double sgn : {1.0, -1.0}) {
                FactorPoint trial = axpy(p, sgn * eta, dir);
                const ObjectiveReport tr = objective_f(trial, t, lambda);
                ++res.f_evals;
                if (std::isfinite(tr.f) && tr.f < rep.f) {
                    const double improvement = rep.f - tr.f;
                    p = std::move(trial);
                    rep = tr;
                    record("negative-curvature", eta, improvement, gn, probe.min_curvature);
                    moved = true;
                    break;
                }
            }
        }
        if (moved) continue;
        if (perturbations >= opts.max_perturbations) {
            res.is_sosp = false;
            break;
        }
        ++perturbations;
        // A kick from the perturbation ball, kept only if it does not increase f.
        Rng kick_rng = rng.fork();
        FactorPoint kicked = axpy(p, opts.perturbation_radius * kick_rng.uniform(), random_unit_point(p, kick_rng));
        const ObjectiveReport kr = objective_f(kicked, t, lambda);
        ++res.f_evals;
        if (std::isfinite(kr.f) && kr.f <= rep.f) {
            const double improvement = rep.f - kr.f;
            p = std::move(kicked);
            rep = kr;
            record("perturbation", opts.perturbation_radius, improvement, gn, probe.min_curvature);
        }
    }
    res.report = rep;
    return res;
}

std::string to_string(SearchMode mode) { return mode == SearchMode::Theory ? "theory" : "practical"; }

std::string to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Converged: return "converged";
        case RunStatus::Budget: return "budget";
        case RunStatus::NoDirection: return "no-direction";
    }
    return "unknown";
}

int SearchConfig::resolved_samples_per_block() const {
    if (samples_per_block > 0) return samples_per_block;
    return std::max(1, static_cast<int>(std::ceil(8.0 * std::log(1.0 / epsilon))));
}

RunResult run(const Tensor3& t, const FactorPoint& p0, const SearchConfig& config) {
    check_compatible(p0, t);
    if (!t.all_finite()) throw NonFiniteError("input tensor has non-finite entries");
    if (!(config.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (config.budget <= 0) throw std::invalid_argument("budget must be positive");

    const std::size_t r = p0.rank();
    const std::size_t d = p0.dim();
    const double lambda = config.lambda.value_or(default_lambda(r));

    double tau1 = config.tau1, tau2 = config.tau2, sigma = config.sigma, min_improvement = config.min_improvement;
    RunResult result;
    if (config.mode == SearchMode::Theory) {
        const double k_est = std::max({1.0, norm_f(t), max_block_norm(p0)});
        Thresholds th = schedule(config.epsilon, r, d, k_est, config.c_gamma);
        tau1 = th.tau1;
        tau2 = th.tau2;
        sigma = th.sigma;
        min_improvement = std::pow(sigma, 15.0 / 8.0);
        result.thresholds = th;
    }

    const auto start = Clock::now();
    Rng rng(config.seed);
    const int samples = config.resolved_samples_per_block();
    std::vector<double> line_steps;
    for (int k = 0; k <= 12; ++k) line_steps.push_back(std::ldexp(1.0, -k));

    result.point = p0;
    result.K = max_block_norm(p0);
    result.report = objective_f(p0, t, lambda);
    ++result.f_evals;
    long iteration = 0;

    auto push = [&](TraceRecord rec) {
        rec.iteration = iteration++;
        rec.wall_time_s = seconds_since(start);
        result.trace.records.push_back(std::move(rec));
    };

    while (true) {
        if (result.report.f <= config.epsilon) {
            result.status = RunStatus::Converged;
            break;
        }
        const long remaining = config.budget - result.grad_evals;
        if (remaining <= 0) {
            result.status = RunStatus::Budget;
            break;
        }
        SospOptions so;
        so.tau1 = tau1;
        so.tau2 = tau2;
        so.budget = remaining;
        so.f_target = config.epsilon;
        so.curvature_iters = config.curvature_iters;
        const std::uint64_t sosp_seed = rng.next_u64();
        Rng sosp_rng(sosp_seed);
        SospResult sosp = find_sosp(result.point, t, lambda, so, sosp_rng);
        result.grad_evals += sosp.grad_evals;
        result.f_evals += sosp.f_evals;
        for (TraceRecord& rec : sosp.steps) {
            rec.seed = sosp_seed;
            push(std::move(rec));
        }
        result.point = std::move(sosp.point);
        result.report = sosp.report;
        result.K = std::max(result.K, max_block_norm(result.point));
        if (sosp.reached_target || result.report.f <= config.epsilon) {
            result.status = RunStatus::Converged;
            break;
        }
        if (sosp.budget_exhausted) {
            result.status = RunStatus::Budget;
            break;
        }

        // Escape stage: every sampled block, the core fix and extraneous removal.
        const SubspaceSplit splits = split_point(result.point, t, sigma);
        std::optional<SignSearchResult> best;
        std::uint64_t best_seed = 0;
        auto consider = [&](SignSearchResult cand, std::uint64_t seed) {
            result.f_evals += cand.evaluations;
            if (cand.improvement > 0.0 && (!best || cand.improvement > best->improvement)) {
                best = std::move(cand);
                best_seed = seed;
            }
        };
        for (const BlockIndex& ijk : escape_blocks()) {
            const std::vector<double> grid =
                delta_grid(delta_center(ijk, sigma), config.delta_points, config.delta_decades);
            for (int s = 0; s < samples; ++s) {
                const std::uint64_t seed = rng.next_u64();
                Rng sampler(seed);
                SampledVectors vec;
                try {
                    vec = sample_missing_directions(splits, ijk, sampler);
                } catch (const NoMissingDirection&) {
                    break;
                }
                const ImprovementDirection dir = build_sampled_direction(vec, sigma);
                consider(sign_flip_search(result.point, t, lambda, dir, grid), seed);
            }
        }
        try {
            consider(line_search_grid(result.point, t, lambda, core_fix_direction(result.point, t, splits), line_steps), 0);
        } catch (const NoDirection&) {
        }
        for (int m = 1; m <= 3; ++m) {
            try {
                consider(line_search_grid(result.point, t, lambda,
                                          remove_extraneous_direction(result.point, splits, m), line_steps),
                         0);
            } catch (const NoDirection&) {
            }
        }

        if (!best || best->improvement < min_improvement) {
            result.status = RunStatus::NoDirection;
            break;
        }
        FactorPoint next = axpy(result.point, best->step, best->direction.delta);
        const ObjectiveReport next_rep = objective_f(next, t, lambda);
        ++result.f_evals;
        require_finite(next_rep, "escape step");
        TraceRecord rec;
        rec.f = next_rep.f;
        rec.L = next_rep.L;
        rec.R = next_rep.R;
        rec.grad_norm = sosp.grad_norm;
        rec.min_curvature = sosp.min_curvature;
        rec.step_kind = best->direction.label();
        rec.step_size = best->step;
        rec.improvement = result.report.f - next_rep.f;
        rec.predicted_f = best->f_after;
        rec.seed = best_seed;
        push(std::move(rec));
        result.point = std::move(next);
        result.report = next_rep;
        result.K = std::max(result.K, max_block_norm(result.point));
        ++result.escapes;
    }
    return result;
}

}  // namespace tucker
