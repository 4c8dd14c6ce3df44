#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tucker/escape.hpp"
#include "tucker/factor_point.hpp"
#include "tucker/objective.hpp"
#include "tucker/rng.hpp"
#include "tucker/tensor.hpp"

namespace tucker {

// Parameter schedule of the local search. Formulas:
//   lambda = 1/(16 r^4), gamma = c_gamma tau^(1/48), sigma = sqrt(gamma),
//   kappa0 = sqrt(gamma), kappa1 = 2K sigma^(3/4), kappa2 = 2K sigma^(1/8),
//   kappa3 = 2K sigma^(1/2), tau1 = 4 lambda tau / K, tau2 = sigma^(15/4).
struct Thresholds {
    double lambda = 0.0;
    double K = 0.0;
    double tau = 0.0;
    double gamma = 0.0;
    double sigma = 0.0;
    double kappa0 = 0.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double kappa3 = 0.0;
    double tau1 = 0.0;
    double tau2 = 0.0;
    double epsilon = 0.0;
    double c_gamma = 1.0;
    // kappa2 > kappa3 > kappa1 (holds iff sigma < 1)
    bool consistent = false;

    static Thresholds from_tau(double epsilon, std::size_t r, double K, double tau, double c_gamma = 1.0);
    // The five inequalities the schedule must satisfy for dimension d.
    bool feasible(std::size_t d) const;
};

// Largest tau on the grid 10^(-k/8), k >= 1, for which every inequality holds.
// Throws ScheduleError when no tau above the smallest normal double works.
Thresholds schedule(double epsilon, std::size_t r, std::size_t d, double K_est, double c_gamma = 1.0);

struct TraceRecord {
    long iteration = 0;
    double f = 0.0, L = 0.0, R = 0.0;
    double grad_norm = 0.0;
    std::optional<double> min_curvature;
    std::string step_kind;  // gradient | perturbation | negative-curvature | sampled(i,j,k) | core-fix | remove-extraneous(m)
    double step_size = 0.0;
    double improvement = 0.0;
    // eval_along prediction of f at the accepted step (escape steps only)
    std::optional<double> predicted_f;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
};

struct SearchTrace {
    std::vector<TraceRecord> records;
};

struct CurvatureProbe {
    std::optional<FactorPoint> direction;  // unit, Rayleigh quotient <= -tau2/2
    double min_curvature = 0.0;            // smallest Rayleigh quotient seen
    long grad_evals = 0;
};

// Power iteration on (c I - H) with c an upper bound on ||H|| estimated by a
// few HVP probes.
CurvatureProbe negative_curvature_direction(const FactorPoint& p, const Tensor3& t, double lambda, double tau2,
                                            int iters, Rng& rng);

struct SospOptions {
    double tau1 = 1e-6;
    double tau2 = 1e-4;
    long budget = 50000;  // gradient evaluations, HVPs count twice
    double f_target = -1.0;  // stop early once f <= f_target
    int curvature_iters = 30;
    int max_perturbations = 10;
    double perturbation_radius = 1e-3;
};

struct SospResult {
    FactorPoint point;
    ObjectiveReport report;
    double grad_norm = 0.0;
    std::optional<double> min_curvature;
    bool is_sosp = false;
    bool reached_target = false;
    bool budget_exhausted = false;
    long grad_evals = 0;
    long f_evals = 0;
    std::vector<TraceRecord> steps;
};

// Gradient descent with Armijo backtracking, negative-curvature steps when the
// gradient is small, and random perturbations when those fail.
SospResult find_sosp(const FactorPoint& p0, const Tensor3& t, double lambda, const SospOptions& opts, Rng& rng);

enum class SearchMode { Practical, Theory };
enum class RunStatus { Converged, Budget, NoDirection };

std::string to_string(SearchMode mode);
std::string to_string(RunStatus status);

struct SearchConfig {
    SearchMode mode = SearchMode::Practical;
    double epsilon = 1e-3;
    std::optional<double> lambda;  // default 1/(16 r^4)
    std::uint64_t seed = 0;
    long budget = 50000;
    int samples_per_block = 0;  // 0 -> ceil(8 log(1/epsilon))
    int delta_points = 13;
    double delta_decades = 2.0;
    // practical-mode thresholds (theory mode derives them from schedule())
    double tau1 = 1e-6;
    double tau2 = 1e-4;
    double min_improvement = 1e-10;
    double sigma = 1e-2;
    double c_gamma = 1.0;
    int curvature_iters = 30;

    int resolved_samples_per_block() const;
};

struct RunResult {
    FactorPoint point;
    ObjectiveReport report;
    SearchTrace trace;
    RunStatus status = RunStatus::Budget;
    long grad_evals = 0;
    long f_evals = 0;
    long escapes = 0;
    double K = 0.0;  // largest block norm seen along the trajectory
    std::optional<Thresholds> thresholds;
};

RunResult run(const Tensor3& t, const FactorPoint& p0, const SearchConfig& config);

// Largest of ||S||, ||A||, ||B||, ||C||.
double max_block_norm(const FactorPoint& p);

}  // namespace tucker
