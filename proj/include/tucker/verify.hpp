#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "tucker/factor_point.hpp"
#include "tucker/objective.hpp"
#include "tucker/rng.hpp"
#include "tucker/tensor.hpp"

namespace tucker::verify {

using nlohmann::json;

struct LemmaReport {
    std::string id;
    long trials = 0;
    long failures = 0;
    // min over trials of (allowed - observed); negative means a violation
    double worst_margin = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    json extra = json::object();

    // Sets pass from failures.
    void finish() { pass = failures == 0 && trials > 0; }
};

json to_json(const LemmaReport& rep);

// Lets tests tamper with gradients before a check sees them.
using GradientHook = std::function<void(GradientParts&)>;

LemmaReport check_orthogonality(int trials, Rng& rng, const GradientHook& hook = {});
LemmaReport check_euler(int trials, Rng& rng, const GradientHook& hook = {});
LemmaReport check_sublevel_bound(const std::vector<double>& gammas, int trials, Rng& rng);
LemmaReport check_core_lower_bound(int trials, Rng& rng);
LemmaReport check_submultiplicativity(int trials, Rng& rng);
LemmaReport check_wedin(int trials, Rng& rng);
// Pr[|X(a,b,c)| >= 0.1 ||X||_F / sqrt(d1 d2 d3)] >= 0.3 for uniform unit a, b, c.
LemmaReport check_anti_concentration(const std::vector<std::size_t>& dims, int trials, Rng& rng,
                                     int samples = 10000);

// Canonical stationary points with a known improving direction.
struct GalleryPoint {
    std::string name;
    FactorPoint point;
    Tensor3 T;
    FactorPoint direction;
    double expected_order = 0.0;
};

GalleryPoint one_missing_point();
GalleryPoint two_missing_point();
GalleryPoint three_missing_point();
// r = 1, d = 2: T = e1 (x) e1 (x) e1, factors e2^T, S = 0.
GalleryPoint lambda_zero_point();

// Least-squares slope of log(f(p) - f(p + eps dir)) against log(eps).
double improvement_slope(const GalleryPoint& g, double lambda, const std::vector<double>& eps);
std::vector<double> default_slope_grid();

std::vector<LemmaReport> saddle_gallery(Rng& rng);

const std::vector<std::string>& suite_names();

struct SuiteOptions {
    std::uint64_t seed = 0;
    GradientHook gradient_hook;
};

struct SuiteReport {
    std::vector<LemmaReport> reports;
    bool pass = false;
};

// Runs the named checks ("all" or empty selects everything). Each check gets
// its own generator derived from the seed and its position in suite_names().
// Throws std::invalid_argument for unknown names.
SuiteReport run_suite(const std::vector<std::string>& selection, const SuiteOptions& options);
json to_json(const SuiteReport& rep);

}  // namespace tucker::verify
