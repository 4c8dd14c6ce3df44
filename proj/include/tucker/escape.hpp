#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tucker/factor_point.hpp"
#include "tucker/rng.hpp"
#include "tucker/subspace.hpp"
#include "tucker/tensor.hpp"

namespace tucker {

enum class DirectionKind { RemoveExtraneous, CoreFix, Sampled, Gradient, NegativeCurvature };

std::string to_string(DirectionKind kind);

// Subspace indicator (i, j, k), each 1 (large singular part) or 2 (complement).
using BlockIndex = std::array<int, 3>;

// The seven indicators with at least one 2, in lexicographic order.
const std::vector<BlockIndex>& escape_blocks();

struct SampledVectors {
    Vector a, b, c;  // unit, in R^d
    Vector u, v, w;  // unit, in R^r
    BlockIndex ijk{2, 2, 2};
    // For index-1 modes, alpha with M1^T u = alpha * a (0 for index-2 modes).
    std::array<double, 3> alpha{};

    const Vector& ambient(int mode) const;
    const Vector& core(int mode) const;
};

struct ImprovementDirection {
    FactorPoint delta;
    DirectionKind kind = DirectionKind::Gradient;
    int mode = 0;  // RemoveExtraneous only
    BlockIndex ijk{0, 0, 0};  // Sampled only
    std::optional<SampledVectors> vectors;
    std::array<int, 4> signs{1, 1, 1, 1};  // applied to (dS, dA, dB, dC)

    std::string label() const;
};

// Algorithm-1 sampler. For index-1 modes: a uniform on the unit sphere of U_{m,1}
// and u = (M1^T)^+ a normalized; for index-2 modes: a uniform in U_{m,2},
// u uniform in V_{m,2}. Throws NoMissingDirection when a requested subspace is
// trivial.
SampledVectors sample_missing_directions(const SubspaceSplit& splits, const BlockIndex& ijk, Rng& rng);

// dS = u (x) v (x) w; for index-2 modes dM = scale * u a^T with scale = sigma
// when exactly one index is 2, and 1 otherwise.
ImprovementDirection build_sampled_direction(const SampledVectors& vectors, double sigma);

struct SignSearchResult {
    ImprovementDirection direction;  // with the chosen signs applied
    double step = 0.0;
    double improvement = 0.0;  // f(p) - f(p + step * direction) >= 0
    double f_before = 0.0;
    double f_after = 0.0;
    int evaluations = 0;
};

// Tries every sign pattern over the nonzero blocks of dir and every step in
// delta_grid (positive). Returns zero improvement and step 0 if nothing helps.
SignSearchResult sign_flip_search(const FactorPoint& p, const Tensor3& t, double lambda,
                                  const ImprovementDirection& dir, const std::vector<double>& delta_grid);

// Plain line search of a fixed direction over `steps`; same reporting as above.
SignSearchResult line_search_grid(const FactorPoint& p, const Tensor3& t, double lambda,
                                  const ImprovementDirection& dir, const std::vector<double>& steps);

// Geometric grid of `points` steps from center/10^decades to center*10^decades.
std::vector<double> delta_grid(double center, int points = 13, double decades = 2.0);

// Grid center for a sampled block: sigma^(1/8) with three missing modes,
// sigma^(1/4) otherwise.
double delta_center(const BlockIndex& ijk, double sigma);

// dM = -M3 for the given mode. Throws NoDirection when M3 vanishes.
ImprovementDirection remove_extraneous_direction(const FactorPoint& p, const SubspaceSplit& splits, int mode);

// dS = T(A1^+, B1^+, C1^+) - S(ProjV11, ProjV21, ProjV31). Throws NoDirection
// when some M1 is zero.
ImprovementDirection core_fix_direction(const FactorPoint& p, const Tensor3& t, const SubspaceSplit& splits);

// Moore-Penrose pseudoinverse via SVD, cutoff 1e-12 * s_max.
Matrix pseudoinverse(const Matrix& m);

}  // namespace tucker
