#include "tucker/generate.hpp"

#include <stdexcept>

#include "tucker/errors.hpp"

namespace tucker {

GeneratedTensor generate_exact(std::size_t r, std::size_t d, std::uint64_t seed, double noise) {
    if (r == 0 || r > d) throw DimensionError("generate: need 1 <= r <= d");
    if (!(noise >= 0.0)) throw std::invalid_argument("generate: noise must be non-negative");
    Rng rng(seed);
    GeneratedTensor out;
    out.ground_truth = FactorPoint::random_normal(r, d, 1.0, rng);
    out.T = reconstruct(out.ground_truth);
    const double n = norm_f(out.T);
    out.T *= 1.0 / n;
    out.ground_truth.S *= 1.0 / n;
    if (noise > 0.0) {
        Tensor3 e = Tensor3::random_normal(out.T.dims(), rng);
        e *= noise / norm_f(e);
        out.T += e;
        out.exact = false;
    }
    return out;
}

}  // namespace tucker
