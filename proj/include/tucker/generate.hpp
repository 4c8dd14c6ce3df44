#pragma once

#include <cstddef>
#include <cstdint>

#include "tucker/factor_point.hpp"
#include "tucker/tensor.hpp"

namespace tucker {

struct GeneratedTensor {
    Tensor3 T;
    FactorPoint ground_truth;  // rescaled so that reconstruct(ground_truth) is the noiseless T
    bool exact = true;
};

// T = S*(A*, B*, C*) from i.i.d. N(0,1) factors, scaled to ||T||_F = 1, plus
// optional Gaussian noise of Frobenius norm `noise`. Requires 1 <= r <= d.
GeneratedTensor generate_exact(std::size_t r, std::size_t d, std::uint64_t seed, double noise = 0.0);

}  // namespace tucker
