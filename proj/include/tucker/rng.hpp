#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tucker {

// Seeded generator with a portable normal sampler. std::normal_distribution
// differs between standard libraries, which would break trace reproducibility
// across toolchains; mt19937_64 itself is fully specified.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Marsaglia polar method.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double x = 0.0, y = 0.0, s = 0.0;
        do {
            x = 2.0 * uniform() - 1.0;
            y = 2.0 * uniform() - 1.0;
            s = x * x + y * y;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = y * m;
        has_spare_ = true;
        return x * m;
    }

    std::uint64_t next_u64() { return engine_(); }

    // Independent child stream, used to give each sampler call its own generator.
    Rng fork() { return Rng(engine_() ^ 0x9e3779b97f4a7c15ULL); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace tucker
