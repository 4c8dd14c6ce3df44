#pragma once

// Independent reference implementations used as test oracles. They index the
// raw arrays directly and never go through flatten/kron.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "tucker/factor_point.hpp"
#include "tucker/rng.hpp"
#include "tucker/tensor.hpp"

namespace tucker::testing {

inline Tensor3 naive_multilinear(const Tensor3& s, const Matrix& a, const Matrix& b, const Matrix& c) {
    const std::size_t r1 = s.dim(1), r2 = s.dim(2), r3 = s.dim(3);
    const auto d1 = static_cast<std::size_t>(a.cols()), d2 = static_cast<std::size_t>(b.cols()),
               d3 = static_cast<std::size_t>(c.cols());
    Tensor3 out({d1, d2, d3});
    for (std::size_t i = 0; i < d1; ++i)
        for (std::size_t j = 0; j < d2; ++j)
            for (std::size_t k = 0; k < d3; ++k) {
                double acc = 0.0;
                for (std::size_t x = 0; x < r1; ++x)
                    for (std::size_t y = 0; y < r2; ++y)
                        for (std::size_t z = 0; z < r3; ++z)
                            acc += s(x, y, z) * a(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(i)) *
                                   b(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(j)) *
                                   c(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(k));
                out(i, j, k) = acc;
            }
    return out;
}

inline double naive_loss(const FactorPoint& p, const Tensor3& t) {
    const Tensor3 rec = naive_multilinear(p.S, p.A, p.B, p.C);
    double acc = 0.0;
    for (std::size_t i = 0; i < t.dim(1); ++i)
        for (std::size_t j = 0; j < t.dim(2); ++j)
            for (std::size_t k = 0; k < t.dim(3); ++k) {
                const double e = rec(i, j, k) - t(i, j, k);
                acc += e * e;
            }
    return acc;
}

// Entry of S_(m) S_(m)^T computed straight from the definition.
inline double core_gram(const Tensor3& s, int mode, std::size_t x, std::size_t xp) {
    const std::size_t r = s.dim(1);
    double acc = 0.0;
    for (std::size_t u = 0; u < r; ++u)
        for (std::size_t v = 0; v < r; ++v) {
            if (mode == 1) acc += s(x, u, v) * s(xp, u, v);
            else if (mode == 2) acc += s(u, x, v) * s(u, xp, v);
            else acc += s(u, v, x) * s(u, v, xp);
        }
    return acc;
}

inline double naive_phi(const FactorPoint& p) {
    const std::size_t r = p.rank(), d = p.dim();
    double acc = 0.0;
    for (int m = 1; m <= 3; ++m) {
        const Matrix& f = p.factor(m);
        for (std::size_t x = 0; x < r; ++x)
            for (std::size_t xp = 0; xp < r; ++xp) {
                double g = 0.0;
                for (std::size_t i = 0; i < d; ++i)
                    g += f(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(i)) *
                         f(static_cast<Eigen::Index>(xp), static_cast<Eigen::Index>(i));
                const double diff = g - core_gram(p.S, m, x, xp);
                acc += diff * diff;
            }
    }
    return acc;
}

// Pointers to every scalar of a point, in the order S, A, B, C.
inline std::vector<double*> coordinates(FactorPoint& p) {
    std::vector<double*> out;
    for (double& v : p.S.data()) out.push_back(&v);
    for (int m = 1; m <= 3; ++m) {
        Matrix& f = p.factor(m);
        for (Eigen::Index i = 0; i < f.size(); ++i) out.push_back(f.data() + i);
    }
    return out;
}

// Central differences with h = 1e-5 * max(1, |x_i|) per coordinate.
inline FactorPoint finite_difference_gradient(const FactorPoint& p,
                                              const std::function<double(const FactorPoint&)>& fn) {
    FactorPoint q = p;
    FactorPoint g = FactorPoint::zeros(p.rank(), p.dim());
    const std::vector<double*> qs = coordinates(q);
    const std::vector<double*> gs = coordinates(g);
    for (std::size_t c = 0; c < qs.size(); ++c) {
        const double x = *qs[c];
        const double h = 1e-5 * std::max(1.0, std::abs(x));
        *qs[c] = x + h;
        const double fp = fn(q);
        *qs[c] = x - h;
        const double fm = fn(q);
        *qs[c] = x;
        *gs[c] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

inline Tensor3 random_unit_tensor(std::size_t d, Rng& rng) {
    Tensor3 t = Tensor3::random_normal({d, d, d}, rng);
    t *= 1.0 / norm_f(t);
    return t;
}

inline double max_abs_diff(const Tensor3& x, const Tensor3& y) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x.data()[i] - y.data()[i]));
    return m;
}

}  // namespace tucker::testing
