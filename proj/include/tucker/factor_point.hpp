#pragma once

#include <array>
#include <cstddef>

#include "tucker/rng.hpp"
#include "tucker/tensor.hpp"

namespace tucker {

// A point (S, A, B, C) of the parameter space: S is r x r x r, the factors are
// r x d. Also used for gradients and step directions.
struct FactorPoint {
    Tensor3 S;
    Matrix A, B, C;

    FactorPoint() = default;
    FactorPoint(Tensor3 s, Matrix a, Matrix b, Matrix c);

    static FactorPoint zeros(std::size_t r, std::size_t d);
    // Entries i.i.d. N(0, scale^2).
    static FactorPoint random_normal(std::size_t r, std::size_t d, double scale, Rng& rng);

    std::size_t rank() const { return S.dim(1); }
    std::size_t dim() const { return static_cast<std::size_t>(A.cols()); }

    // mode in {1,2,3} -> A, B, C
    const Matrix& factor(int mode) const;
    Matrix& factor(int mode);

    // Throws DimensionError if the blocks are inconsistent.
    void check_shapes() const;
    bool same_shape(const FactorPoint& other) const;
    bool all_finite() const;

    FactorPoint& operator+=(const FactorPoint& other);
    FactorPoint& operator-=(const FactorPoint& other);
    FactorPoint& operator*=(double s);

    // Per-block scaling, signs[0..3] applied to (S, A, B, C).
    FactorPoint scaled_blocks(const std::array<double, 4>& factors) const;

    friend bool operator==(const FactorPoint&, const FactorPoint&) = default;
};

FactorPoint operator+(FactorPoint a, const FactorPoint& b);
FactorPoint operator-(FactorPoint a, const FactorPoint& b);
FactorPoint operator*(double s, FactorPoint a);

// <p, q> = <S,S'> + <A,A'> + <B,B'> + <C,C'>
double inner(const FactorPoint& p, const FactorPoint& q);
double norm_f(const FactorPoint& p);

// p + step * dir
FactorPoint axpy(const FactorPoint& p, double step, const FactorPoint& dir);

// S(A, B, C)
Tensor3 reconstruct(const FactorPoint& p);

}  // namespace tucker
