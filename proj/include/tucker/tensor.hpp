#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "tucker/rng.hpp"

namespace tucker {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Dims = std::array<std::size_t, 3>;

struct FactorPoint;

// Dense third-order tensor, row-major: (i, j, k) -> i*d2*d3 + j*d3 + k.
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(Dims dims);
    Tensor3(Dims dims, std::vector<double> data);

    static Tensor3 zeros(Dims dims) { return Tensor3(dims); }
    static Tensor3 random_normal(Dims dims, Rng& rng);
    // a (x) b (x) c
    static Tensor3 outer(const Vector& a, const Vector& b, const Vector& c);

    const Dims& dims() const { return dims_; }
    std::size_t dim(int mode) const { return dims_.at(static_cast<std::size_t>(mode - 1)); }
    std::size_t size() const { return data_.size(); }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * dims_[1] + j) * dims_[2] + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * dims_[1] + j) * dims_[2] + k];
    }

    Tensor3& operator+=(const Tensor3& other);
    Tensor3& operator-=(const Tensor3& other);
    Tensor3& operator*=(double s);

    bool all_finite() const;

    friend bool operator==(const Tensor3&, const Tensor3&) = default;

private:
    Dims dims_{0, 0, 0};
    std::vector<double> data_;
};

Tensor3 operator+(Tensor3 a, const Tensor3& b);
Tensor3 operator-(Tensor3 a, const Tensor3& b);
Tensor3 operator*(double s, Tensor3 a);

// Mode-m flattening, m in {1,2,3}. Columns enumerate the remaining two indices
// in increasing mode order with the later index fastest, so that
//   flatten(S(A,B,C), 1) = A^T flatten(S,1) kron(B,C)
//   flatten(S(A,B,C), 2) = B^T flatten(S,2) kron(A,C)
//   flatten(S(A,B,C), 3) = C^T flatten(S,3) kron(A,B).
Matrix flatten(const Tensor3& x, int mode);
Tensor3 unflatten(const Matrix& m, int mode, Dims dims);

Matrix kron(const Matrix& p, const Matrix& q);

// Y = X x_mode M, i.e. flatten(Y, mode) = M^T flatten(X, mode). M has
// X.dim(mode) rows; the result has M.cols() entries along that mode.
Tensor3 mode_product(const Tensor3& x, const Matrix& m, int mode);

// out[i,j,k] = sum_{x,y,z} S[x,y,z] A[x,i] B[y,j] C[z,k]
Tensor3 multilinear_transform(const Tensor3& s, const Matrix& a, const Matrix& b, const Matrix& c);

// X(a, b, c) for vectors.
double trilinear(const Tensor3& x, const Vector& a, const Vector& b, const Vector& c);

double inner(const Tensor3& x, const Tensor3& y);
double norm_f(const Tensor3& x);

// Operator 2-norm of a matrix.
double matrix_norm2(const Matrix& m);

struct SpectralTriple {
    double sigma = 0.0;
    Vector u, v, w;
    // max of the three stationarity residuals ||X(I,v,w) - sigma u|| etc.
    double residual = 0.0;
    int iterations = 0;
};

// Best of `restarts` runs of alternating higher-order power iteration. The
// result is a lower bound on the tensor spectral norm, not a certificate.
SpectralTriple spectral_norm(const Tensor3& x, int restarts = 20, double tol = 1e-10,
                             int max_iters = 1000, std::uint64_t seed = 0);

// Truncated HOSVD: factor rows are the top-r left singular vectors of each
// flattening (orthonormal rows), core S = T(A^T, B^T, C^T).
FactorPoint hosvd(const Tensor3& t, std::size_t r);

// Leading left singular vectors of `m` with deterministic signs.
Matrix leading_left_singular_vectors(const Matrix& m, std::size_t count);

// Flip each column so that its first entry with |x| > 1e-12 is positive.
void canonicalize_column_signs(Matrix& m);

}  // namespace tucker
