#pragma once

#include <array>
#include <cstddef>

#include "tucker/factor_point.hpp"
#include "tucker/tensor.hpp"

namespace tucker {

// Threshold split of one r x d factor M = V diag(s) U^T.
//   M1 keeps singular values > sigma, M2 the rest (ties go to M2).
//   U1/U2 are orthonormal bases (columns, in R^d) of the right singular
//   space of M1 and its complement; V1/V2 likewise in R^r.
struct MatrixSplit {
    Matrix M1, M2;
    Matrix U1, U2;
    Matrix V1, V2;
    Vector singular_values;  // all min(r, d), descending
    double sigma = 0.0;

    std::size_t rank1() const { return static_cast<std::size_t>(U1.cols()); }
};

MatrixSplit split(const Matrix& m, double sigma);

// Per-mode split of a factor point plus the components outside the true
// subspaces of T: M3 = M (I - P_m).
struct ModeSplit {
    MatrixSplit parts;
    Matrix M3;
    Matrix P;  // projection onto the column span of T_(m), d x d
};

struct SubspaceSplit {
    std::array<ModeSplit, 3> modes;
    double sigma = 0.0;

    const ModeSplit& mode(int m) const { return modes.at(static_cast<std::size_t>(m - 1)); }
};

// Projection onto span of left singular vectors of T_(mode) whose singular
// value exceeds rank_tol * sigma_max. Zero tensor -> zero projection.
Matrix true_projection(const Tensor3& t, int mode, double rank_tol = 1e-10);

SubspaceSplit split_point(const FactorPoint& p, const Tensor3& t, double sigma, double rank_tol = 1e-10);

// Orthogonal projector Q Q^T onto the columns of an orthonormal basis Q.
Matrix projector(const Matrix& basis, Eigen::Index n);

// Block index: i, j, k in {1, 2}.
struct BlockDecomposition {
    // [i-1][j-1][k-1]
    std::array<std::array<std::array<Tensor3, 2>, 2>, 2> T_blocks;
    std::array<std::array<std::array<Tensor3, 2>, 2>, 2> S_blocks;
    std::array<std::array<std::array<double, 2>, 2>, 2> residual_blocks{};

    const Tensor3& T_block(int i, int j, int k) const { return T_blocks[i - 1][j - 1][k - 1]; }
    const Tensor3& S_block(int i, int j, int k) const { return S_blocks[i - 1][j - 1][k - 1]; }
    double residual(int i, int j, int k) const { return residual_blocks[i - 1][j - 1][k - 1]; }
    double total_residual() const;
};

BlockDecomposition block_decompose(const FactorPoint& p, const Tensor3& t, const SubspaceSplit& splits);

struct ProjectionDistance {
    double lhs = 0.0;  // ||P - P1||_F, projections onto row spans of M and M1
    double rhs = 0.0;  // 2 ||M2||_F / sigma
    bool holds() const { return lhs <= rhs; }
};

// Requires rank(M) = rank(M1) = rows (numerically) and 0 < sigma <= smallest
// singular value of M.
ProjectionDistance projection_distance_bound(const Matrix& m, const Matrix& m1, const Matrix& m2, double sigma);

struct RankDeficiency {
    std::array<bool, 3> deficient{};
    // ||T(I - P, I, I)||_F (and mode analogues), P the row-span projection of M1.
    std::array<double, 3> outside_norm{};
    double bound = 0.0;  // 2 K sqrt(gamma)
};

RankDeficiency rank_deficiency_flag(const SubspaceSplit& splits, const Tensor3& t, double K, double gamma);

// Numerical rank with cutoff tol * max(1, s_max).
std::size_t numerical_rank(const Matrix& m, double tol = 1e-10);

}  // namespace tucker
