#include "tucker/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tucker/errors.hpp"

namespace tucker {

namespace {

// Flip paired columns (u_i, v_i) so u_i has a positive leading entry.
void canonicalize_pairs(Matrix& u, Matrix& v) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
        for (Eigen::Index i = 0; i < u.rows(); ++i) {
            if (std::abs(u(i, j)) > 1e-12) {
                if (u(i, j) < 0.0) {
                    u.col(j) *= -1.0;
                    v.col(j) *= -1.0;
                }
                break;
            }
        }
    }
}

}  // namespace

MatrixSplit split(const Matrix& m, double sigma) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("split: sigma must be nonnegative");
    const Eigen::Index r = m.rows();
    const Eigen::Index d = m.cols();
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector s = svd.singularValues();
    Eigen::Index k = 0;
    while (k < s.size() && s(k) > sigma) ++k;

    MatrixSplit out;
    out.sigma = sigma;
    out.singular_values = s;
    // Eigen's U spans R^r (the "left" side of an r x d factor), V spans R^d.
    Matrix left = svd.matrixU();
    Matrix right = svd.matrixV();

    Matrix right1 = right.leftCols(k);
    Matrix left1 = left.leftCols(k);
    canonicalize_pairs(right1, left1);
    out.U1 = right1;
    out.V1 = left1;

    Matrix right2 = right.rightCols(d - k);
    Matrix left2 = left.rightCols(r - k);
    canonicalize_column_signs(right2);
    canonicalize_column_signs(left2);
    out.U2 = right2;
    out.V2 = left2;

    out.M1 = Matrix::Zero(r, d);
    out.M2 = Matrix::Zero(r, d);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) == 0.0) continue;
        const Matrix term = s(i) * svd.matrixU().col(i) * svd.matrixV().col(i).transpose();
        if (i < k)
            out.M1 += term;
        else
            out.M2 += term;
    }
    return out;
}

Matrix projector(const Matrix& basis, Eigen::Index n) {
    if (basis.cols() == 0) return Matrix::Zero(n, n);
    return basis * basis.transpose();
}

Matrix true_projection(const Tensor3& t, int mode, double rank_tol) {
    const Matrix flat = flatten(t, mode);
    const Eigen::Index n = flat.rows();
    Eigen::JacobiSVD<Matrix> svd(flat, Eigen::ComputeFullU);
    const Vector s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return Matrix::Zero(n, n);
    Eigen::Index k = 0;
    while (k < s.size() && s(k) > rank_tol * s(0)) ++k;
    const Matrix u = svd.matrixU().leftCols(k);
    return u * u.transpose();
}

SubspaceSplit split_point(const FactorPoint& p, const Tensor3& t, double sigma, double rank_tol) {
    p.check_shapes();
    SubspaceSplit out;
    out.sigma = sigma;
    const auto d = static_cast<Eigen::Index>(p.dim());
    for (int m = 1; m <= 3; ++m) {
        ModeSplit& ms = out.modes[static_cast<std::size_t>(m - 1)];
        ms.parts = split(p.factor(m), sigma);
        ms.P = true_projection(t, m, rank_tol);
        ms.M3 = p.factor(m) * (Matrix::Identity(d, d) - ms.P);
    }
    return out;
}

double BlockDecomposition::total_residual() const {
    double acc = 0.0;
    for (const auto& a : residual_blocks)
        for (const auto& b : a)
            for (double x : b) acc += x;
    return acc;
}

BlockDecomposition block_decompose(const FactorPoint& p, const Tensor3& t, const SubspaceSplit& splits) {
    p.check_shapes();
    const auto d = static_cast<Eigen::Index>(p.dim());
    const auto r = static_cast<Eigen::Index>(p.rank());
    // [mode][part]
    std::array<std::array<Matrix, 2>, 3> pu, pv, factor_part;
    for (int m = 0; m < 3; ++m) {
        const MatrixSplit& ms = splits.modes[static_cast<std::size_t>(m)].parts;
        pu[m][0] = projector(ms.U1, d);
        pu[m][1] = projector(ms.U2, d);
        pv[m][0] = projector(ms.V1, r);
        pv[m][1] = projector(ms.V2, r);
        factor_part[m][0] = ms.M1;
        factor_part[m][1] = ms.M2;
    }
    BlockDecomposition out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                Tensor3 tb = multilinear_transform(t, pu[0][i], pu[1][j], pu[2][k]);
                Tensor3 sb = multilinear_transform(p.S, pv[0][i], pv[1][j], pv[2][k]);
                const Tensor3 diff =
                    multilinear_transform(sb, factor_part[0][i], factor_part[1][j], factor_part[2][k]) - tb;
                out.residual_blocks[i][j][k] = inner(diff, diff);
                out.T_blocks[i][j][k] = std::move(tb);
                out.S_blocks[i][j][k] = std::move(sb);
            }
    return out;
}

std::size_t numerical_rank(const Matrix& m, double tol) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector s = svd.singularValues();
    if (s(0) == 0.0) return 0;
    return static_cast<std::size_t>((s.array() > tol * s(0)).count());
}

ProjectionDistance projection_distance_bound(const Matrix& m, const Matrix& m1, const Matrix& m2, double sigma) {
    if (m.rows() != m1.rows() || m.cols() != m1.cols() || m.rows() != m2.rows() || m.cols() != m2.cols()) {
        throw DimensionError("projection_distance_bound: M, M1, M2 must share a shape");
    }
    const auto rows = static_cast<std::size_t>(m.rows());
    if (numerical_rank(m) != rows) throw std::invalid_argument("projection_distance_bound: M is rank deficient");
    if (numerical_rank(m1) != rows) throw std::invalid_argument("projection_distance_bound: M1 is rank deficient");

    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinV);
    Eigen::JacobiSVD<Matrix> svd1(m1, Eigen::ComputeThinV);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(sigma > 0.0) || sigma > smin * (1.0 + 1e-12)) {
        throw std::invalid_argument("projection_distance_bound: sigma must lie in (0, sigma_min(M)] = (0, " +
                                    std::to_string(smin) + "]");
    }
    const Matrix v = svd.matrixV();
    const Matrix v1 = svd1.matrixV();
    ProjectionDistance out;
    out.lhs = (v * v.transpose() - v1 * v1.transpose()).norm();
    out.rhs = 2.0 * m2.norm() / sigma;
    return out;
}

RankDeficiency rank_deficiency_flag(const SubspaceSplit& splits, const Tensor3& t, double K, double gamma) {
    RankDeficiency out;
    out.bound = 2.0 * K * std::sqrt(gamma);
    for (int m = 1; m <= 3; ++m) {
        const MatrixSplit& ms = splits.mode(m).parts;
        const auto idx = static_cast<std::size_t>(m - 1);
        const auto r = static_cast<std::size_t>(ms.M1.rows());
        const auto d = static_cast<Eigen::Index>(ms.M1.cols());
        out.deficient[idx] = ms.rank1() < r;
        const Matrix outside = Matrix::Identity(d, d) - projector(ms.U1, d);
        out.outside_norm[idx] = norm_f(mode_product(t, outside, m));
    }
    return out;
}

}  // namespace tucker
