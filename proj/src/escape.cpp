#include "tucker/escape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tucker/errors.hpp"
#include "tucker/objective.hpp"

namespace tucker {

namespace {

Vector random_unit_in(const Matrix& basis, Rng& rng) {
    Vector g(basis.cols());
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
    Vector x = basis * g;
    return x / x.norm();
}

int count_missing(const BlockIndex& ijk) {
    return static_cast<int>(std::count(ijk.begin(), ijk.end(), 2));
}

std::array<double, 4> sign_factors(const std::array<int, 4>& s) {
    return {static_cast<double>(s[0]), static_cast<double>(s[1]), static_cast<double>(s[2]),
            static_cast<double>(s[3])};
}

}  // namespace

std::string to_string(DirectionKind kind) {
    switch (kind) {
        case DirectionKind::RemoveExtraneous: return "remove-extraneous";
        case DirectionKind::CoreFix: return "core-fix";
        case DirectionKind::Sampled: return "sampled";
        case DirectionKind::Gradient: return "gradient";
        case DirectionKind::NegativeCurvature: return "negative-curvature";
    }
    return "unknown";
}

const std::vector<BlockIndex>& escape_blocks() {
    static const std::vector<BlockIndex> blocks = [] {
        std::vector<BlockIndex> out;
        for (int i = 1; i <= 2; ++i)
            for (int j = 1; j <= 2; ++j)
                for (int k = 1; k <= 2; ++k)
                    if (i == 2 || j == 2 || k == 2) out.push_back({i, j, k});
        return out;
    }();
    return blocks;
}

const Vector& SampledVectors::ambient(int mode) const {
    switch (mode) {
        case 1: return a;
        case 2: return b;
        case 3: return c;
        default: throw std::invalid_argument("mode must be 1, 2 or 3");
    }
}

const Vector& SampledVectors::core(int mode) const {
    switch (mode) {
        case 1: return u;
        case 2: return v;
        case 3: return w;
        default: throw std::invalid_argument("mode must be 1, 2 or 3");
    }
}

std::string ImprovementDirection::label() const {
    switch (kind) {
        case DirectionKind::Sampled:
            return "sampled(" + std::to_string(ijk[0]) + "," + std::to_string(ijk[1]) + "," +
                   std::to_string(ijk[2]) + ")";
        case DirectionKind::RemoveExtraneous: return "remove-extraneous(" + std::to_string(mode) + ")";
        default: return to_string(kind);
    }
}

Matrix pseudoinverse(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    Matrix out = Matrix::Zero(m.cols(), m.rows());
    if (s.size() == 0 || s(0) == 0.0) return out;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) <= 1e-12 * s(0)) break;
        out += (1.0 / s(i)) * svd.matrixV().col(i) * svd.matrixU().col(i).transpose();
    }
    return out;
}

SampledVectors sample_missing_directions(const SubspaceSplit& splits, const BlockIndex& ijk, Rng& rng) {
    SampledVectors out;
    out.ijk = ijk;
    std::array<Vector, 3> amb, core;
    for (int m = 1; m <= 3; ++m) {
        const auto idx = static_cast<std::size_t>(m - 1);
        const MatrixSplit& ms = splits.mode(m).parts;
        if (ijk[idx] == 1) {
            if (ms.U1.cols() == 0) {
                throw NoMissingDirection("mode " + std::to_string(m) + ": no singular value above sigma, (M1^T)^+ undefined");
            }
            amb[idx] = random_unit_in(ms.U1, rng);
            // (M1^T)^+ a = V1 diag(1/s) U1^T a, dropping numerically zero singular values.
            const Vector coeff = ms.U1.transpose() * amb[idx];
            Vector u = Vector::Zero(ms.V1.rows());
            const double smax = ms.singular_values(0);
            for (Eigen::Index i = 0; i < ms.U1.cols(); ++i) {
                const double s = ms.singular_values(i);
                if (s > 1e-12 * smax) u += (coeff(i) / s) * ms.V1.col(i);
            }
            const double n = u.norm();
            if (n == 0.0) throw NoMissingDirection("mode " + std::to_string(m) + ": pseudoinverse image is zero");
            core[idx] = u / n;
            out.alpha[idx] = 1.0 / n;
        } else if (ijk[idx] == 2) {
            if (ms.U2.cols() == 0 || ms.V2.cols() == 0) {
                throw NoMissingDirection("mode " + std::to_string(m) +
                                         ": factor has full rank above sigma, no missing direction");
            }
            amb[idx] = random_unit_in(ms.U2, rng);
            core[idx] = random_unit_in(ms.V2, rng);
            out.alpha[idx] = 0.0;
        } else {
            throw std::invalid_argument("block index entries must be 1 or 2");
        }
    }
    out.a = std::move(amb[0]);
    out.b = std::move(amb[1]);
    out.c = std::move(amb[2]);
    out.u = std::move(core[0]);
    out.v = std::move(core[1]);
    out.w = std::move(core[2]);
    return out;
}

ImprovementDirection build_sampled_direction(const SampledVectors& vec, double sigma) {
    const int missing = count_missing(vec.ijk);
    if (missing == 0) throw std::invalid_argument("sampled directions need at least one index equal to 2");
    const Eigen::Index r = vec.u.size();
    const Eigen::Index d = vec.a.size();
    if (vec.v.size() != r || vec.w.size() != r || vec.b.size() != d || vec.c.size() != d) {
        throw DimensionError("sampled vectors have inconsistent lengths");
    }
    const auto ru = static_cast<std::size_t>(r);
    const auto du = static_cast<std::size_t>(d);
    ImprovementDirection dir;
    dir.kind = DirectionKind::Sampled;
    dir.ijk = vec.ijk;
    dir.vectors = vec;
    dir.delta = FactorPoint::zeros(ru, du);
    dir.delta.S = Tensor3::outer(vec.u, vec.v, vec.w);
    const double scale = missing == 1 ? sigma : 1.0;
    for (int m = 1; m <= 3; ++m) {
        if (vec.ijk[static_cast<std::size_t>(m - 1)] == 2) {
            dir.delta.factor(m) = scale * vec.core(m) * vec.ambient(m).transpose();
        }
    }
    return dir;
}

SignSearchResult line_search_grid(const FactorPoint& p, const Tensor3& t, double lambda,
                                  const ImprovementDirection& dir, const std::vector<double>& steps) {
    SignSearchResult best;
    best.direction = dir;
    best.f_before = objective_f(p, t, lambda).f;
    best.f_after = best.f_before;
    for (double step : steps) {
        const double f = objective_f(axpy(p, step, dir.delta), t, lambda).f;
        ++best.evaluations;
        if (best.f_before - f > best.improvement) {
            best.improvement = best.f_before - f;
            best.step = step;
            best.f_after = f;
        }
    }
    return best;
}

SignSearchResult sign_flip_search(const FactorPoint& p, const Tensor3& t, double lambda,
                                  const ImprovementDirection& dir, const std::vector<double>& delta_grid) {
    const std::array<bool, 4> nonzero{norm_f(dir.delta.S) > 0.0, dir.delta.A.norm() > 0.0,
                                      dir.delta.B.norm() > 0.0, dir.delta.C.norm() > 0.0};
    SignSearchResult best;
    best.direction = dir;
    best.f_before = objective_f(p, t, lambda).f;
    best.f_after = best.f_before;
    for (unsigned mask = 0; mask < 16; ++mask) {
        std::array<int, 4> signs{1, 1, 1, 1};
        bool redundant = false;
        for (std::size_t b = 0; b < 4; ++b) {
            if (mask & (1u << b)) {
                if (!nonzero[b]) redundant = true;
                signs[b] = -1;
            }
        }
        if (redundant) continue;
        const FactorPoint signed_delta = dir.delta.scaled_blocks(sign_factors(signs));
        for (double step : delta_grid) {
            const double f = objective_f(axpy(p, step, signed_delta), t, lambda).f;
            ++best.evaluations;
            if (best.f_before - f > best.improvement) {
                best.improvement = best.f_before - f;
                best.step = step;
                best.f_after = f;
                best.direction.delta = signed_delta;
                best.direction.signs = signs;
            }
        }
    }
    if (best.improvement <= 0.0) {
        best.improvement = 0.0;
        best.step = 0.0;
    }
    return best;
}

std::vector<double> delta_grid(double center, int points, double decades) {
    if (!(center > 0.0) || points < 1) throw std::invalid_argument("delta_grid: need center > 0, points >= 1");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(points));
    if (points == 1) return {center};
    for (int i = 0; i < points; ++i) {
        const double e = -decades + 2.0 * decades * static_cast<double>(i) / static_cast<double>(points - 1);
        out.push_back(center * std::pow(10.0, e));
    }
    return out;
}

double delta_center(const BlockIndex& ijk, double sigma) {
    return count_missing(ijk) == 3 ? std::pow(sigma, 0.125) : std::pow(sigma, 0.25);
}

ImprovementDirection remove_extraneous_direction(const FactorPoint& p, const SubspaceSplit& splits, int mode) {
    const Matrix& m3 = splits.mode(mode).M3;
    if (m3.norm() <= 1e-14 * std::max(1.0, p.factor(mode).norm())) {
        throw NoDirection("mode " + std::to_string(mode) + ": factor already lies in the true subspace");
    }
    ImprovementDirection dir;
    dir.kind = DirectionKind::RemoveExtraneous;
    dir.mode = mode;
    dir.delta = FactorPoint::zeros(p.rank(), p.dim());
    dir.delta.factor(mode) = -m3;
    return dir;
}

ImprovementDirection core_fix_direction(const FactorPoint& p, const Tensor3& t, const SubspaceSplit& splits) {
    std::array<Matrix, 3> pinv, pv1;
    const auto r = static_cast<Eigen::Index>(p.rank());
    for (int m = 1; m <= 3; ++m) {
        const MatrixSplit& ms = splits.mode(m).parts;
        if (ms.rank1() == 0) throw NoDirection("mode " + std::to_string(m) + ": large singular part is empty");
        pinv[static_cast<std::size_t>(m - 1)] = pseudoinverse(ms.M1);
        pv1[static_cast<std::size_t>(m - 1)] = projector(ms.V1, r);
    }
    const Tensor3 target = multilinear_transform(t, pinv[0], pinv[1], pinv[2]);
    const Tensor3 current = multilinear_transform(p.S, pv1[0], pv1[1], pv1[2]);
    ImprovementDirection dir;
    dir.kind = DirectionKind::CoreFix;
    dir.delta = FactorPoint::zeros(p.rank(), p.dim());
    dir.delta.S = target - current;
    return dir;
}

}  // namespace tucker
