#include "tucker/factor_point.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "tucker/errors.hpp"

namespace tucker {

FactorPoint::FactorPoint(Tensor3 s, Matrix a, Matrix b, Matrix c)
    : S(std::move(s)), A(std::move(a)), B(std::move(b)), C(std::move(c)) {
    check_shapes();
}

FactorPoint FactorPoint::zeros(std::size_t r, std::size_t d) {
    const auto ri = static_cast<Eigen::Index>(r);
    const auto di = static_cast<Eigen::Index>(d);
    return {Tensor3({r, r, r}), Matrix::Zero(ri, di), Matrix::Zero(ri, di), Matrix::Zero(ri, di)};
}

FactorPoint FactorPoint::random_normal(std::size_t r, std::size_t d, double scale, Rng& rng) {
    FactorPoint p = zeros(r, d);
    for (double& x : p.S.data()) x = scale * rng.normal();
    for (int m = 1; m <= 3; ++m) {
        Matrix& f = p.factor(m);
        for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = scale * rng.normal();
    }
    return p;
}

const Matrix& FactorPoint::factor(int mode) const {
    switch (mode) {
        case 1: return A;
        case 2: return B;
        case 3: return C;
        default: throw std::invalid_argument("factor mode must be 1, 2 or 3, got " + std::to_string(mode));
    }
}

Matrix& FactorPoint::factor(int mode) {
    return const_cast<Matrix&>(std::as_const(*this).factor(mode));
}

void FactorPoint::check_shapes() const {
    const auto& sd = S.dims();
    if (sd[0] != sd[1] || sd[1] != sd[2]) throw DimensionError("core tensor must be r x r x r");
    const auto r = static_cast<Eigen::Index>(sd[0]);
    const Eigen::Index d = A.cols();
    for (int m = 1; m <= 3; ++m) {
        const Matrix& f = factor(m);
        if (f.rows() != r || f.cols() != d) {
            throw DimensionError("factor " + std::to_string(m) + " has shape " + std::to_string(f.rows()) + "x" +
                                 std::to_string(f.cols()) + ", expected " + std::to_string(r) + "x" +
                                 std::to_string(d));
        }
    }
}

bool FactorPoint::same_shape(const FactorPoint& other) const {
    return S.dims() == other.S.dims() && A.rows() == other.A.rows() && A.cols() == other.A.cols() &&
           B.rows() == other.B.rows() && B.cols() == other.B.cols() && C.rows() == other.C.rows() &&
           C.cols() == other.C.cols();
}

bool FactorPoint::all_finite() const {
    return S.all_finite() && A.allFinite() && B.allFinite() && C.allFinite();
}

FactorPoint& FactorPoint::operator+=(const FactorPoint& other) {
    if (!same_shape(other)) throw DimensionError("factor point shape mismatch in +=");
    S += other.S;
    A += other.A;
    B += other.B;
    C += other.C;
    return *this;
}

FactorPoint& FactorPoint::operator-=(const FactorPoint& other) {
    if (!same_shape(other)) throw DimensionError("factor point shape mismatch in -=");
    S -= other.S;
    A -= other.A;
    B -= other.B;
    C -= other.C;
    return *this;
}

FactorPoint& FactorPoint::operator*=(double s) {
    S *= s;
    A *= s;
    B *= s;
    C *= s;
    return *this;
}

FactorPoint FactorPoint::scaled_blocks(const std::array<double, 4>& factors) const {
    FactorPoint out = *this;
    out.S *= factors[0];
    out.A *= factors[1];
    out.B *= factors[2];
    out.C *= factors[3];
    return out;
}

FactorPoint operator+(FactorPoint a, const FactorPoint& b) { return a += b; }
FactorPoint operator-(FactorPoint a, const FactorPoint& b) { return a -= b; }
FactorPoint operator*(double s, FactorPoint a) { return a *= s; }

double inner(const FactorPoint& p, const FactorPoint& q) {
    if (!p.same_shape(q)) throw DimensionError("factor point shape mismatch in inner");
    return inner(p.S, q.S) + p.A.cwiseProduct(q.A).sum() + p.B.cwiseProduct(q.B).sum() +
           p.C.cwiseProduct(q.C).sum();
}

double norm_f(const FactorPoint& p) { return std::sqrt(inner(p, p)); }

FactorPoint axpy(const FactorPoint& p, double step, const FactorPoint& dir) {
    FactorPoint out = p;
    if (step != 0.0) out += step * dir;
    return out;
}

Tensor3 reconstruct(const FactorPoint& p) { return multilinear_transform(p.S, p.A, p.B, p.C); }

}  // namespace tucker
