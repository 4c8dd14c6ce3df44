#include "tucker/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tucker/errors.hpp"
#include "tucker/factor_point.hpp"

namespace tucker {

namespace {

std::string dims_str(const Dims& d) {
    return std::to_string(d[0]) + "x" + std::to_string(d[1]) + "x" + std::to_string(d[2]);
}

void check_mode(int mode) {
    if (mode < 1 || mode > 3) throw std::invalid_argument("mode must be 1, 2 or 3, got " + std::to_string(mode));
}

void check_same_dims(const Tensor3& x, const Tensor3& y, const char* op) {
    if (x.dims() != y.dims()) {
        throw DimensionError(std::string(op) + ": dims " + dims_str(x.dims()) + " vs " + dims_str(y.dims()));
    }
}

// X(I, v, w), X(u, I, w), X(u, v, I)
Vector contract_all_but(const Tensor3& x, int mode, const Vector& p, const Vector& q) {
    const auto& d = x.dims();
    Vector out = Vector::Zero(static_cast<Eigen::Index>(d[static_cast<std::size_t>(mode - 1)]));
    for (std::size_t i = 0; i < d[0]; ++i)
        for (std::size_t j = 0; j < d[1]; ++j)
            for (std::size_t k = 0; k < d[2]; ++k) {
                const double v = x(i, j, k);
                const auto ii = static_cast<Eigen::Index>(i);
                const auto jj = static_cast<Eigen::Index>(j);
                const auto kk = static_cast<Eigen::Index>(k);
                switch (mode) {
                    case 1: out(ii) += v * p(jj) * q(kk); break;
                    case 2: out(jj) += v * p(ii) * q(kk); break;
                    default: out(kk) += v * p(ii) * q(jj); break;
                }
            }
    return out;
}

Vector unit_normal(Eigen::Index n, Rng& rng) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
    return v / v.norm();
}

}  // namespace

Tensor3::Tensor3(Dims dims) : dims_(dims), data_(dims[0] * dims[1] * dims[2], 0.0) {}

Tensor3::Tensor3(Dims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
    if (data_.size() != dims[0] * dims[1] * dims[2]) {
        throw DimensionError("tensor data has " + std::to_string(data_.size()) + " entries, dims " +
                             dims_str(dims) + " require " + std::to_string(dims[0] * dims[1] * dims[2]));
    }
}

Tensor3 Tensor3::random_normal(Dims dims, Rng& rng) {
    Tensor3 t(dims);
    for (double& x : t.data_) x = rng.normal();
    return t;
}

Tensor3 Tensor3::outer(const Vector& a, const Vector& b, const Vector& c) {
    Tensor3 t({static_cast<std::size_t>(a.size()), static_cast<std::size_t>(b.size()),
               static_cast<std::size_t>(c.size())});
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < b.size(); ++j)
            for (Eigen::Index k = 0; k < c.size(); ++k)
                t(static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k)) =
                    a(i) * b(j) * c(k);
    return t;
}

Tensor3& Tensor3::operator+=(const Tensor3& other) {
    check_same_dims(*this, other, "tensor +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
    check_same_dims(*this, other, "tensor -=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Tensor3& Tensor3::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

bool Tensor3::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

Matrix flatten(const Tensor3& x, int mode) {
    check_mode(mode);
    const auto& d = x.dims();
    const auto rows = static_cast<Eigen::Index>(d[static_cast<std::size_t>(mode - 1)]);
    const auto cols = static_cast<Eigen::Index>(x.size()) / std::max<Eigen::Index>(rows, 1);
    Matrix m(rows, cols);
    if (mode == 1) {
        std::copy(x.data().begin(), x.data().end(), m.data());
        return m;
    }
    for (std::size_t i = 0; i < d[0]; ++i)
        for (std::size_t j = 0; j < d[1]; ++j)
            for (std::size_t k = 0; k < d[2]; ++k) {
                if (mode == 2)
                    m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i * d[2] + k)) = x(i, j, k);
                else
                    m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i * d[1] + j)) = x(i, j, k);
            }
    return m;
}

Tensor3 unflatten(const Matrix& m, int mode, Dims dims) {
    check_mode(mode);
    const std::size_t rows = dims[static_cast<std::size_t>(mode - 1)];
    const std::size_t total = dims[0] * dims[1] * dims[2];
    if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.size()) != total) {
        throw DimensionError("unflatten: matrix " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             " does not fit dims " + dims_str(dims) + " along mode " + std::to_string(mode));
    }
    Tensor3 x(dims);
    if (mode == 1) {
        std::copy(m.data(), m.data() + m.size(), x.data().begin());
        return x;
    }
    for (std::size_t i = 0; i < dims[0]; ++i)
        for (std::size_t j = 0; j < dims[1]; ++j)
            for (std::size_t k = 0; k < dims[2]; ++k) {
                if (mode == 2)
                    x(i, j, k) = m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i * dims[2] + k));
                else
                    x(i, j, k) = m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i * dims[1] + j));
            }
    return x;
}

Matrix kron(const Matrix& p, const Matrix& q) {
    Matrix out(p.rows() * q.rows(), p.cols() * q.cols());
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j)
            out.block(i * q.rows(), j * q.cols(), q.rows(), q.cols()) = p(i, j) * q;
    return out;
}

Tensor3 mode_product(const Tensor3& x, const Matrix& m, int mode) {
    check_mode(mode);
    if (static_cast<std::size_t>(m.rows()) != x.dim(mode)) {
        throw DimensionError("mode " + std::to_string(mode) + ": tensor has size " + std::to_string(x.dim(mode)) +
                             " but matrix has " + std::to_string(m.rows()) + " rows");
    }
    Dims out_dims = x.dims();
    out_dims[static_cast<std::size_t>(mode - 1)] = static_cast<std::size_t>(m.cols());
    const Matrix y = m.transpose() * flatten(x, mode);
    return unflatten(y, mode, out_dims);
}

Tensor3 multilinear_transform(const Tensor3& s, const Matrix& a, const Matrix& b, const Matrix& c) {
    return mode_product(mode_product(mode_product(s, a, 1), b, 2), c, 3);
}

double trilinear(const Tensor3& x, const Vector& a, const Vector& b, const Vector& c) {
    const auto& d = x.dims();
    if (static_cast<std::size_t>(a.size()) != d[0] || static_cast<std::size_t>(b.size()) != d[1] ||
        static_cast<std::size_t>(c.size()) != d[2]) {
        throw DimensionError("trilinear: vector lengths do not match dims " + dims_str(d));
    }
    return a.dot(contract_all_but(x, 1, b, c));
}

double inner(const Tensor3& x, const Tensor3& y) {
    check_same_dims(x, y, "inner");
    double acc = 0.0;
    const auto xd = x.data();
    const auto yd = y.data();
    for (std::size_t i = 0; i < xd.size(); ++i) acc += xd[i] * yd[i];
    return acc;
}

double norm_f(const Tensor3& x) { return std::sqrt(inner(x, x)); }

double matrix_norm2(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

SpectralTriple spectral_norm(const Tensor3& x, int restarts, double tol, int max_iters, std::uint64_t seed) {
    if (restarts < 1) throw std::invalid_argument("spectral_norm: restarts must be >= 1");
    const auto& d = x.dims();
    const auto n1 = static_cast<Eigen::Index>(d[0]);
    const auto n2 = static_cast<Eigen::Index>(d[1]);
    const auto n3 = static_cast<Eigen::Index>(d[2]);

    SpectralTriple best;
    best.u = Vector::Unit(n1, 0);
    best.v = Vector::Unit(n2, 0);
    best.w = Vector::Unit(n3, 0);
    if (norm_f(x) == 0.0) return best;

    Rng rng(seed);
    best.sigma = -1.0;
    for (int restart = 0; restart < restarts; ++restart) {
        Vector v, w;
        if (restart == 0) {
            v = leading_left_singular_vectors(flatten(x, 2), 1).col(0);
            w = leading_left_singular_vectors(flatten(x, 3), 1).col(0);
        } else {
            v = unit_normal(n2, rng);
            w = unit_normal(n3, rng);
        }
        Vector u = Vector::Unit(n1, 0);
        double sigma = 0.0;
        int it = 0;
        for (; it < max_iters; ++it) {
            Vector nu = contract_all_but(x, 1, v, w);
            if (nu.norm() == 0.0) break;
            u = nu / nu.norm();
            Vector nv = contract_all_but(x, 2, u, w);
            if (nv.norm() == 0.0) break;
            v = nv / nv.norm();
            Vector nw = contract_all_but(x, 3, u, v);
            const double next = nw.norm();
            if (next == 0.0) break;
            w = nw / next;
            const bool done = std::abs(next - sigma) <= tol * std::max(1.0, next);
            sigma = next;
            if (done) break;
        }
        if (sigma > best.sigma) {
            best.sigma = sigma;
            best.u = u;
            best.v = v;
            best.w = w;
            best.iterations = it;
        }
    }
    best.sigma = std::max(best.sigma, 0.0);
    const double r1 = (contract_all_but(x, 1, best.v, best.w) - best.sigma * best.u).norm();
    const double r2 = (contract_all_but(x, 2, best.u, best.w) - best.sigma * best.v).norm();
    const double r3 = (contract_all_but(x, 3, best.u, best.v) - best.sigma * best.w).norm();
    best.residual = std::max({r1, r2, r3});
    return best;
}

void canonicalize_column_signs(Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (std::abs(m(i, j)) > 1e-12) {
                if (m(i, j) < 0.0) m.col(j) *= -1.0;
                break;
            }
        }
    }
}

Matrix leading_left_singular_vectors(const Matrix& m, std::size_t count) {
    const auto k = static_cast<Eigen::Index>(count);
    if (k > m.rows()) throw DimensionError("requested more singular vectors than rows");
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
    Matrix u = svd.matrixU().leftCols(k);
    canonicalize_column_signs(u);
    return u;
}

FactorPoint hosvd(const Tensor3& t, std::size_t r) {
    const auto& d = t.dims();
    if (r < 1 || r > std::min({d[0], d[1], d[2]})) {
        throw DimensionError("hosvd: rank " + std::to_string(r) + " outside [1, min dims] for " + dims_str(d));
    }
    if (d[0] != d[1] || d[1] != d[2]) throw DimensionError("hosvd: factor points require equal dims");
    Matrix a = leading_left_singular_vectors(flatten(t, 1), r).transpose();
    Matrix b = leading_left_singular_vectors(flatten(t, 2), r).transpose();
    Matrix c = leading_left_singular_vectors(flatten(t, 3), r).transpose();
    Tensor3 s = multilinear_transform(t, a.transpose(), b.transpose(), c.transpose());
    return {std::move(s), std::move(a), std::move(b), std::move(c)};
}

}  // namespace tucker
