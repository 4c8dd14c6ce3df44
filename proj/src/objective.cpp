#include "tucker/objective.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tucker/errors.hpp"

namespace tucker {

double default_lambda(std::size_t r) {
    const double rr = static_cast<double>(r);
    return 1.0 / (16.0 * rr * rr * rr * rr);
}

void check_compatible(const FactorPoint& p, const Tensor3& t) {
    p.check_shapes();
    const std::size_t d = p.dim();
    if (t.dims() != Dims{d, d, d}) {
        throw DimensionError("tensor dims " + std::to_string(t.dim(1)) + "x" + std::to_string(t.dim(2)) + "x" +
                             std::to_string(t.dim(3)) + " do not match factor dimension " + std::to_string(d));
    }
}

double loss_L(const FactorPoint& p, const Tensor3& t) {
    check_compatible(p, t);
    const Tensor3 diff = reconstruct(p) - t;
    return inner(diff, diff);
}

Matrix gram_difference(const FactorPoint& p, int mode) {
    const Matrix& m = p.factor(mode);
    const Matrix s = flatten(p.S, mode);
    return m * m.transpose() - s * s.transpose();
}

double reg_phi(const FactorPoint& p) {
    p.check_shapes();
    double phi = 0.0;
    for (int m = 1; m <= 3; ++m) phi += gram_difference(p, m).squaredNorm();
    return phi;
}

ObjectiveReport objective_f(const FactorPoint& p, const Tensor3& t, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
    ObjectiveReport rep;
    rep.L = loss_L(p, t);
    rep.phi = reg_phi(p);
    rep.R = rep.phi * rep.phi;
    rep.lambda = lambda;
    rep.f = rep.L + lambda * rep.R;
    return rep;
}

FactorPoint GradientParts::grad_R() const { return (2.0 * phi) * grad_phi; }

FactorPoint GradientParts::grad_f(double lambda) const {
    FactorPoint g = grad_L;
    if (lambda != 0.0 && phi != 0.0) g += (2.0 * lambda * phi) * grad_phi;
    return g;
}

GradientParts gradient_parts(const FactorPoint& p, const Tensor3& t) {
    check_compatible(p, t);
    GradientParts out;
    const Tensor3 diff = reconstruct(p) - t;
    out.L = inner(diff, diff);

    // grad_S L = 2 D(A^T, B^T, C^T); grad_A L = 2 S_(1)(B (x) C) D_(1)^T and analogues.
    Tensor3 gs = multilinear_transform(diff, p.A.transpose(), p.B.transpose(), p.C.transpose());
    gs *= 2.0;
    const Tensor3 s_ibc = mode_product(mode_product(p.S, p.B, 2), p.C, 3);
    const Tensor3 s_aic = mode_product(mode_product(p.S, p.A, 1), p.C, 3);
    const Tensor3 s_abi = mode_product(mode_product(p.S, p.A, 1), p.B, 2);
    Matrix ga = 2.0 * flatten(s_ibc, 1) * flatten(diff, 1).transpose();
    Matrix gb = 2.0 * flatten(s_aic, 2) * flatten(diff, 2).transpose();
    Matrix gc = 2.0 * flatten(s_abi, 3) * flatten(diff, 3).transpose();
    out.grad_L = FactorPoint(std::move(gs), std::move(ga), std::move(gb), std::move(gc));

    // grad_M phi = 4 G_m M; grad_S phi = -4 sum_m S x_m G_m, G_m = M M^T - S_(m) S_(m)^T.
    const std::array<Matrix, 3> g{gram_difference(p, 1), gram_difference(p, 2), gram_difference(p, 3)};
    out.phi = g[0].squaredNorm() + g[1].squaredNorm() + g[2].squaredNorm();
    Tensor3 gs_phi = mode_product(p.S, g[0], 1);
    gs_phi += mode_product(p.S, g[1], 2);
    gs_phi += mode_product(p.S, g[2], 3);
    gs_phi *= -4.0;
    out.grad_phi = FactorPoint(std::move(gs_phi), 4.0 * g[0] * p.A, 4.0 * g[1] * p.B, 4.0 * g[2] * p.C);
    return out;
}

FactorPoint grad_f(const FactorPoint& p, const Tensor3& t, double lambda) {
    return gradient_parts(p, t).grad_f(lambda);
}

FactorPoint hvp(const FactorPoint& p, const FactorPoint& dir, const Tensor3& t, double lambda, double h) {
    const double dn = norm_f(dir);
    if (!(dn > 0.0)) throw std::invalid_argument("hvp: direction must be nonzero");
    if (h <= 0.0) h = 1e-5 * (1.0 + norm_f(p)) / dn;
    FactorPoint plus = grad_f(axpy(p, h, dir), t, lambda);
    plus -= grad_f(axpy(p, -h, dir), t, lambda);
    plus *= 1.0 / (2.0 * h);
    return plus;
}

std::vector<std::pair<double, double>> eval_along(const FactorPoint& p, const FactorPoint& dir, const Tensor3& t,
                                                  double lambda, const std::vector<double>& steps) {
    std::vector<std::pair<double, double>> out;
    out.reserve(steps.size());
    for (double s : steps) out.emplace_back(s, objective_f(axpy(p, s, dir), t, lambda).f);
    return out;
}

}  // namespace tucker
