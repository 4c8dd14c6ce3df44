#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "tucker/factor_point.hpp"
#include "tucker/tensor.hpp"

namespace tucker {

// Regularizer weight 1/(16 r^4).
double default_lambda(std::size_t r);

struct ObjectiveReport {
    double L = 0.0;       // ||S(A,B,C) - T||_F^2
    double phi = 0.0;     // sum_m ||M M^T - S_(m) S_(m)^T||_F^2
    double R = 0.0;       // phi^2
    double f = 0.0;       // L + lambda R
    double lambda = 0.0;
};

// Throws DimensionError unless T is d x d x d with d = p.dim().
void check_compatible(const FactorPoint& p, const Tensor3& t);

double loss_L(const FactorPoint& p, const Tensor3& t);
double reg_phi(const FactorPoint& p);
ObjectiveReport objective_f(const FactorPoint& p, const Tensor3& t, double lambda);

// Gram difference M M^T - S_(m) S_(m)^T for mode m.
Matrix gram_difference(const FactorPoint& p, int mode);

struct GradientParts {
    FactorPoint grad_L;
    FactorPoint grad_phi;
    double phi = 0.0;
    double L = 0.0;

    // grad R = 2 phi grad phi
    FactorPoint grad_R() const;
    // grad L + lambda grad R
    FactorPoint grad_f(double lambda) const;
};

// Analytic gradients of L and phi in one pass.
GradientParts gradient_parts(const FactorPoint& p, const Tensor3& t);
FactorPoint grad_f(const FactorPoint& p, const Tensor3& t, double lambda);

// Central-difference Hessian-vector product of the analytic gradient. With
// h <= 0 the step defaults to 1e-5 (1 + ||p||) / ||dir||.
FactorPoint hvp(const FactorPoint& p, const FactorPoint& dir, const Tensor3& t, double lambda, double h = 0.0);

// f(p + step * dir) for each step.
std::vector<std::pair<double, double>> eval_along(const FactorPoint& p, const FactorPoint& dir, const Tensor3& t,
                                                  double lambda, const std::vector<double>& steps);

}  // namespace tucker
