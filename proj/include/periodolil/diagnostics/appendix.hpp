#pragma once

#include "periodolil/core.hpp"

#include <span>

namespace periodolil {

/// (1/n) Σ_{k=1}^n e^{iks} x_k.
cplx rotated_average(std::span<const double> x, const Frequency& s);

struct AlgInequality {
    double lhs = 0.0;  // (a + b)^S
    double rhs = 0.0;  // 2^S b^S + a^S (1 + 2^{S+1} b / a)
    bool holds = false;
};

/// Requires a > 0, b > 0, S ≥ 1; throws std::invalid_argument otherwise.
AlgInequality alg_inequality_check(double a, double b, double S);

}  // namespace periodolil
