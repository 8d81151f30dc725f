#include "periodolil/diagnostics/appendix.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace periodolil {

cplx rotated_average(std::span<const double> x, const Frequency& s) {
    if (x.empty()) throw std::invalid_argument("rotated average of an empty window");
    cplx acc{0.0, 0.0};
    for (std::size_t k = 0; k < x.size(); ++k) acc += s.phase(static_cast<std::int64_t>(k) + 1) * x[k];
    return acc / static_cast<double>(x.size());
}

AlgInequality alg_inequality_check(double a, double b, double S) {
    if (!(a > 0.0) || !(b > 0.0) || !(S >= 1.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(S))
        throw std::invalid_argument(fmt::format("alg inequality needs a > 0, b > 0, S >= 1 (got {}, {}, {})", a, b, S));
    AlgInequality r;
    r.lhs = std::pow(a + b, S);
    r.rhs = std::pow(2.0, S) * std::pow(b, S) + std::pow(a, S) * (1.0 + std::pow(2.0, S + 1.0) * b / a);
    r.holds = r.lhs <= r.rhs;
    return r;
}

}  // namespace periodolil
