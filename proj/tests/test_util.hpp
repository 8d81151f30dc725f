#pragma once

#include "periodolil/core.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace periodolil::test {

// Batch-means estimate of the mean of a (possibly correlated) series.
inline Estimate batch_mean(std::span<const double> x, std::size_t batches = 64) {
    const std::size_t b = x.size() / batches;
    std::vector<double> means(batches, 0.0);
    for (std::size_t i = 0; i < batches; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < b; ++j) s += x[i * b + j];
        means[i] = s / static_cast<double>(b);
    }
    return mean_and_se(means);
}

inline std::vector<double> map_values(std::span<const double> x, double (*f)(double)) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
    return out;
}

inline double within_se(double value, double target, double se) { return std::abs(value - target) / se; }

}  // namespace periodolil::test
