#pragma once

#include "periodolil/core.hpp"
#include "periodolil/processes.hpp"

#include <optional>

namespace periodolil {

/**
 * @brief S_n(t) = M_n(t) + R_n(t) for a linear process.
 *
 * D_ℓ(t) = e^{iℓt} A(e^{it}) ε_ℓ, M_n = Σ_{ℓ≤n} D_ℓ, R_n = S_n − M_n.
 * `R_n_projection` is computed independently from the projection form
 * R_n = Σ_{k≤n} e^{ikt} E₀X_k − Σ_{k>n} e^{ikt}(E_nX_k − E₀X_k).
 */
struct MartingaleDecomp {
    Frequency t;
    std::int64_t n = 0;
    cplx D0_coeff{};
    cplx S_n{};
    cplx M_n{};
    cplx R_n{};
    cplx R_n_projection{};
};

/// A(e^{it}) = Σ_j a_j e^{ijt}.
cplx transfer_function(const LinearSpec& spec, const Frequency& t);

/// Uses the first n values of a window generated from `spec` (innovations required).
MartingaleDecomp martingale_decompose_linear(const LinearSpec& spec, const TimeSeriesWindow& window,
                                             const Frequency& t, std::int64_t n);

/// E|R_n(t)|² = σ²(Σ_{i≥0}|Σ_{k=1}^n e^{ikt}a_{k+i}|² + Σ_{ℓ=1}^n|Σ_{k>n} e^{ikt}a_{k−ℓ}|²).
double remainder_variance_linear(const LinearSpec& spec, const Frequency& t, std::int64_t n);

struct PartestReport {
    std::int64_t n = 0;
    std::size_t grid = 0;
    std::size_t replicates = 0;
    Estimate lhs;                      // mean over t (dt/2π) of E|R_n(t)|²
    double rhs = 0.0;                  // 2 Σ_{k=1}^n ‖E₀X_k‖²
    std::optional<double> ratio;       // absent when rhs = 0
    std::optional<double> ratio_se;
};

/// Monte Carlo check of mean_t E|R_n(t)|² = 2 Σ_{k≤n} ‖E₀X_k‖². The t-average
/// uses `grid` equispaced nodes (trapezoid on the circle), which is exact
/// once grid ≥ n + J.
PartestReport partest_identity_check(const LinearSpec& spec, std::int64_t n, std::size_t grid,
                                     std::size_t replicates, const SeedSpec& seed);

}  // namespace periodolil
