#pragma once

#include "periodolil/core.hpp"
#include "periodolil/diagnostics/conditions.hpp"
#include "periodolil/processes.hpp"

#include <functional>
#include <vector>

namespace periodolil {

/// ‖E₀X_k‖₂² = σ² Σ_{j≥k} a_j² for a linear process (0 beyond the truncation order).
double e0_norm_linear(const LinearSpec& spec, std::int64_t k);

/// Monte Carlo budget for nested conditional expectations.
struct NestedBudget {
    std::size_t outer = 2000;          // independent stationary starting states
    std::size_t inner_start = 64;      // initial number of futures per state
    std::size_t inner_max = 1 << 14;   // futures cap; doubling stops here
    double rel_se = 0.05;              // target SE relative to the estimate
};

struct NestedEstimate {
    double value = 0.0;
    double se = 0.0;
    std::size_t inner = 0;
    bool inconclusive = false;         // SE target not reached within budget
};

/**
 * @brief ‖E₀g(Y_k) − μ(g)‖₂² for a Markov kernel by coupled trajectories.
 *
 * Each outer state Y₀ is drawn by burn-in from the kernel's start; M futures
 * of length k are simulated from it and the squared deviation of their mean
 * is debiased by the inner sample variance over M. M doubles until the SE is
 * below rel_se of the estimate. The iid kernel returns 0 exactly.
 * Supported kernels: IidSpec, ARLSpec, MetropolisSpec.
 */
NestedEstimate e0_norm_markov(const ProcessSpec& kernel, const ScalarFunction& g, std::int64_t k,
                              const NestedBudget& budget, const SeedSpec& seed);

/// ‖E₀S_n(t)‖₂ for n = 1..n_max for a complex observable of the kernel state,
/// centered by its stationary mean. Reported through rootzen_report.
ConditionReport rootzen_condition_markov(const ProcessSpec& kernel, const std::function<cplx(double)>& observable,
                                         const Frequency& t, std::int64_t n_max, const NestedBudget& budget,
                                         const SeedSpec& seed);

/// (Tg)(x) = E[g(Y₁) | Y₀ = x] for the Metropolis kernel, with ν(g) supplied.
double metropolis_transition(const MetropolisSpec& spec, const ScalarFunction& g, double nu_g, double x);

}  // namespace periodolil
