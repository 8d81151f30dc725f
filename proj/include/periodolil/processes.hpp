#pragma once

#include "periodolil/core.hpp"
#include "periodolil/functions.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace periodolil {

/// Relative ℓ²-tail left after truncating an infinite coefficient sequence.
inline constexpr double kTruncationTail = 1e-8;

/// Default lengths for burn-in and centering pre-passes.
inline constexpr std::int64_t kDefaultBurnIn = 10000;
inline constexpr std::int64_t kMinCenteringSamples = std::int64_t{1} << 16;

// ---------------------------------------------------------------------------
// Process parameters

struct IidSpec {
    InnovationDist innovation;

    friend bool operator==(const IidSpec&, const IidSpec&) = default;
};

/// X_k = Σ_{j=0}^{J} a_j ε_{k−j}.
struct LinearSpec {
    std::vector<double> coeffs;
    InnovationDist innovation;

    std::int64_t truncation_order() const { return static_cast<std::int64_t>(coeffs.size()) - 1; }
    /// σ²·Σ a_j² = var(X₀).
    double variance() const;

    friend bool operator==(const LinearSpec&, const LinearSpec&) = default;
};

/// a_j = ρ^j, truncated at `order` or, when absent, at the first J whose
/// discarded ℓ²-tail is at most kTruncationTail of the total.
std::vector<double> geometric_coeffs(double rho, std::optional<std::int64_t> order = std::nullopt);
/// a_0 = 1, a_j = j^{−β} for 1 ≤ j ≤ order. Slowly decaying tails cannot meet
/// the kTruncationTail rule at any practical order, so the order is explicit.
std::vector<double> power_coeffs(double beta, std::int64_t order);

/// X_k = h(Σ a_i ε_{k−i}) − E h(·).
struct FunctionOfLinearSpec {
    LinearSpec base;
    ScalarFunction h;

    friend bool operator==(const FunctionOfLinearSpec&, const FunctionOfLinearSpec&) = default;
};

/// Y_n = h(Y_{n−1}) + ε_n with the canonical drift h(t) = ∫₀^t (1 − C(1+|s|)^{−δ}) ds.
struct ARLSpec {
    double C = 0.5;
    double delta = 0.0;
    InnovationDist innovation = InnovationDist::gaussian(1.0);
    std::int64_t burn_in = 1000;

    friend bool operator==(const ARLSpec&, const ARLSpec&) = default;
};

double arl_drift(double C, double delta, double t);
double arl_drift_derivative(double C, double delta, double t);

/// Chain with kernel L_γ observed through f, realized by reversing a
/// stationary forward orbit of the intermittent map.
struct IntermittentSpec {
    double gamma = 0.5;
    std::int64_t burn_in = kDefaultBurnIn;
    ScalarFunction observable = ScalarFunction::identity();

    friend bool operator==(const IntermittentSpec&, const IntermittentSpec&) = default;
};

/// T_γ(x) = x(1 + 2^γ x^γ) on [0, 1/2), 2x − 1 on [1/2, 1].
double intermittent_map(double gamma, double x);
double intermittent_map_derivative(double gamma, double x);

/// Independent Metropolis–Hastings kernel T(x,·) = p(x)δ_x + (1 − p(x))ν.
struct MetropolisSpec {
    ScalarFunction stay_probability = ScalarFunction::constant(0.5);
    InnovationDist base = InnovationDist::uniform(-1.0, 1.0);
    ScalarFunction observable = ScalarFunction::identity();
    std::int64_t burn_in = 1000;

    friend bool operator==(const MetropolisSpec&, const MetropolisSpec&) = default;
};

using ProcessSpec = std::variant<IidSpec, LinearSpec, FunctionOfLinearSpec, ARLSpec, IntermittentSpec, MetropolisSpec>;

std::string process_kind(const ProcessSpec& spec);

// ---------------------------------------------------------------------------
// Windows

struct WindowMetadata {
    double centering = 0.0;                 // constant subtracted from raw observables
    std::int64_t centering_samples = 0;     // pre-pass length, 0 when no pre-pass ran
    std::int64_t truncation_order = -1;     // J for filter-based processes
    std::int64_t burn_in = 0;
};

/**
 * @brief Sample path X_1..X_n of a generated process.
 *
 * For filter-based processes the innovations ε_{1−J}..ε_n are retained so
 * the path (and its martingale decomposition) can be recomputed exactly.
 */
struct TimeSeriesWindow {
    std::vector<double> values;
    std::optional<std::vector<double>> innovations;
    ProcessSpec spec;
    SeedSpec seed;
    WindowMetadata meta;

    std::size_t size() const noexcept { return values.size(); }
    /// ε_k for 1 − J ≤ k ≤ n. Requires innovations.
    double innovation(std::int64_t k) const;
};

TimeSeriesWindow gen_iid(const IidSpec& spec, const SeedSpec& seed, std::int64_t n);
TimeSeriesWindow gen_linear(const LinearSpec& spec, const SeedSpec& seed, std::int64_t n);
TimeSeriesWindow gen_function_of_linear(const FunctionOfLinearSpec& spec, const SeedSpec& seed, std::int64_t n);
TimeSeriesWindow gen_arl(const ARLSpec& spec, const SeedSpec& seed, std::int64_t n);
TimeSeriesWindow gen_intermittent(const IntermittentSpec& spec, const SeedSpec& seed, std::int64_t n);
TimeSeriesWindow gen_metropolis(const MetropolisSpec& spec, const SeedSpec& seed, std::int64_t n);

/// Forward orbit x₁, T_γx₁, … after burn-in from a uniform start (process stream of `seed`).
std::vector<double> intermittent_orbit(double gamma, std::int64_t burn_in, std::int64_t n, const SeedSpec& seed);

TimeSeriesWindow generate(const ProcessSpec& spec, const SeedSpec& seed, std::int64_t n);

/// Applies the filter to an innovation window ε_{1−J}..ε_n, returning X_1..X_n.
std::vector<double> apply_filter(std::span<const double> coeffs, std::span<const double> innovations);

// ---------------------------------------------------------------------------
// Single-step kernels shared with the diagnostics machinery

double arl_step(const ARLSpec& spec, double y, InnovationSampler& noise, Engine& rng);
double metropolis_step(const MetropolisSpec& spec, double x, InnovationSampler& base, Engine& rng);

/// Monte Carlo estimate of θ = ∫ 1/(1 − p) dν.
Estimate metropolis_theta(const MetropolisSpec& spec, const SeedSpec& seed, std::int64_t samples);

/// Checks |h(x) − h(y)| ≤ C|x − y|^γ M^α + 1e−9 on random pairs in [−M, M].
bool holder_spot_check(const ScalarFunction& h, double M, std::int64_t pairs, Engine& rng);

}  // namespace periodolil
