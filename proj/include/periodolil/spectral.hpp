#pragma once

#include "periodolil/core.hpp"
#include "periodolil/processes.hpp"

#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace periodolil {

enum class DensityProvenance { analytic_linear, fejer_from_autocov, smoothed_periodogram };

std::string to_string(DensityProvenance p);

/// f(t) together with where it came from. f integrates to var(X₀) over [0, 2π).
struct SpectralDensity {
    std::function<double(const Frequency&)> eval;
    DensityProvenance provenance = DensityProvenance::analytic_linear;
    std::string params_hash;

    double operator()(const Frequency& t) const { return eval(t); }
};

/// Autocovariances c_0..c_{J_max}; c_{−j} = c_j.
struct AutocovSeq {
    std::vector<double> c;

    std::int64_t max_lag() const noexcept { return static_cast<std::int64_t>(c.size()) - 1; }
    /// Throws data_error unless c_0 ≥ |c_j| and the Toeplitz sections up to 8×8 are PSD.
    void validate() const;
};

/// c_j = σ² Σ_i a_i a_{i+j} for j ≤ max_lag.
AutocovSeq autocov_linear(const LinearSpec& spec, std::int64_t max_lag);

/// σ²|A(e^{it})|²/(2π).
double linear_density(const LinearSpec& spec, const Frequency& t);

/// Order-m Cesàro mean of (1/2π) Σ c_j e^{−ijt}. Requires 1 ≤ m ≤ J_max.
double fejer_density(const AutocovSeq& c, const Frequency& t, std::int64_t m);

/// ⌊n^{0.4}⌋, at least 1.
std::int64_t default_half_width(std::int64_t n);

/// Daniell average of I_n over the 2m+1 Fourier frequencies nearest t.
/// Throws data_error when that band reaches j = 0 (mod n).
double smoothed_periodogram(std::span<const double> x, const Frequency& t, std::int64_t m);

/// Same estimator from precomputed grid periodogram values I_n(2πj/n).
double smoothed_periodogram_from_grid(std::span<const double> grid_periodogram, const Frequency& t, std::int64_t m);

/// Monte Carlo mean of |S_n(t)|²/n over independent replicates (at least 30).
Estimate sigma_t_estimate(const ProcessSpec& spec, const Frequency& t, std::int64_t n, std::size_t replicates,
                          const SeedSpec& seed);

SpectralDensity make_linear_density(const LinearSpec& spec);
SpectralDensity make_fejer_density(AutocovSeq c, std::int64_t m);
/// Mean of smoothed periodograms over the given windows. `source` identifies
/// how the windows were produced (spec, seed, length) and feeds params_hash.
SpectralDensity make_smoothed_density(const std::vector<std::vector<double>>& windows, std::int64_t m,
                                      const std::string& source);

/// Writes `t,f,provenance,params_hash` rows.
void write_density_csv(std::ostream& os, const SpectralDensity& f, std::span<const Frequency> ts, bool header = true);

}  // namespace periodolil
