#pragma once

#include "periodolil/core.hpp"
#include "periodolil/processes.hpp"

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace periodolil {

enum class ConditionId { condFM2, condFM, condproj, condlinear, condLIL, poisson, condalphaQ, corlin };
enum class Verdict { converges, diverges, inconclusive };

std::string to_string(ConditionId id);
std::string to_string(Verdict v);
ConditionId parse_condition_id(const std::string& text);

/// Log-log least-squares fit of terms against their index.
struct TailFit {
    double slope = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
};

/// Fits over the last decade [K⁺/10, K⁺] of the positive terms, K⁺ the last
/// index with a positive term. Needs at least 3 positive points in that range.
std::optional<TailFit> fit_tail(const std::vector<std::int64_t>& ks, const std::vector<double>& terms);

/**
 * @brief Heuristic convergence verdict for a nonnegative series.
 *
 * converges: every term in the last decade of indices is zero, or the tail
 * slope is below −1.05 with R² ≥ 0.9. diverges: slope ≥ −1 (to 1e−6) with
 * R² ≥ 0.9. Anything else is inconclusive.
 */
Verdict classify_series(const std::vector<std::int64_t>& ks, const std::vector<double>& terms,
                        const std::optional<TailFit>& fit);

inline constexpr double kConvergenceSlope = -1.05;
inline constexpr double kMinR2 = 0.9;

struct ConditionReport {
    ConditionId id = ConditionId::condFM2;
    std::string label;                  // optional qualifier, e.g. the frequency
    std::int64_t k_max = 0;
    std::vector<std::int64_t> ks;
    std::vector<double> terms;
    std::vector<double> partial_sums;
    double partial_sum = 0.0;
    std::optional<double> tail_slope;
    std::optional<double> r2;
    Verdict verdict = Verdict::inconclusive;
    /// Named scalar side results (sup, limit, standard errors).
    std::map<std::string, double> extras;
};

/// Builds a report from an explicit term table (partial sums, fit, verdict).
ConditionReport make_series_report(ConditionId id, std::vector<std::int64_t> ks, std::vector<double> terms);

/**
 * @brief Weighted series for one of condFM2, condFM, condLIL, corlin.
 *
 * `source(k)` supplies the raw quantity: ‖E₀X_k‖² (condFM2, condFM),
 * E|R_k|² (condLIL) or |a_k|^{2γ} (corlin). The weights are ln k/k,
 * 1/(k ln ln k), ln k/k² and (ln k)² respectively; summation starts at the
 * first k where the weight is positive. Requires k_max ≥ 1000.
 */
ConditionReport series_condition(ConditionId id, const std::function<double(std::int64_t)>& source,
                                 std::int64_t k_max);

/// ‖ε₀‖₂ Σ_n |a_n − a_{n+1}| over the truncated filter (a_{J+1} = 0).
ConditionReport condproj_linear(const LinearSpec& spec);

/// corlin series Σ (ln k)²|a_k|^{2γ} for the filter of a function of a linear process.
ConditionReport corlin_condition(const LinearSpec& spec, double gamma, std::int64_t k_max);

/// ‖E₀S_n(t)‖₂ for n = 1..n_max from the linear closed form.
std::vector<double> e0_partial_sum_norms_linear(const LinearSpec& spec, const Frequency& t, std::int64_t n_max);

/// Boundedness verdict for a sequence of norms ‖E₀S_n‖ at n = 1..n_max.
/// Reports `sup` and `limit` (value at n_max); doubling between the last two
/// dyadic sizes is growth (diverges), less than 10% change is converges.
ConditionReport rootzen_report(std::vector<double> norms, std::vector<double> se = {});

ConditionReport rootzen_condition_linear(const LinearSpec& spec, const Frequency& t, std::int64_t n_max);

/// (condalphaQ): Σ_{k≥3} (1/(k ln ln k)) ∫₀^{α(k)} Q²(u) du, alpha[k−1] = α(k).
/// Throws data_error when Q increases on sampled points of (0, 1].
ConditionReport quantile_condition(const std::function<double(double)>& Q, const std::vector<double>& alpha,
                                   std::int64_t k_max);

/// Plug-in estimate of E[X₀² L(X₀)/L(L(X₀))], L(x) = ln(e + |x|). An estimate only, never a verdict.
Estimate fm_moment_estimate(std::span<const double> x);

/// One JSON object per line: condition_id, k_max, partial_sum, tail_slope, r2, verdict (+ label, extras).
void write_condition_jsonl(std::ostream& os, const ConditionReport& r);
/// `k,term,partial_sum`.
void write_term_table_csv(std::ostream& os, const ConditionReport& r);

}  // namespace periodolil
