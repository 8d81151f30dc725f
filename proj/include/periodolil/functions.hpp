#pragma once

#include "periodolil/core.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

namespace periodolil {

/**
 * @brief Centered innovation law for iid driving noise.
 *
 * `student_t` with ν ≤ 2 has infinite variance and is only meant for
 * moment-condition stress tests; `degenerate(c)` is a constant stream used by
 * tests that need a deterministic input. Uniform draws are shifted to mean 0.
 */
struct InnovationDist {
    enum class Kind { gaussian, rademacher, uniform, student_t, degenerate };

    Kind kind = Kind::gaussian;
    double a = 1.0;  // σ, lower bound, ν or constant, depending on kind
    double b = 0.0;  // upper bound for uniform

    static InnovationDist gaussian(double sigma);
    static InnovationDist rademacher();
    static InnovationDist uniform(double lo, double hi);
    static InnovationDist student_t(double nu);
    static InnovationDist degenerate(double c);

    bool finite_variance() const noexcept;
    bool is_test_only() const noexcept { return kind == Kind::degenerate; }
    /// Variance (second moment for `degenerate`); +inf when not finite.
    double variance() const noexcept;
    double mean() const noexcept;

    std::string render() const;
    static InnovationDist parse(std::string_view text);

    friend bool operator==(const InnovationDist&, const InnovationDist&) = default;
};

/// Stateful sampler for one InnovationDist; construct once per stream.
class InnovationSampler {
public:
    explicit InnovationSampler(const InnovationDist& dist);
    double operator()(Engine& rng);
    void fill(Engine& rng, std::span<double> out);

private:
    InnovationDist dist_;
    std::normal_distribution<double> normal_;
    std::uniform_real_distribution<double> uniform_;
    std::student_t_distribution<double> student_;
    std::bernoulli_distribution coin_{0.5};
};

/// Hölder modulus bound w_h(u, M) ≤ C·u^γ·M^α on [−M, M].
struct HolderData {
    double gamma = 1.0;
    double alpha = 0.0;
    double C = 1.0;
};

/**
 * @brief Named scalar function from a fixed catalog.
 *
 * Functions appear inside process specs, which must serialize to the config
 * format, so arbitrary callables are not allowed here. Each entry knows its
 * Hölder data where one exists.
 */
struct ScalarFunction {
    enum class Kind { identity, square, tanh, cosine, sign_power, abs_ratio, constant, neg_power };

    Kind kind = Kind::identity;
    double param = 0.0;

    static ScalarFunction identity() { return {Kind::identity, 0.0}; }
    static ScalarFunction square() { return {Kind::square, 0.0}; }
    static ScalarFunction tanh_fn() { return {Kind::tanh, 0.0}; }
    static ScalarFunction cosine() { return {Kind::cosine, 0.0}; }
    static ScalarFunction sign_power(double p);
    static ScalarFunction abs_ratio() { return {Kind::abs_ratio, 0.0}; }
    static ScalarFunction constant(double c) { return {Kind::constant, c}; }
    static ScalarFunction neg_power(double b);

    double operator()(double x) const;

    std::optional<HolderData> holder() const;
    /// sup |h|, +inf when unbounded.
    double bound() const;

    std::string render() const;
    static ScalarFunction parse(std::string_view text);

    friend bool operator==(const ScalarFunction&, const ScalarFunction&) = default;
};

/// Formats a double with 17 significant digits (round-trips exactly).
std::string format_real(double x);
/// Strict full-string parse of a real number.
double parse_real(std::string_view text);

}  // namespace periodolil
