#pragma once

#include "periodolil/core.hpp"
#include "periodolil/functions.hpp"

#include <functional>
#include <vector>

namespace periodolil {

/// Piecewise-constant function on the uniform m-cell grid of [0, 1]; values
/// are cell averages, reported at cell midpoints.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(std::size_t m, double value = 0.0);
    explicit GridFunction(std::vector<double> values);

    /// Midpoint samples of f.
    static GridFunction sample(std::size_t m, const std::function<double(double)>& f);

    std::size_t size() const noexcept { return v_.size(); }
    double width() const noexcept { return 1.0 / static_cast<double>(v_.size()); }
    double midpoint(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * width(); }
    double operator[](std::size_t i) const { return v_[i]; }
    double& operator[](std::size_t i) { return v_[i]; }
    const std::vector<double>& values() const noexcept { return v_; }

    /// Midpoint-rule integral.
    double integral() const;
    /// Value of the cell containing x (x = 1 belongs to the last cell).
    double at(double x) const;

    GridFunction operator*(const GridFunction& o) const;
    GridFunction operator*(double c) const;
    GridFunction operator-(const GridFunction& o) const;

private:
    std::vector<double> v_;
};

/// Left inverse branch of T_γ on [0, 1/2]: bisection then Newton to 1e−14.
/// Throws numeric_error (with the target point) if Newton fails.
double intermittent_left_inverse(double gamma, double x);

/**
 * @brief Lebesgue transfer operator L̂ of T_γ, cell-averaged.
 *
 * (L̂f) on a cell I is |I|⁻¹ ∫_{T⁻¹I} f, evaluated exactly for piecewise
 * constant f from the preimages of the cell endpoints under both branches.
 * Total mass is conserved to rounding.
 */
class IntermittentTransfer {
public:
    IntermittentTransfer(double gamma, std::size_t m);

    double gamma() const noexcept { return gamma_; }
    std::size_t size() const noexcept { return m_; }
    GridFunction apply(const GridFunction& f) const;

private:
    struct Point {
        std::size_t cell;
        double frac;  // offset inside the cell, in cell widths
    };

    double gamma_;
    std::size_t m_;
    std::vector<Point> left_;   // preimages of i/m under the left branch
    std::vector<Point> right_;  // preimages of i/m under the right branch
};

GridFunction transfer_operator_apply(double gamma, const GridFunction& f);

/// Power iteration h ← L̂h / ∫L̂h from h ≡ 1.
GridFunction invariant_density(const IntermittentTransfer& op, int iterations);

/// Least-squares slope of ln h against ln x over the cells with midpoints in [lo, hi].
double loglog_slope(const GridFunction& h, double lo, double hi);

/**
 * @brief Markov kernel on [0, 1] acting on densities.
 *
 * `push` maps a density of Y₀ to the density of Y₁ (for the L_γ-chain this is
 * L̂), `density` is the invariant density. Conditional expectations follow
 * as E[g(Y_k) | Y₀] = push^k(h·g)/h.
 */
struct GridMarkovOperator {
    std::function<GridFunction(const GridFunction&)> push;
    GridFunction density;
};

GridMarkovOperator intermittent_operator(double gamma, std::size_t m, int iterations);
/// iid kernel with law `density`: push(f) = (∫f)·density.
GridMarkovOperator iid_operator(GridFunction density);

/// L f = push(h f)/h, 0 where h vanishes.
GridFunction markov_apply(const GridMarkovOperator& op, const GridFunction& f);

struct AlphaResult {
    std::int64_t k = 0;
    double value = 0.0;        // sup over the full u-grid
    double coarse = 0.0;       // sup over every other u point
    double u_at_max = 0.0;
    bool inconclusive = false; // coarse and fine sups differ by more than 10%
};

/// α(k) = sup_u ∫ |push^k(h 1_{[0,u]}) − F(u) h| dx over a grid of ν-quantiles
/// snapped to cell boundaries, for each requested k.
std::vector<AlphaResult> alpha_coefficients(const GridMarkovOperator& op, const std::vector<std::int64_t>& ks,
                                            std::size_t u_points = 512);
AlphaResult alpha_coefficient(const GridMarkovOperator& op, std::int64_t k, std::size_t u_points = 512);

/// ‖E₀f(Y_k) − ν(f)‖₂² = ∫ |L^k f − ν(f)|² h dx on the grid.
double e0_norm_grid(const GridMarkovOperator& op, const GridFunction& f, std::int64_t k);

struct DualityCheck {
    double lhs = 0.0;  // ν̂(f · g∘T) along the orbit
    double rhs = 0.0;  // ν̂(Lf · g) along the orbit
    double se = 0.0;   // batch-means SE of the difference
};

/// Duality ν(f·g∘T) = ν(L_γf·g) along a forward orbit of T_γ.
DualityCheck duality_check(const GridMarkovOperator& op, const std::vector<double>& orbit, const ScalarFunction& f,
                           const ScalarFunction& g);

}  // namespace periodolil
