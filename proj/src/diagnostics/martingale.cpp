#include "periodolil/diagnostics/martingale.hpp"

#include "periodolil/diagnostics/markov.hpp"
#include "periodolil/transform.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace periodolil {

cplx transfer_function(const LinearSpec& spec, const Frequency& t) {
    cplx A{0.0, 0.0};
    for (std::size_t j = 0; j < spec.coeffs.size(); ++j) A += spec.coeffs[j] * t.phase(static_cast<std::int64_t>(j));
    return A;
}

MartingaleDecomp martingale_decompose_linear(const LinearSpec& spec, const TimeSeriesWindow& window,
                                             const Frequency& t, std::int64_t n) {
    if (!window.innovations) throw std::invalid_argument("martingale decomposition needs the innovation window");
    const std::int64_t J = spec.truncation_order();
    if (window.meta.truncation_order != J)
        throw std::invalid_argument("window truncation order does not match the process coefficients");
    if (n < 1 || n > static_cast<std::int64_t>(window.size()))
        throw std::invalid_argument(fmt::format("n={} outside the window", n));
    const auto& a = spec.coeffs;
    auto eps = [&](std::int64_t k) { return window.innovation(k); };

    MartingaleDecomp d;
    d.t = t;
    d.n = n;
    d.D0_coeff = transfer_function(spec, t);
    d.S_n = dft(std::span<const double>(window.values.data(), static_cast<std::size_t>(n)), t);
    cplx e{0.0, 0.0};
    for (std::int64_t l = 1; l <= n; ++l) e += t.phase(l) * eps(l);
    d.M_n = d.D0_coeff * e;
    d.R_n = d.S_n - d.M_n;

    // Projection form: E₀X_k = Σ_{j≥k} a_j ε_{k−j}; E_nX_k − E₀X_k = Σ_{j=k−n}^{k−1} a_j ε_{k−j}.
    cplx head{0.0, 0.0}, tail{0.0, 0.0};
    for (std::int64_t k = 1; k <= std::min(n, J); ++k) {
        double s = 0.0;
        for (std::int64_t j = k; j <= J; ++j) s += a[static_cast<std::size_t>(j)] * eps(k - j);
        head += t.phase(k) * s;
    }
    for (std::int64_t k = n + 1; k <= n + J; ++k) {
        double s = 0.0;
        for (std::int64_t j = k - n; j <= std::min(k - 1, J); ++j) s += a[static_cast<std::size_t>(j)] * eps(k - j);
        tail += t.phase(k) * s;
    }
    d.R_n_projection = head - tail;
    return d;
}

double remainder_variance_linear(const LinearSpec& spec, const Frequency& t, std::int64_t n) {
    if (n < 1) throw std::invalid_argument("remainder_variance_linear: n must be >= 1");
    const auto& a = spec.coeffs;
    const std::int64_t J = spec.truncation_order();
    double s = 0.0;
    for (std::int64_t i = 0; i < J; ++i) {
        cplx b{0.0, 0.0};
        for (std::int64_t k = 1; k <= n && k + i <= J; ++k) b += t.phase(k) * a[static_cast<std::size_t>(k + i)];
        s += std::norm(b);
    }
    for (std::int64_t l = std::max<std::int64_t>(1, n - J + 1); l <= n; ++l) {
        cplx b{0.0, 0.0};
        for (std::int64_t k = n + 1; k - l <= J; ++k) b += t.phase(k) * a[static_cast<std::size_t>(k - l)];
        s += std::norm(b);
    }
    return spec.innovation.variance() * s;
}

PartestReport partest_identity_check(const LinearSpec& spec, std::int64_t n, std::size_t grid,
                                     std::size_t replicates, const SeedSpec& seed) {
    if (n < 1) throw std::invalid_argument("partest: n must be >= 1");
    if (replicates < 2) throw std::invalid_argument("partest: at least 2 replicates");
    const std::int64_t J = spec.truncation_order();
    if (static_cast<std::int64_t>(grid) < n + J)
        throw std::invalid_argument(fmt::format("partest: grid {} must be at least n + J = {}", grid, n + J));

    // A(e^{it_g}) from the transform of the coefficients, which carries an extra e^{it}.
    auto Ag = dft_grid_padded(spec.coeffs, grid);
    const auto G = static_cast<std::int64_t>(grid);
    for (std::size_t g = 0; g < grid; ++g)
        Ag[g] *= std::conj(Frequency::fourier(static_cast<std::int64_t>(g), G).phase(1));

    std::vector<double> lhs(replicates);
    parallel_for(replicates, [&](std::size_t r) {
        const auto w = gen_linear(spec, seed.with_replicate(seed.stream.replicate + r), n);
        const auto S = dft_grid_padded(w.values, grid);
        const auto& eps = *w.innovations;
        const auto E = dft_grid_padded(std::span<const double>(eps.data() + J, static_cast<std::size_t>(n)), grid);
        double acc = 0.0;
        for (std::size_t g = 0; g < grid; ++g) acc += std::norm(S[g] - Ag[g] * E[g]);
        lhs[r] = acc / static_cast<double>(grid);
    });

    PartestReport rep;
    rep.n = n;
    rep.grid = grid;
    rep.replicates = replicates;
    rep.lhs = mean_and_se(lhs);
    double rhs = 0.0;
    for (std::int64_t k = 1; k <= n; ++k) rhs += e0_norm_linear(spec, k);
    rep.rhs = 2.0 * rhs;
    if (rep.rhs > 0.0) {
        rep.ratio = rep.lhs.mean / rep.rhs;
        rep.ratio_se = rep.lhs.se / rep.rhs;
    }
    return rep;
}

}  // namespace periodolil
