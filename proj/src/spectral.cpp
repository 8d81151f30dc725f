#include "periodolil/spectral.hpp"

#include "periodolil/transform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace periodolil {

__extension__ using i128 = __int128;

std::string to_string(DensityProvenance p) {
    switch (p) {
        case DensityProvenance::analytic_linear: return "analytic_linear";
        case DensityProvenance::fejer_from_autocov: return "fejer_from_autocov";
        case DensityProvenance::smoothed_periodogram: return "smoothed_periodogram";
    }
    return "unknown";
}

void AutocovSeq::validate() const {
    if (c.empty()) throw data_error("empty autocovariance sequence");
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (!std::isfinite(c[j])) throw data_error(fmt::format("non-finite autocovariance at lag {}", j));
        if (std::abs(c[j]) > c[0] * (1.0 + 1e-12))
            throw data_error(fmt::format("|c_{}| exceeds c_0", j));
    }
    const std::size_t top = std::min<std::size_t>(8, c.size());
    for (std::size_t d = 2; d <= top; ++d) {
        Eigen::MatrixXd T(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t k = 0; k < d; ++k) T(i, k) = c[i > k ? i - k : k - i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-12 * std::max(c[0], 1.0))
            throw data_error(fmt::format("Toeplitz section of order {} is not positive semidefinite", d));
    }
}

AutocovSeq autocov_linear(const LinearSpec& spec, std::int64_t max_lag) {
    if (max_lag < 0) throw std::invalid_argument("max_lag must be >= 0");
    const double s2 = spec.innovation.variance();
    const auto& a = spec.coeffs;
    AutocovSeq out;
    out.c.assign(static_cast<std::size_t>(max_lag + 1), 0.0);
    for (std::size_t j = 0; j < out.c.size() && j < a.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i + j < a.size(); ++i) s += a[i] * a[i + j];
        out.c[j] = s2 * s;
    }
    return out;
}

double linear_density(const LinearSpec& spec, const Frequency& t) {
    cplx A{0.0, 0.0};
    for (std::size_t j = 0; j < spec.coeffs.size(); ++j) A += spec.coeffs[j] * t.phase(static_cast<std::int64_t>(j));
    return spec.innovation.variance() * std::norm(A) / kTwoPi;
}

double fejer_density(const AutocovSeq& c, const Frequency& t, std::int64_t m) {
    if (m < 1) throw std::invalid_argument("Fejér order must be >= 1");
    if (m > c.max_lag()) throw std::invalid_argument(fmt::format("Fejér order {} exceeds available lag {}", m, c.max_lag()));
    double s = c.c[0];
    const double md = static_cast<double>(m);
    for (std::int64_t j = 1; j < m; ++j)
        s += 2.0 * (1.0 - static_cast<double>(j) / md) * c.c[static_cast<std::size_t>(j)] * t.phase(j).real();
    return s / kTwoPi;
}

std::int64_t default_half_width(std::int64_t n) {
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(std::pow(static_cast<double>(n), 0.4))));
}

double smoothed_periodogram_from_grid(std::span<const double> grid, const Frequency& t, std::int64_t m) {
    const auto n = static_cast<std::int64_t>(grid.size());
    if (m < 1 || 4 * m > n) throw std::invalid_argument(fmt::format("half width {} outside [1, n/4] for n={}", m, n));
    std::int64_t j0;
    if (t.is_exact()) {
        // nearest grid index to n·num/den, rounding half up in integers
        const i128 num = static_cast<i128>(t.turns_num()) * n;
        j0 = static_cast<std::int64_t>((2 * num + t.turns_den()) / (2 * static_cast<i128>(t.turns_den())));
    } else {
        j0 = static_cast<std::int64_t>(std::llround(t.radians() / kTwoPi * static_cast<double>(n)));
    }
    j0 %= n;
    const std::int64_t dist0 = std::min(j0, n - j0);
    if (dist0 <= m)
        throw data_error(fmt::format("frequency within {} grid steps of 0; the estimate is contaminated by the mean", m));
    double s = 0.0;
    for (std::int64_t d = -m; d <= m; ++d) s += grid[static_cast<std::size_t>(((j0 + d) % n + n) % n)];
    return s / static_cast<double>(2 * m + 1);
}

double smoothed_periodogram(std::span<const double> x, const Frequency& t, std::int64_t m) {
    const auto S = dft_grid(x);
    const auto n = static_cast<std::int64_t>(x.size());
    std::vector<double> I(S.size());
    for (std::size_t j = 0; j < S.size(); ++j) I[j] = periodogram(S[j], n);
    return smoothed_periodogram_from_grid(I, t, m);
}

Estimate sigma_t_estimate(const ProcessSpec& spec, const Frequency& t, std::int64_t n, std::size_t replicates,
                          const SeedSpec& seed) {
    if (replicates < 30) throw std::invalid_argument("sigma_t_estimate needs at least 30 replicates");
    if (n < 1) throw std::invalid_argument("window length must be >= 1");
    std::vector<double> vals(replicates);
    parallel_for(replicates, [&](std::size_t r) {
        const auto w = generate(spec, seed.with_replicate(seed.stream.replicate + r), n);
        vals[r] = std::norm(dft(w.values, t)) / static_cast<double>(n);
    });
    return mean_and_se(vals);
}

namespace {

std::string short_hash(const std::string& text) { return sha256_hex(text).substr(0, 16); }

std::string join_reals(std::span<const double> xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ',';
        s += format_real(xs[i]);
    }
    return s;
}

}  // namespace

SpectralDensity make_linear_density(const LinearSpec& spec) {
    SpectralDensity f;
    f.eval = [spec](const Frequency& t) { return linear_density(spec, t); };
    f.provenance = DensityProvenance::analytic_linear;
    f.params_hash = short_hash("linear;" + spec.innovation.render() + ";" + join_reals(spec.coeffs));
    return f;
}

SpectralDensity make_fejer_density(AutocovSeq c, std::int64_t m) {
    if (m < 1 || m > c.max_lag()) throw std::invalid_argument("Fejér order outside [1, J_max]");
    SpectralDensity f;
    f.params_hash = short_hash(fmt::format("fejer;{};", m) + join_reals(c.c));
    f.eval = [c = std::move(c), m](const Frequency& t) { return fejer_density(c, t, m); };
    f.provenance = DensityProvenance::fejer_from_autocov;
    return f;
}

SpectralDensity make_smoothed_density(const std::vector<std::vector<double>>& windows, std::int64_t m,
                                      const std::string& source) {
    if (windows.empty()) throw std::invalid_argument("smoothed density needs at least one window");
    std::vector<std::vector<double>> grids;
    grids.reserve(windows.size());
    for (const auto& w : windows) {
        const auto S = dft_grid(w);
        std::vector<double> I(S.size());
        for (std::size_t j = 0; j < S.size(); ++j) I[j] = periodogram(S[j], static_cast<std::int64_t>(w.size()));
        grids.push_back(std::move(I));
    }
    SpectralDensity f;
    f.params_hash = short_hash(fmt::format("smoothed;{};{};{}", m, windows.size(), source));
    f.eval = [grids = std::move(grids), m](const Frequency& t) {
        double s = 0.0;
        for (const auto& g : grids) s += smoothed_periodogram_from_grid(g, t, m);
        return s / static_cast<double>(grids.size());
    };
    f.provenance = DensityProvenance::smoothed_periodogram;
    return f;
}

void write_density_csv(std::ostream& os, const SpectralDensity& f, std::span<const Frequency> ts, bool header) {
    if (header) os << "t,f,provenance,params_hash\n";
    for (const auto& t : ts)
        os << format_real(t.radians()) << ',' << format_real(f(t)) << ',' << to_string(f.provenance) << ','
           << f.params_hash << '\n';
}

}  // namespace periodolil
