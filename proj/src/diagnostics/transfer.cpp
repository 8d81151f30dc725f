#include "periodolil/diagnostics/transfer.hpp"

#include "periodolil/processes.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include <fmt/format.h>

namespace periodolil {

// ---------------------------------------------------------------------------
// GridFunction

GridFunction::GridFunction(std::size_t m, double value) : v_(m, value) {
    if (m == 0) throw std::invalid_argument("grid function needs at least one cell");
}

GridFunction::GridFunction(std::vector<double> values) : v_(std::move(values)) {
    if (v_.empty()) throw std::invalid_argument("grid function needs at least one cell");
}

GridFunction GridFunction::sample(std::size_t m, const std::function<double(double)>& f) {
    GridFunction g(m);
    for (std::size_t i = 0; i < m; ++i) g.v_[i] = f(g.midpoint(i));
    return g;
}

double GridFunction::integral() const {
    long double s = 0.0L;
    for (double x : v_) s += x;
    return static_cast<double>(s) * width();
}

double GridFunction::at(double x) const {
    const auto m = v_.size();
    if (!(x >= 0.0 && x <= 1.0)) throw std::out_of_range(fmt::format("grid point {} outside [0, 1]", x));
    const auto i = std::min(static_cast<std::size_t>(x * static_cast<double>(m)), m - 1);
    return v_[i];
}

GridFunction GridFunction::operator*(const GridFunction& o) const {
    if (o.size() != size()) throw std::invalid_argument("grid sizes differ");
    GridFunction r(*this);
    for (std::size_t i = 0; i < v_.size(); ++i) r.v_[i] *= o.v_[i];
    return r;
}

GridFunction GridFunction::operator*(double c) const {
    GridFunction r(*this);
    for (auto& x : r.v_) x *= c;
    return r;
}

GridFunction GridFunction::operator-(const GridFunction& o) const {
    if (o.size() != size()) throw std::invalid_argument("grid sizes differ");
    GridFunction r(*this);
    for (std::size_t i = 0; i < v_.size(); ++i) r.v_[i] -= o.v_[i];
    return r;
}

// ---------------------------------------------------------------------------
// Transfer operator

double intermittent_left_inverse(double gamma, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument(fmt::format("left inverse outside [0, 1]: x={}", x));
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 0.5;
    auto F = [&](double y) { return y * (1.0 + std::pow(2.0 * y, gamma)) - x; };
    double lo = 0.0, hi = 0.5;
    for (int i = 0; i < 30; ++i) {
        const double mid = 0.5 * (lo + hi);
        (F(mid) < 0.0 ? lo : hi) = mid;
    }
    double y = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        const double step = F(y) / intermittent_map_derivative(gamma, y);
        double next = y - step;
        if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
        if (F(next) < 0.0) lo = next;
        else hi = next;
        if (std::abs(next - y) <= 1e-14 * std::max(next, 1e-300)) return next;
        y = next;
    }
    throw numeric_error(fmt::format("left-branch inversion did not converge at x={}", x));
}

IntermittentTransfer::IntermittentTransfer(double gamma, std::size_t m) : gamma_(gamma), m_(m) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("transfer operator: gamma must lie in (0, 1)");
    if (m < 1024) throw std::invalid_argument("transfer operator: grid size must be >= 1024");
    const double md = static_cast<double>(m);
    auto locate = [&](double y) {
        const double pos = y * md;
        const auto cell = std::min(static_cast<std::size_t>(pos), m - 1);
        return Point{cell, pos - static_cast<double>(cell)};
    };
    left_.resize(m + 1);
    right_.resize(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        const double x = static_cast<double>(i) / md;
        left_[i] = locate(intermittent_left_inverse(gamma, x));
        right_[i] = locate(0.5 * (x + 1.0));
    }
}

GridFunction IntermittentTransfer::apply(const GridFunction& f) const {
    if (f.size() != m_) throw std::invalid_argument("grid size does not match the operator");
    // cumulative integral in units of one cell width
    std::vector<double> prefix(m_ + 1);
    long double acc = 0.0L;
    prefix[0] = 0.0;
    for (std::size_t c = 0; c < m_; ++c) {
        acc += f[c];
        prefix[c + 1] = static_cast<double>(acc);
    }
    auto F = [&](const Point& p) { return prefix[p.cell] + f[p.cell] * p.frac; };
    GridFunction out(m_);
    for (std::size_t i = 0; i < m_; ++i)
        out[i] = (F(left_[i + 1]) - F(left_[i])) + (F(right_[i + 1]) - F(right_[i]));
    return out;
}

GridFunction transfer_operator_apply(double gamma, const GridFunction& f) {
    return IntermittentTransfer(gamma, f.size()).apply(f);
}

GridFunction invariant_density(const IntermittentTransfer& op, int iterations) {
    if (iterations < 1) throw std::invalid_argument("power iteration needs at least one step");
    GridFunction h(op.size(), 1.0);
    for (int it = 0; it < iterations; ++it) {
        h = op.apply(h);
        const double mass = h.integral();
        if (!(mass > 0.0) || !std::isfinite(mass)) throw numeric_error("power iteration lost its mass");
        h = h * (1.0 / mass);
    }
    return h;
}

double loglog_slope(const GridFunction& h, double lo, double hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = h.midpoint(i);
        if (x < lo || x > hi || !(h[i] > 0.0)) continue;
        const double lx = std::log(x), ly = std::log(h[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) throw std::invalid_argument("too few grid cells in the slope window");
    const double nd = static_cast<double>(n);
    return (sxy - sx * sy / nd) / (sxx - sx * sx / nd);
}

// ---------------------------------------------------------------------------
// Markov operators on the grid

GridMarkovOperator intermittent_operator(double gamma, std::size_t m, int iterations) {
    auto op = std::make_shared<IntermittentTransfer>(gamma, m);
    GridMarkovOperator k;
    k.density = invariant_density(*op, iterations);
    k.push = [op](const GridFunction& f) { return op->apply(f); };
    return k;
}

GridMarkovOperator iid_operator(GridFunction density) {
    const double mass = density.integral();
    if (!(mass > 0.0)) throw std::invalid_argument("iid density must have positive mass");
    density = density * (1.0 / mass);
    GridMarkovOperator k;
    k.density = density;
    k.push = [density](const GridFunction& f) { return density * f.integral(); };
    return k;
}

namespace {

GridFunction divide_by_density(const GridFunction& g, const GridFunction& h) {
    GridFunction r(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) r[i] = h[i] > 0.0 ? g[i] / h[i] : 0.0;
    return r;
}

}  // namespace

GridFunction markov_apply(const GridMarkovOperator& op, const GridFunction& f) {
    return divide_by_density(op.push(op.density * f), op.density);
}

std::vector<AlphaResult> alpha_coefficients(const GridMarkovOperator& op, const std::vector<std::int64_t>& ks,
                                            std::size_t u_points) {
    if (ks.empty()) return {};
    if (u_points < 4) throw std::invalid_argument("alpha: at least 4 u points");
    for (auto k : ks)
        if (k < 1) throw std::invalid_argument("alpha: lags must be >= 1");
    const GridFunction& h = op.density;
    const std::size_t m = h.size();
    const double dx = h.width();

    // ν-CDF at cell boundaries, then quantile levels snapped to boundaries
    std::vector<double> cdf(m + 1, 0.0);
    for (std::size_t c = 0; c < m; ++c) cdf[c + 1] = cdf[c] + h[c] * dx;
    std::vector<std::size_t> bounds;
    for (std::size_t j = 0; j < u_points; ++j) {
        const double q = (static_cast<double>(j) + 0.5) / static_cast<double>(u_points) * cdf[m];
        auto it = std::lower_bound(cdf.begin() + 1, cdf.end() - 1, q);
        std::size_t b = static_cast<std::size_t>(it - cdf.begin());
        if (b > 1 && std::abs(cdf[b - 1] - q) < std::abs(cdf[b] - q)) --b;
        b = std::clamp<std::size_t>(b, 1, m - 1);
        if (bounds.empty() || bounds.back() != b) bounds.push_back(b);
    }

    const std::int64_t kmax = *std::max_element(ks.begin(), ks.end());
    std::vector<std::vector<double>> dist(bounds.size(), std::vector<double>(ks.size(), 0.0));
    parallel_for(bounds.size(), [&](std::size_t ui) {
        const std::size_t b = bounds[ui];
        GridFunction g(m, 0.0);
        for (std::size_t c = 0; c < b; ++c) g[c] = h[c];
        const double F = cdf[b] / cdf[m];
        for (std::int64_t step = 1; step <= kmax; ++step) {
            g = op.push(g);
            for (std::size_t q = 0; q < ks.size(); ++q) {
                if (ks[q] != step) continue;
                double s = 0.0;
                for (std::size_t c = 0; c < m; ++c) s += std::abs(g[c] - F * h[c]);
                dist[ui][q] = s * dx;
            }
        }
    });

    std::vector<AlphaResult> out(ks.size());
    for (std::size_t q = 0; q < ks.size(); ++q) {
        AlphaResult r;
        r.k = ks[q];
        for (std::size_t ui = 0; ui < bounds.size(); ++ui) {
            const double d = dist[ui][q];
            if (d > r.value) {
                r.value = d;
                r.u_at_max = static_cast<double>(bounds[ui]) * dx;
            }
            if (ui % 2 == 0) r.coarse = std::max(r.coarse, d);
        }
        r.value = std::min(r.value, 1.0);
        r.coarse = std::min(r.coarse, 1.0);
        r.inconclusive = r.value > 0.0 && (r.value - r.coarse) > 0.1 * r.value;
        out[q] = r;
    }
    return out;
}

AlphaResult alpha_coefficient(const GridMarkovOperator& op, std::int64_t k, std::size_t u_points) {
    return alpha_coefficients(op, {k}, u_points).front();
}

double e0_norm_grid(const GridMarkovOperator& op, const GridFunction& f, std::int64_t k) {
    if (k < 0) throw std::invalid_argument("e0_norm_grid: k must be >= 0");
    const GridFunction& h = op.density;
    const double mean = (h * f).integral() / h.integral();
    GridFunction g = h * f;
    for (std::int64_t i = 0; i < k; ++i) g = op.push(g);
    const GridFunction Lk = divide_by_density(g, h);
    double s = 0.0;
    for (std::size_t c = 0; c < h.size(); ++c) s += (Lk[c] - mean) * (Lk[c] - mean) * h[c];
    return s * h.width() / h.integral();
}

DualityCheck duality_check(const GridMarkovOperator& op, const std::vector<double>& orbit, const ScalarFunction& f,
                           const ScalarFunction& g) {
    if (orbit.size() < 128) throw std::invalid_argument("duality check needs an orbit of at least 128 points");
    const std::size_t m = op.density.size();
    const GridFunction Lf = markov_apply(op, GridFunction::sample(m, [&](double x) { return f(x); }));
    const std::size_t n = orbit.size() - 1;
    std::vector<double> d(n);
    long double lhs = 0.0L, rhs = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = f(orbit[i]) * g(orbit[i + 1]);
        const double b = Lf.at(orbit[i]) * g(orbit[i]);
        lhs += a;
        rhs += b;
        d[i] = a - b;
    }
    constexpr std::size_t batches = 64;
    const std::size_t len = n / batches;
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t i = b * len; i < (b + 1) * len; ++i) s += d[i];
        means[b] = s / static_cast<double>(len);
    }
    DualityCheck r;
    r.lhs = static_cast<double>(lhs / static_cast<long double>(n));
    r.rhs = static_cast<double>(rhs / static_cast<long double>(n));
    r.se = mean_and_se(means).se;
    return r;
}

}  // namespace periodolil
