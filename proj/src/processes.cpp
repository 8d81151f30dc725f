#include "periodolil/processes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace periodolil {

// ---------------------------------------------------------------------------
// Specs

double LinearSpec::variance() const {
    double s = 0.0;
    for (double a : coeffs) s += a * a;
    return innovation.variance() * s;
}

std::vector<double> geometric_coeffs(double rho, std::optional<std::int64_t> order) {
    if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("geometric_coeffs: |rho| must be < 1");
    std::int64_t J = 0;
    if (order) {
        if (*order < 0) throw std::invalid_argument("geometric_coeffs: order must be >= 0");
        J = *order;
    } else if (rho != 0.0) {
        // tail/total = ρ^{2(J+1)}
        const double r2 = rho * rho;
        double tail = r2;
        while (tail > kTruncationTail) {
            tail *= r2;
            ++J;
        }
    }
    std::vector<double> a(static_cast<std::size_t>(J + 1));
    double p = 1.0;
    for (auto& x : a) {
        x = p;
        p *= rho;
    }
    return a;
}

std::vector<double> power_coeffs(double beta, std::int64_t order) {
    if (order < 0) throw std::invalid_argument("power_coeffs: order must be >= 0");
    if (!(beta > 0.0)) throw std::invalid_argument("power_coeffs: beta must be positive");
    std::vector<double> a(static_cast<std::size_t>(order + 1));
    a[0] = 1.0;
    for (std::int64_t j = 1; j <= order; ++j) a[static_cast<std::size_t>(j)] = std::pow(static_cast<double>(j), -beta);
    return a;
}

namespace {

void validate_arl(const ARLSpec& s) {
    if (!(s.C > 0.0 && s.C <= 1.0)) throw std::invalid_argument("ARL: C must lie in (0, 1]");
    if (!(s.delta >= 0.0 && s.delta < 1.0)) throw std::invalid_argument("ARL: delta must lie in [0, 1)");
    if (s.burn_in < 0) throw std::invalid_argument("ARL: burn_in must be >= 0");
}

void validate_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("intermittent map: gamma must lie in (0, 1)");
}

void validate_length(std::int64_t n) {
    if (n < 1) throw std::invalid_argument("window length must be >= 1");
}

std::int64_t centering_length(std::int64_t n) { return std::max(kMinCenteringSamples, 16 * n); }

}  // namespace

double arl_drift(double C, double delta, double t) {
    const double x = std::abs(t);
    // ∫₀^x (1+s)^{−δ} ds
    const double integral = delta == 0.0 ? x : (std::pow(1.0 + x, 1.0 - delta) - 1.0) / (1.0 - delta);
    return std::copysign(x - C * integral, t);
}

double arl_drift_derivative(double C, double delta, double t) {
    return 1.0 - C * std::pow(1.0 + std::abs(t), -delta);
}

double intermittent_map(double gamma, double x) {
    if (x < 0.5) return x * (1.0 + std::pow(2.0 * x, gamma));
    return 2.0 * x - 1.0;
}

double intermittent_map_derivative(double gamma, double x) {
    if (x < 0.5) return 1.0 + (1.0 + gamma) * std::pow(2.0 * x, gamma);
    return 2.0;
}

std::string process_kind(const ProcessSpec& spec) {
    struct {
        std::string operator()(const IidSpec&) const { return "iid"; }
        std::string operator()(const LinearSpec&) const { return "linear"; }
        std::string operator()(const FunctionOfLinearSpec&) const { return "function_of_linear"; }
        std::string operator()(const ARLSpec&) const { return "arl"; }
        std::string operator()(const IntermittentSpec&) const { return "intermittent"; }
        std::string operator()(const MetropolisSpec&) const { return "metropolis"; }
    } visitor;
    return std::visit(visitor, spec);
}

double TimeSeriesWindow::innovation(std::int64_t k) const {
    if (!innovations) throw std::invalid_argument("window carries no innovations");
    const std::int64_t J = meta.truncation_order;
    const std::int64_t idx = k - (1 - J);
    if (idx < 0 || idx >= static_cast<std::int64_t>(innovations->size()))
        throw std::out_of_range(fmt::format("innovation index {} outside window", k));
    return (*innovations)[static_cast<std::size_t>(idx)];
}

// ---------------------------------------------------------------------------
// Generators

std::vector<double> apply_filter(std::span<const double> coeffs, std::span<const double> innovations) {
    if (coeffs.empty()) throw std::invalid_argument("filter needs at least one coefficient");
    const std::size_t J = coeffs.size() - 1;
    if (innovations.size() < J + 1) throw std::invalid_argument("innovation window shorter than filter");
    const std::size_t n = innovations.size() - J;
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        // X_{k+1} = Σ_j a_j ε_{k+1−j}; ε_{k+1−j} sits at position k + J − j.
        double s = 0.0;
        const double* eps = innovations.data() + k + J;
        for (std::size_t j = 0; j <= J; ++j) s += coeffs[j] * eps[-static_cast<std::ptrdiff_t>(j)];
        out[k] = s;
    }
    return out;
}

TimeSeriesWindow gen_iid(const IidSpec& spec, const SeedSpec& seed, std::int64_t n) {
    validate_length(n);
    Engine rng = make_engine(seed.with_role(StreamRole::process));
    InnovationSampler noise(spec.innovation);
    TimeSeriesWindow w;
    w.values.resize(static_cast<std::size_t>(n));
    noise.fill(rng, w.values);
    w.innovations = w.values;
    w.spec = spec;
    w.seed = seed;
    w.meta.truncation_order = 0;
    return w;
}

TimeSeriesWindow gen_linear(const LinearSpec& spec, const SeedSpec& seed, std::int64_t n) {
    validate_length(n);
    if (spec.coeffs.empty()) throw std::invalid_argument("linear process needs at least one coefficient");
    const std::int64_t J = spec.truncation_order();
    Engine rng = make_engine(seed.with_role(StreamRole::process));
    InnovationSampler noise(spec.innovation);
    std::vector<double> eps(static_cast<std::size_t>(n + J));
    noise.fill(rng, eps);
    TimeSeriesWindow w;
    w.values = apply_filter(spec.coeffs, eps);
    w.innovations = std::move(eps);
    w.spec = spec;
    w.seed = seed;
    w.meta.truncation_order = J;
    return w;
}

TimeSeriesWindow gen_function_of_linear(const FunctionOfLinearSpec& spec, const SeedSpec& seed, std::int64_t n) {
    TimeSeriesWindow w = gen_linear(spec.base, seed, n);

    // Centering pre-pass over an independent stream, processed in blocks
    // that carry the last J innovations forward.
    const std::int64_t L = centering_length(n);
    const std::size_t J = spec.base.coeffs.size() - 1;
    Engine rng = make_engine(seed.with_role(StreamRole::centering));
    InnovationSampler noise(spec.base.innovation);
    constexpr std::size_t kBlock = std::size_t{1} << 16;
    std::vector<double> buf(J + kBlock);
    noise.fill(rng, std::span<double>(buf.data(), J));
    double sum = 0.0;
    std::int64_t done = 0;
    while (done < L) {
        const std::size_t take = static_cast<std::size_t>(std::min<std::int64_t>(kBlock, L - done));
        noise.fill(rng, std::span<double>(buf.data() + J, take));
        const auto lin = apply_filter(spec.base.coeffs, std::span<const double>(buf.data(), J + take));
        for (double v : lin) sum += spec.h(v);
        std::copy(buf.begin() + static_cast<std::ptrdiff_t>(take), buf.begin() + static_cast<std::ptrdiff_t>(take + J),
                  buf.begin());
        done += static_cast<std::int64_t>(take);
    }
    const double centre = sum / static_cast<double>(L);

    for (std::size_t k = 0; k < w.values.size(); ++k) {
        const double hv = spec.h(w.values[k]);
        if (!std::isfinite(hv)) throw generation_error(fmt::format("non-finite h output at index {}", k + 1));
        w.values[k] = hv - centre;
    }
    if (!std::isfinite(centre)) throw generation_error("non-finite centering estimate");
    w.spec = spec;
    w.meta.centering = centre;
    w.meta.centering_samples = L;
    return w;
}

double arl_step(const ARLSpec& spec, double y, InnovationSampler& noise, Engine& rng) {
    return arl_drift(spec.C, spec.delta, y) + noise(rng);
}

TimeSeriesWindow gen_arl(const ARLSpec& spec, const SeedSpec& seed, std::int64_t n) {
    validate_arl(spec);
    validate_length(n);
    Engine rng = make_engine(seed.with_role(StreamRole::process));
    InnovationSampler noise(spec.innovation);
    double y = 0.0;
    for (std::int64_t i = 0; i < spec.burn_in; ++i) y = arl_step(spec, y, noise, rng);
    TimeSeriesWindow w;
    w.values.resize(static_cast<std::size_t>(n));
    for (std::int64_t k = 0; k < n; ++k) {
        y = arl_step(spec, y, noise, rng);
        if (!std::isfinite(y)) throw generation_error(fmt::format("ARL iteration overflowed at index {}", k + 1));
        w.values[static_cast<std::size_t>(k)] = y;
    }
    w.spec = spec;
    w.seed = seed;
    w.meta.burn_in = spec.burn_in;
    return w;
}

namespace {

// Forward orbit of T_γ after burn-in from a uniform start. The doubling branch
// sheds one mantissa bit per step, so a floating-point orbit can land exactly
// on the fixed points 0 or 1; such a state is replaced by a fresh uniform draw.
class IntermittentOrbit {
public:
    IntermittentOrbit(double gamma, Engine& rng) : gamma_(gamma), rng_(rng) { x_ = unif_(rng_); }

    double next() {
        x_ = intermittent_map(gamma_, x_);
        if (x_ <= 0.0 || x_ >= 1.0) x_ = unif_(rng_);
        return x_;
    }

private:
    double gamma_;
    Engine& rng_;
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
    double x_ = 0.5;
};

}  // namespace

TimeSeriesWindow gen_intermittent(const IntermittentSpec& spec, const SeedSpec& seed, std::int64_t n) {
    validate_gamma(spec.gamma);
    validate_length(n);
    if (spec.burn_in < 0) throw std::invalid_argument("intermittent: burn_in must be >= 0");

    const std::vector<double> forward = intermittent_orbit(spec.gamma, spec.burn_in, n, seed);

    Engine crng = make_engine(seed.with_role(StreamRole::centering));
    IntermittentOrbit corbit(spec.gamma, crng);
    for (std::int64_t i = 0; i < spec.burn_in; ++i) corbit.next();
    const std::int64_t L = centering_length(n);
    double sum = 0.0;
    for (std::int64_t i = 0; i < L; ++i) sum += spec.observable(corbit.next());
    const double centre = sum / static_cast<double>(L);
    if (!std::isfinite(centre)) throw generation_error("non-finite centering estimate");

    TimeSeriesWindow w;
    w.values.resize(forward.size());
    for (std::size_t k = 0; k < forward.size(); ++k) {
        const double v = spec.observable(forward[forward.size() - 1 - k]);
        if (!std::isfinite(v)) throw generation_error(fmt::format("non-finite observable at index {}", k + 1));
        w.values[k] = v - centre;
    }
    w.spec = spec;
    w.seed = seed;
    w.meta.centering = centre;
    w.meta.centering_samples = L;
    w.meta.burn_in = spec.burn_in;
    return w;
}

std::vector<double> intermittent_orbit(double gamma, std::int64_t burn_in, std::int64_t n, const SeedSpec& seed) {
    validate_gamma(gamma);
    validate_length(n);
    if (burn_in < 0) throw std::invalid_argument("intermittent: burn_in must be >= 0");
    Engine rng = make_engine(seed.with_role(StreamRole::process));
    IntermittentOrbit orbit(gamma, rng);
    for (std::int64_t i = 0; i < burn_in; ++i) orbit.next();
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (auto& x : xs) x = orbit.next();
    return xs;
}

double metropolis_step(const MetropolisSpec& spec, double x, InnovationSampler& base, Engine& rng) {
    const double p = spec.stay_probability(x);
    if (!(p >= 0.0 && p <= 1.0))
        throw generation_error(fmt::format("stay probability {} outside [0, 1] at state {}", p, x));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < p ? x : base(rng);
}

TimeSeriesWindow gen_metropolis(const MetropolisSpec& spec, const SeedSpec& seed, std::int64_t n) {
    validate_length(n);
    if (spec.burn_in < 0) throw std::invalid_argument("metropolis: burn_in must be >= 0");

    Engine rng = make_engine(seed.with_role(StreamRole::process));
    InnovationSampler base(spec.base);
    double x = base(rng);
    for (std::int64_t i = 0; i < spec.burn_in; ++i) x = metropolis_step(spec, x, base, rng);
    TimeSeriesWindow w;
    w.values.resize(static_cast<std::size_t>(n));
    for (auto& v : w.values) {
        x = metropolis_step(spec, x, base, rng);
        v = spec.observable(x);
    }

    Engine crng = make_engine(seed.with_role(StreamRole::centering));
    InnovationSampler cbase(spec.base);
    double cx = cbase(crng);
    for (std::int64_t i = 0; i < spec.burn_in; ++i) cx = metropolis_step(spec, cx, cbase, crng);
    const std::int64_t L = centering_length(n);
    double sum = 0.0;
    for (std::int64_t i = 0; i < L; ++i) {
        cx = metropolis_step(spec, cx, cbase, crng);
        sum += spec.observable(cx);
    }
    const double centre = sum / static_cast<double>(L);
    if (!std::isfinite(centre)) throw generation_error("non-finite centering estimate");
    for (std::size_t k = 0; k < w.values.size(); ++k) {
        if (!std::isfinite(w.values[k])) throw generation_error(fmt::format("non-finite observable at index {}", k + 1));
        w.values[k] -= centre;
    }
    w.spec = spec;
    w.seed = seed;
    w.meta.centering = centre;
    w.meta.centering_samples = L;
    w.meta.burn_in = spec.burn_in;
    return w;
}

TimeSeriesWindow generate(const ProcessSpec& spec, const SeedSpec& seed, std::int64_t n) {
    return std::visit(
        [&](const auto& s) -> TimeSeriesWindow {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, IidSpec>) return gen_iid(s, seed, n);
            else if constexpr (std::is_same_v<T, LinearSpec>) return gen_linear(s, seed, n);
            else if constexpr (std::is_same_v<T, FunctionOfLinearSpec>) return gen_function_of_linear(s, seed, n);
            else if constexpr (std::is_same_v<T, ARLSpec>) return gen_arl(s, seed, n);
            else if constexpr (std::is_same_v<T, IntermittentSpec>) return gen_intermittent(s, seed, n);
            else return gen_metropolis(s, seed, n);
        },
        spec);
}

Estimate metropolis_theta(const MetropolisSpec& spec, const SeedSpec& seed, std::int64_t samples) {
    Engine rng = make_engine(seed.with_role(StreamRole::auxiliary));
    InnovationSampler base(spec.base);
    std::vector<double> vals(static_cast<std::size_t>(samples));
    for (auto& v : vals) {
        const double p = spec.stay_probability(base(rng));
        if (!(p >= 0.0 && p <= 1.0)) throw generation_error("stay probability outside [0, 1]");
        v = 1.0 / (1.0 - p);
    }
    return mean_and_se(vals);
}

bool holder_spot_check(const ScalarFunction& h, double M, std::int64_t pairs, Engine& rng) {
    const auto hd = h.holder();
    if (!hd) return false;
    std::uniform_real_distribution<double> u(-M, M);
    for (std::int64_t i = 0; i < pairs; ++i) {
        const double x = u(rng), y = u(rng);
        const double bound = hd->C * std::pow(std::abs(x - y), hd->gamma) * std::pow(M, hd->alpha) + 1e-9;
        if (std::abs(h(x) - h(y)) > bound) return false;
    }
    return true;
}

}  // namespace periodolil
