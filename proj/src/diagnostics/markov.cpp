#include "periodolil/diagnostics/markov.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace periodolil {

double e0_norm_linear(const LinearSpec& spec, std::int64_t k) {
    if (k < 0) throw std::invalid_argument("e0_norm_linear: k must be >= 0");
    double s = 0.0;
    for (std::size_t j = static_cast<std::size_t>(k); j < spec.coeffs.size(); ++j) s += spec.coeffs[j] * spec.coeffs[j];
    return spec.innovation.variance() * s;
}

double metropolis_transition(const MetropolisSpec& spec, const ScalarFunction& g, double nu_g, double x) {
    const double p = spec.stay_probability(x);
    return p * g(x) + (1.0 - p) * nu_g;
}

namespace {

// One simulation stream of a kernel: stationary start by burn-in, then steps.
class Walker {
public:
    Walker(const ProcessSpec& spec, const SeedSpec& seed) : spec_(spec), rng_(make_engine(seed)) {
        if (const auto* a = std::get_if<ARLSpec>(&spec_)) noise_.emplace(a->innovation);
        else if (const auto* m = std::get_if<MetropolisSpec>(&spec_)) noise_.emplace(m->base);
        else throw std::invalid_argument("nested Monte Carlo supports ARL and Metropolis kernels, got " +
                                         process_kind(spec_));
    }

    double start() {
        if (const auto* a = std::get_if<ARLSpec>(&spec_)) {
            double y = 0.0;
            for (std::int64_t i = 0; i < a->burn_in; ++i) y = arl_step(*a, y, *noise_, rng_);
            return y;
        }
        const auto& m = std::get<MetropolisSpec>(spec_);
        double x = (*noise_)(rng_);
        for (std::int64_t i = 0; i < m.burn_in; ++i) x = metropolis_step(m, x, *noise_, rng_);
        return x;
    }

    double step(double x) {
        if (const auto* a = std::get_if<ARLSpec>(&spec_)) {
            const double y = arl_step(*a, x, *noise_, rng_);
            if (!std::isfinite(y)) throw generation_error("ARL iteration overflowed");
            return y;
        }
        return metropolis_step(std::get<MetropolisSpec>(spec_), x, *noise_, rng_);
    }

private:
    const ProcessSpec& spec_;
    Engine rng_;
    std::optional<InnovationSampler> noise_;
};

SeedSpec outer_seed(const SeedSpec& seed, std::size_t i) {
    return SeedSpec{derive_seed(seed.with_role(StreamRole::inner_futures)), {i, StreamRole::process}};
}

SeedSpec inner_seed(const SeedSpec& seed, std::size_t i) {
    return SeedSpec{derive_seed(seed.with_role(StreamRole::inner_futures)), {i, StreamRole::inner_futures}};
}

void validate_budget(const NestedBudget& b) {
    if (b.outer < 2) throw std::invalid_argument("nested budget needs at least 2 outer states");
    if (b.inner_start < 2 || b.inner_max < b.inner_start)
        throw std::invalid_argument("nested budget needs 2 <= inner_start <= inner_max");
}

}  // namespace

NestedEstimate e0_norm_markov(const ProcessSpec& kernel, const ScalarFunction& g, std::int64_t k,
                              const NestedBudget& budget, const SeedSpec& seed) {
    if (k < 0) throw std::invalid_argument("e0_norm_markov: k must be >= 0");
    if (std::holds_alternative<IidSpec>(kernel)) return NestedEstimate{0.0, 0.0, 0, false};
    validate_budget(budget);

    const std::size_t N = budget.outer;
    std::vector<double> starts(N);
    parallel_for(N, [&](std::size_t i) { starts[i] = Walker(kernel, outer_seed(seed, i)).start(); });

    NestedEstimate out;
    for (std::size_t M = budget.inner_start;; M *= 2) {
        std::vector<double> mean(N), var(N);
        parallel_for(N, [&](std::size_t i) {
            Walker w(kernel, inner_seed(seed, i));
            double s = 0.0, ss = 0.0;
            for (std::size_t p = 0; p < M; ++p) {
                double y = starts[i];
                for (std::int64_t j = 0; j < k; ++j) y = w.step(y);
                const double v = g(y);
                s += v;
                ss += v * v;
            }
            const double md = static_cast<double>(M);
            mean[i] = s / md;
            var[i] = std::max(0.0, (ss - s * s / md) / (md - 1.0));
        });
        double mu = 0.0;
        for (double m : mean) mu += m;
        mu /= static_cast<double>(N);
        std::vector<double> est(N);
        for (std::size_t i = 0; i < N; ++i) {
            const double d = mean[i] - mu;
            est[i] = d * d - var[i] / static_cast<double>(M);
        }
        const Estimate e = mean_and_se(est);
        out = NestedEstimate{e.mean, e.se, M, false};
        if (e.se < budget.rel_se * std::abs(e.mean)) return out;
        if (2 * M > budget.inner_max) break;
    }
    out.inconclusive = true;
    return out;
}

ConditionReport rootzen_condition_markov(const ProcessSpec& kernel, const std::function<cplx(double)>& observable,
                                         const Frequency& t, std::int64_t n_max, const NestedBudget& budget,
                                         const SeedSpec& seed) {
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    if (std::holds_alternative<IidSpec>(kernel)) {
        ConditionReport r = rootzen_report(std::vector<double>(static_cast<std::size_t>(n_max), 0.0));
        return r;
    }
    validate_budget(budget);
    const std::size_t N = budget.outer;
    const auto n = static_cast<std::size_t>(n_max);
    std::vector<cplx> phase(n);
    std::vector<cplx> cum_phase(n);
    cplx c{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        phase[k] = t.phase(static_cast<std::int64_t>(k) + 1);
        c += phase[k];
        cum_phase[k] = c;
    }
    std::vector<double> starts(N);
    parallel_for(N, [&](std::size_t i) { starts[i] = Walker(kernel, outer_seed(seed, i)).start(); });

    std::vector<double> norms(n), ses(n);
    bool reached = false;
    for (std::size_t M = budget.inner_start;; M *= 2) {
        std::vector<cplx> mean(N * n);
        std::vector<double> var(N * n);
        std::vector<cplx> obs_sum(N);
        parallel_for(N, [&](std::size_t i) {
            Walker w(kernel, inner_seed(seed, i));
            std::vector<cplx> s(n, cplx{0.0, 0.0});
            std::vector<double> ss(n, 0.0);
            cplx osum{0.0, 0.0};
            for (std::size_t p = 0; p < M; ++p) {
                double y = starts[i];
                cplx z{0.0, 0.0};
                for (std::size_t k = 0; k < n; ++k) {
                    y = w.step(y);
                    const cplx v = observable(y);
                    osum += v;
                    z += phase[k] * v;
                    s[k] += z;
                    ss[k] += std::norm(z);
                }
            }
            const double md = static_cast<double>(M);
            for (std::size_t k = 0; k < n; ++k) {
                const cplx m = s[k] / md;
                mean[i * n + k] = m;
                var[i * n + k] = std::max(0.0, (ss[k] - md * std::norm(m)) / (md - 1.0));
            }
            obs_sum[i] = osum;
        });
        cplx mu{0.0, 0.0};
        for (const auto& o : obs_sum) mu += o;
        mu /= static_cast<double>(N * M * n);

        std::vector<double> est(N);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < N; ++i)
                est[i] = std::norm(mean[i * n + k] - mu * cum_phase[k]) - var[i * n + k] / static_cast<double>(M);
            const Estimate e = mean_and_se(est);
            const double sq = std::max(e.mean, 0.0);
            norms[k] = std::sqrt(sq);
            ses[k] = norms[k] > 0.0 ? e.se / (2.0 * norms[k]) : std::sqrt(e.se);
            if (k + 1 == n) reached = e.se < budget.rel_se * std::abs(e.mean);
        }
        if (reached || 2 * M > budget.inner_max) break;
    }
    ConditionReport r = rootzen_report(norms, ses);
    if (!reached) r.extras["inconclusive_budget"] = 1.0;
    return r;
}

}  // namespace periodolil
