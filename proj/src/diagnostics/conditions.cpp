#include "periodolil/diagnostics/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <fmt/format.h>
#include <json.hpp>

namespace periodolil {

std::string to_string(ConditionId id) {
    switch (id) {
        case ConditionId::condFM2: return "condFM2";
        case ConditionId::condFM: return "condFM";
        case ConditionId::condproj: return "condproj";
        case ConditionId::condlinear: return "condlinear";
        case ConditionId::condLIL: return "condLIL";
        case ConditionId::poisson: return "poisson";
        case ConditionId::condalphaQ: return "condalphaQ";
        case ConditionId::corlin: return "corlin";
    }
    return "unknown";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::converges: return "converges";
        case Verdict::diverges: return "diverges";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

ConditionId parse_condition_id(const std::string& text) {
    for (auto id : {ConditionId::condFM2, ConditionId::condFM, ConditionId::condproj, ConditionId::condlinear,
                    ConditionId::condLIL, ConditionId::poisson, ConditionId::condalphaQ, ConditionId::corlin})
        if (to_string(id) == text) return id;
    throw std::invalid_argument("unknown condition id: " + text);
}

std::optional<TailFit> fit_tail(const std::vector<std::int64_t>& ks, const std::vector<double>& terms) {
    if (ks.size() != terms.size()) throw std::invalid_argument("index and term tables differ in length");
    std::int64_t last = -1;
    for (std::size_t i = 0; i < ks.size(); ++i)
        if (terms[i] > 0.0 && ks[i] > 0) last = ks[i];
    if (last <= 0) return std::nullopt;
    const double lo = static_cast<double>(last) / 10.0;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] <= 0 || !(terms[i] > 0.0) || static_cast<double>(ks[i]) < lo || ks[i] > last) continue;
        const double x = std::log(static_cast<double>(ks[i]));
        const double y = std::log(terms[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        ++m;
    }
    if (m < 3) return std::nullopt;
    const double md = static_cast<double>(m);
    const double vx = sxx - sx * sx / md;
    const double vy = syy - sy * sy / md;
    const double cxy = sxy - sx * sy / md;
    if (vx <= 0.0) return std::nullopt;
    TailFit f;
    f.slope = cxy / vx;
    f.r2 = vy > 0.0 ? (cxy * cxy) / (vx * vy) : 1.0;
    f.points = m;
    return f;
}

Verdict classify_series(const std::vector<std::int64_t>& ks, const std::vector<double>& terms,
                        const std::optional<TailFit>& fit) {
    if (ks.empty()) return Verdict::inconclusive;
    const double lo = static_cast<double>(ks.back()) / 10.0;
    bool tail_zero = true;
    for (std::size_t i = 0; i < ks.size(); ++i)
        if (static_cast<double>(ks[i]) >= lo && terms[i] != 0.0) tail_zero = false;
    if (tail_zero) return Verdict::converges;
    if (!fit || fit->r2 < kMinR2) return Verdict::inconclusive;
    if (fit->slope < kConvergenceSlope) return Verdict::converges;
    if (fit->slope >= -1.0 - 1e-6) return Verdict::diverges;
    return Verdict::inconclusive;
}

ConditionReport make_series_report(ConditionId id, std::vector<std::int64_t> ks, std::vector<double> terms) {
    if (ks.size() != terms.size()) throw std::invalid_argument("index and term tables differ in length");
    ConditionReport r;
    r.id = id;
    r.k_max = ks.empty() ? 0 : ks.back();
    r.partial_sums.resize(terms.size());
    double s = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (!std::isfinite(terms[i])) throw data_error(fmt::format("non-finite term at k={}", ks[i]));
        if (terms[i] < 0.0) throw data_error(fmt::format("negative term {} at k={}", terms[i], ks[i]));
        s += terms[i];
        r.partial_sums[i] = s;
    }
    r.partial_sum = s;
    const auto fit = fit_tail(ks, terms);
    if (fit) {
        r.tail_slope = fit->slope;
        r.r2 = fit->r2;
    }
    r.verdict = classify_series(ks, terms, fit);
    r.ks = std::move(ks);
    r.terms = std::move(terms);
    return r;
}

ConditionReport series_condition(ConditionId id, const std::function<double(std::int64_t)>& source,
                                 std::int64_t k_max) {
    if (k_max < 1000) throw std::invalid_argument("series conditions need k_max >= 1000");
    std::int64_t k0 = 2;
    std::function<double(double)> weight;
    switch (id) {
        case ConditionId::condFM2: weight = [](double k) { return std::log(k) / k; }; break;
        case ConditionId::condFM:
            k0 = 3;
            weight = [](double k) { return 1.0 / (k * std::log(std::log(k))); };
            break;
        case ConditionId::condLIL: weight = [](double k) { return std::log(k) / (k * k); }; break;
        case ConditionId::corlin: weight = [](double k) { const double l = std::log(k); return l * l; }; break;
        default: throw std::invalid_argument("series_condition does not handle " + to_string(id));
    }
    std::vector<std::int64_t> ks;
    std::vector<double> terms;
    for (std::int64_t k = k0; k <= k_max; ++k) {
        const double q = source(k);
        if (q < 0.0) throw data_error(fmt::format("negative source value {} at k={}", q, k));
        ks.push_back(k);
        terms.push_back(q == 0.0 ? 0.0 : weight(static_cast<double>(k)) * q);
    }
    return make_series_report(id, std::move(ks), std::move(terms));
}

ConditionReport condproj_linear(const LinearSpec& spec) {
    if (spec.coeffs.empty()) throw std::invalid_argument("linear spec without coefficients");
    const double sigma = std::sqrt(spec.innovation.variance());
    const auto& a = spec.coeffs;
    std::vector<std::int64_t> ks;
    std::vector<double> terms;
    for (std::size_t n = 0; n < a.size(); ++n) {
        const double next = n + 1 < a.size() ? a[n + 1] : 0.0;
        ks.push_back(static_cast<std::int64_t>(n));
        terms.push_back(sigma * std::abs(a[n] - next));
    }
    ConditionReport r = make_series_report(ConditionId::condproj, std::move(ks), std::move(terms));
    // A finite filter is a finite sum; only a clear slow tail overrides that.
    if (r.verdict == Verdict::inconclusive && !r.tail_slope) r.verdict = Verdict::converges;
    return r;
}

ConditionReport corlin_condition(const LinearSpec& spec, double gamma, std::int64_t k_max) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("corlin: gamma must lie in (0, 1]");
    const auto& a = spec.coeffs;
    ConditionReport r = series_condition(
        ConditionId::corlin,
        [&](std::int64_t k) {
            const double ak = k < static_cast<std::int64_t>(a.size()) ? a[static_cast<std::size_t>(k)] : 0.0;
            return std::pow(std::abs(ak), 2.0 * gamma);
        },
        k_max);
    return r;
}

std::vector<double> e0_partial_sum_norms_linear(const LinearSpec& spec, const Frequency& t, std::int64_t n_max) {
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    const auto& a = spec.coeffs;
    const auto J = static_cast<std::int64_t>(a.size()) - 1;
    const double s2 = spec.innovation.variance();
    // E₀S_n = Σ_{i≥0} ε_{−i} B_i(n), B_i(n) = Σ_{k=1}^n e^{ikt} a_{k+i}
    std::vector<cplx> B(static_cast<std::size_t>(std::max<std::int64_t>(J, 0)), cplx{0.0, 0.0});
    std::vector<double> out(static_cast<std::size_t>(n_max));
    double last = 0.0;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        if (n <= J) {
            const cplx ph = t.phase(n);
            double s = 0.0;
            for (std::int64_t i = 0; i < J; ++i) {
                if (n + i <= J) B[static_cast<std::size_t>(i)] += ph * a[static_cast<std::size_t>(n + i)];
                s += std::norm(B[static_cast<std::size_t>(i)]);
            }
            last = std::sqrt(s2 * s);
        }
        out[static_cast<std::size_t>(n - 1)] = last;
    }
    return out;
}

ConditionReport rootzen_report(std::vector<double> norms, std::vector<double> se) {
    if (norms.empty()) throw std::invalid_argument("rootzen_report needs at least one norm");
    const auto n_max = static_cast<std::int64_t>(norms.size());
    ConditionReport r;
    r.id = ConditionId::poisson;
    r.k_max = n_max;
    r.ks.resize(norms.size());
    r.partial_sums.resize(norms.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < norms.size(); ++i) {
        if (!std::isfinite(norms[i]) || norms[i] < 0.0) throw data_error(fmt::format("invalid norm at n={}", i + 1));
        r.ks[i] = static_cast<std::int64_t>(i) + 1;
        sup = std::max(sup, norms[i]);
        r.partial_sums[i] = sup;
    }
    r.partial_sum = sup;
    r.extras["sup"] = sup;
    r.extras["limit"] = norms.back();
    if (!se.empty()) r.extras["limit_se"] = se.back();

    std::int64_t n2 = 1;
    while (2 * n2 <= n_max) n2 *= 2;
    const std::int64_t n1 = n2 / 2;
    if (sup == 0.0) {
        r.verdict = Verdict::converges;
    } else if (n1 >= 1) {
        const double s1 = r.partial_sums[static_cast<std::size_t>(n1 - 1)];
        const double s2 = r.partial_sums[static_cast<std::size_t>(n2 - 1)];
        const double ratio = s1 > 0.0 ? s2 / s1 : std::numeric_limits<double>::infinity();
        r.extras["dyadic_ratio"] = std::isfinite(ratio) ? ratio : -1.0;
        if (ratio >= 2.0) r.verdict = Verdict::diverges;
        else if (ratio <= 1.1) r.verdict = Verdict::converges;
        else r.verdict = Verdict::inconclusive;
    }
    const auto fit = fit_tail(r.ks, norms);
    if (fit) {
        r.tail_slope = fit->slope;
        r.r2 = fit->r2;
    }
    r.terms = std::move(norms);
    return r;
}

ConditionReport rootzen_condition_linear(const LinearSpec& spec, const Frequency& t, std::int64_t n_max) {
    return rootzen_report(e0_partial_sum_norms_linear(spec, t, n_max));
}

ConditionReport quantile_condition(const std::function<double(double)>& Q, const std::vector<double>& alpha,
                                   std::int64_t k_max) {
    if (k_max < 3) throw std::invalid_argument("quantile_condition needs k_max >= 3");
    if (static_cast<std::int64_t>(alpha.size()) < k_max)
        throw std::invalid_argument("alpha table shorter than k_max");
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 256; ++i) {
        const double u = std::pow(10.0, -12.0 + 12.0 * i / 256.0);
        const double q = Q(u);
        if (!(q <= prev * (1.0 + 1e-12) + 1e-300))
            throw data_error(fmt::format("quantile function increases near u={}", u));
        prev = q;
    }
    boost::math::quadrature::tanh_sinh<double> integrator;
    std::vector<std::int64_t> ks;
    std::vector<double> terms;
    for (std::int64_t k = 3; k <= k_max; ++k) {
        const double a = alpha[static_cast<std::size_t>(k - 1)];
        if (a < 0.0 || a > 1.0) throw data_error(fmt::format("alpha({}) = {} outside [0, 1]", k, a));
        double integral = 0.0;
        if (a > 0.0) integral = integrator.integrate([&](double u) { const double q = Q(u); return q * q; }, 0.0, a);
        const double kd = static_cast<double>(k);
        ks.push_back(k);
        terms.push_back(integral / (kd * std::log(std::log(kd))));
    }
    return make_series_report(ConditionId::condalphaQ, std::move(ks), std::move(terms));
}

Estimate fm_moment_estimate(std::span<const double> x) {
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double L = std::log(std::exp(1.0) + std::abs(x[i]));
        const double LL = std::log(std::exp(1.0) + L);
        v[i] = x[i] * x[i] * L / LL;
    }
    return mean_and_se(v);
}

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
    if (v && std::isfinite(*v)) return *v;
    return nullptr;
}

}  // namespace

void write_condition_jsonl(std::ostream& os, const ConditionReport& r) {
    nlohmann::ordered_json j;
    j["condition_id"] = to_string(r.id);
    j["k_max"] = r.k_max;
    j["partial_sum"] = r.partial_sum;
    j["tail_slope"] = optional_number(r.tail_slope);
    j["r2"] = optional_number(r.r2);
    j["verdict"] = to_string(r.verdict);
    if (!r.label.empty()) j["label"] = r.label;
    for (const auto& [key, value] : r.extras) j[key] = optional_number(value);
    os << j.dump() << '\n';
}

void write_term_table_csv(std::ostream& os, const ConditionReport& r) {
    os << "k,term,partial_sum\n";
    for (std::size_t i = 0; i < r.ks.size(); ++i)
        os << r.ks[i] << ',' << format_real(r.terms[i]) << ',' << format_real(r.partial_sums[i]) << '\n';
}

}  // namespace periodolil
