#include "periodolil/diagnostics/conditions.hpp"
#include "periodolil/diagnostics/markov.hpp"
#include "periodolil/diagnostics/martingale.hpp"

#include <cmath>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

using namespace periodolil;

namespace {

LinearSpec ar1(double rho) { return LinearSpec{geometric_coeffs(rho, 400), InnovationDist::gaussian(1.0)}; }

}  // namespace

TEST_CASE("e0_norm_linear") {
    const auto spec = LinearSpec{geometric_coeffs(0.5, 60), InnovationDist::gaussian(1.0)};
    CHECK(e0_norm_linear(spec, 0) == doctest::Approx(spec.variance()));
    CHECK(e0_norm_linear(spec, 2) == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
    CHECK(e0_norm_linear(spec, 61) == 0.0);
}

TEST_CASE("condFM2 and condFM on AR(1) match high-precision summation") {
    struct Case {
        double rho, fm2, fm;
    };
    for (const auto& c : {Case{0.25, 0.001545410722771596, 0.00093589771103362793},
                          Case{0.5, 0.038861325320944686, 0.078487966818175221},
                          Case{0.9, 5.4728454438486517, 13.657566082417045}}) {
        const auto spec = ar1(c.rho);
        auto e0 = [&](std::int64_t k) { return e0_norm_linear(spec, k); };
        const auto r2 = series_condition(ConditionId::condFM2, e0, 1000);
        const auto r1 = series_condition(ConditionId::condFM, e0, 1000);
        CHECK(std::abs(r2.partial_sum - c.fm2) <= 1e-6);
        CHECK(std::abs(r1.partial_sum - c.fm) <= 1e-6);
        CHECK(r2.verdict == Verdict::converges);
        CHECK(r1.verdict == Verdict::converges);
    }
}

TEST_CASE("condFM2 on unit-variance geometric terms") {
    const auto r = series_condition(ConditionId::condFM2, [](std::int64_t k) { return std::pow(0.25, static_cast<double>(k)); }, 1000);
    CHECK(std::abs(r.partial_sum - 0.029145993990708515) <= 1e-6);
    CHECK(r.verdict == Verdict::converges);
}

TEST_CASE("series verdicts") {
    SUBCASE("all zero") {
        const auto r = series_condition(ConditionId::condFM2, [](std::int64_t) { return 0.0; }, 1000);
        CHECK(r.partial_sum == 0.0);
        CHECK(r.verdict == Verdict::converges);
    }
    SUBCASE("1/ln k is not convergent") {
        const auto r = series_condition(ConditionId::condFM2, [](std::int64_t k) { return 1.0 / std::log(static_cast<double>(k)); }, 1000);
        CHECK(r.verdict != Verdict::converges);
        REQUIRE(r.tail_slope);
        CHECK(*r.tail_slope == doctest::Approx(-1.0).epsilon(0.05));
    }
    SUBCASE("1/k^2 source under condFM2 converges") {
        const auto r = series_condition(ConditionId::condFM2, [](std::int64_t k) { return 1.0 / static_cast<double>(k); }, 1000);
        CHECK(r.verdict == Verdict::converges);
        CHECK(*r.tail_slope < -1.5);
    }
    SUBCASE("negative source") {
        CHECK_THROWS_AS(series_condition(ConditionId::condFM2, [](std::int64_t) { return -1.0; }, 1000), data_error);
    }
    SUBCASE("k_max too small") {
        CHECK_THROWS_AS(series_condition(ConditionId::condFM2, [](std::int64_t) { return 1.0; }, 999),
                        std::invalid_argument);
    }
    SUBCASE("partial sums are monotone") {
        const auto r = series_condition(ConditionId::condFM, [](std::int64_t k) { return std::sin(static_cast<double>(k)) + 1.0; }, 1000);
        for (std::size_t i = 1; i < r.partial_sums.size(); ++i) CHECK(r.partial_sums[i] >= r.partial_sums[i - 1]);
    }
}

TEST_CASE("tail fit") {
    std::vector<std::int64_t> ks;
    std::vector<double> terms;
    for (std::int64_t k = 1; k <= 1000; ++k) {
        ks.push_back(k);
        terms.push_back(std::pow(static_cast<double>(k), -2.0));
    }
    const auto fit = fit_tail(ks, terms);
    REQUIRE(fit);
    CHECK(fit->slope == doctest::Approx(-2.0));
    CHECK(fit->r2 == doctest::Approx(1.0));
    CHECK(classify_series(ks, terms, fit) == Verdict::converges);
    CHECK_FALSE(fit_tail({1, 2}, {1.0, 0.5}));
}

TEST_CASE("condproj for linear processes") {
    const auto r = condproj_linear(LinearSpec{geometric_coeffs(0.5, 60), InnovationDist::gaussian(1.0)});
    CHECK(r.partial_sum == 1.0);
    CHECK(r.verdict == Verdict::converges);
    CHECK(condproj_linear(LinearSpec{{1.0, 1.0}, InnovationDist::gaussian(3.0)}).partial_sum == doctest::Approx(3.0));
    // nonincreasing coefficients telescope to a_0·σ
    CHECK(condproj_linear(LinearSpec{{2.0, 1.5, 1.5, 0.2}, InnovationDist::uniform(-1.0, 1.0)}).partial_sum ==
          doctest::Approx(2.0 / std::sqrt(3.0)));
}

TEST_CASE("corlin condition") {
    const auto r = corlin_condition(LinearSpec{geometric_coeffs(0.5, 60), InnovationDist::gaussian(1.0)}, 0.5, 1000);
    CHECK(r.verdict == Verdict::converges);
    double s = 0.0;
    for (int k = 2; k <= 60; ++k) s += std::pow(std::log(k), 2) * std::pow(0.5, k);
    CHECK(r.partial_sum == doctest::Approx(s).epsilon(1e-12));
    CHECK_THROWS_AS(corlin_condition(LinearSpec{{1.0}, InnovationDist::gaussian(1.0)}, 1.5, 1000),
                    std::invalid_argument);
}

TEST_CASE("Rootzen condition for linear processes") {
    SUBCASE("iid gives zero norms") {
        const auto r = rootzen_condition_linear(LinearSpec{{1.0}, InnovationDist::gaussian(1.0)}, Frequency::pi_multiple(1, 3), 64);
        CHECK(r.extras.at("sup") == 0.0);
        CHECK(r.verdict == Verdict::converges);
    }
    SUBCASE("AR(1) at pi/2") {
        const auto spec = ar1(0.5);
        const double x0 = std::sqrt(spec.variance());
        const auto r = rootzen_condition_linear(spec, Frequency::pi_multiple(1, 2), 1000);
        CHECK(std::abs(r.extras.at("limit") - 0.44721359549995794 * x0) <= 1e-9);
        CHECK(std::abs(r.extras.at("sup") - 0.55901699437494742 * x0) <= 1e-9);
        CHECK(r.verdict == Verdict::converges);
    }
    SUBCASE("norms match a direct evaluation") {
        const LinearSpec spec{{1.0, 0.7, -0.2, 0.4}, InnovationDist::gaussian(1.0)};
        const auto t = Frequency::pi_multiple(1, 5);
        const auto norms = e0_partial_sum_norms_linear(spec, t, 6);
        for (std::int64_t n = 1; n <= 6; ++n) {
            // E₀S_n = Σ_k e^{ikt} Σ_{j≥k} a_j ε_{k−j}
            double s = 0.0;
            for (std::int64_t i = 0; i < 4; ++i) {
                cplx b{0.0, 0.0};
                for (std::int64_t k = 1; k <= n; ++k)
                    if (k + i <= 3) b += t.phase(k) * spec.coeffs[static_cast<std::size_t>(k + i)];
                s += std::norm(b);
            }
            CHECK(norms[static_cast<std::size_t>(n - 1)] == doctest::Approx(std::sqrt(s)).epsilon(1e-12));
        }
    }
    SUBCASE("linear growth is flagged") {
        std::vector<double> norms;
        for (int n = 1; n <= 64; ++n) norms.push_back(static_cast<double>(n));
        CHECK(rootzen_report(norms).verdict == Verdict::diverges);
    }
}

TEST_CASE("condLIL remainder series") {
    const auto spec = LinearSpec{geometric_coeffs(0.5, 60), InnovationDist::gaussian(1.0)};
    const auto t = Frequency::pi_multiple(1, 2);
    const auto r = series_condition(ConditionId::condLIL, [&](std::int64_t n) { return remainder_variance_linear(spec, t, n); }, 1000);
    CHECK(r.verdict == Verdict::converges);
}

TEST_CASE("quantile condition") {
    SUBCASE("closed-form example") {
        std::vector<double> alpha(64);
        for (std::size_t k = 1; k <= 64; ++k) alpha[k - 1] = std::pow(2.0, -static_cast<double>(k));
        const auto r = quantile_condition([](double u) { return std::pow(u, -0.25); }, alpha, 64);
        CHECK(std::abs(r.partial_sum - 3.2007122578135946) <= 1e-6);
    }
    SUBCASE("zero alpha") {
        const auto r = quantile_condition([](double u) { return 1.0 / u; }, std::vector<double>(100, 0.0), 100);
        CHECK(r.partial_sum == 0.0);
    }
    SUBCASE("bounded quantile obeys the per-term bound") {
        std::vector<double> alpha(50);
        for (std::size_t k = 1; k <= 50; ++k) alpha[k - 1] = 1.0 / static_cast<double>(k * k);
        const auto r = quantile_condition([](double u) { return 2.0 - u; }, alpha, 50);
        for (std::size_t i = 0; i < r.ks.size(); ++i) {
            const double k = static_cast<double>(r.ks[i]);
            CHECK(r.terms[i] <= 4.0 * alpha[r.ks[i] - 1] / (k * std::log(std::log(k))) * (1.0 + 1e-12));
        }
    }
    SUBCASE("increasing quantile is rejected") {
        CHECK_THROWS_AS(quantile_condition([](double u) { return u; }, std::vector<double>(10, 0.1), 10), data_error);
    }
}

TEST_CASE("moment estimate is finite for gaussian data") {
    std::vector<double> x;
    auto rng = make_engine(SeedSpec{1, {0, StreamRole::auxiliary}});
    std::normal_distribution<double> n01;
    for (int i = 0; i < 10000; ++i) x.push_back(n01(rng));
    const auto e = fm_moment_estimate(x);
    CHECK(e.mean > 0.5);
    CHECK(e.mean < 2.0);
}

TEST_CASE("JSON-lines and term table serialization") {
    const auto r = condproj_linear(LinearSpec{{1.0, 1.0}, InnovationDist::gaussian(1.0)});
    std::ostringstream os;
    write_condition_jsonl(os, r);
    const auto j = nlohmann::json::parse(os.str());
    for (const char* key : {"condition_id", "k_max", "partial_sum", "tail_slope", "r2", "verdict"}) CHECK(j.contains(key));
    CHECK(j["condition_id"] == "condproj");
    CHECK(j["verdict"] == "converges");
    CHECK(parse_condition_id("condalphaQ") == ConditionId::condalphaQ);

    std::ostringstream csv;
    write_term_table_csv(csv, r);
    CHECK(csv.str().rfind("k,term,partial_sum\n", 0) == 0);
}
