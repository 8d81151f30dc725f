#include "periodolil/diagnostics/martingale.hpp"
#include "periodolil/transform.hpp"

#include <cmath>

#include <doctest.h>

using namespace periodolil;

namespace {

const SeedSpec kSeed{31, {0, StreamRole::process}};

TimeSeriesWindow ma1_window(const std::vector<double>& eps) {
    // ε_0..ε_n for a = [1, 1]
    TimeSeriesWindow w;
    w.innovations = eps;
    for (std::size_t k = 1; k < eps.size(); ++k) w.values.push_back(eps[k] + eps[k - 1]);
    w.spec = LinearSpec{{1.0, 1.0}, InnovationDist::gaussian(1.0)};
    w.meta.truncation_order = 1;
    return w;
}

}  // namespace

TEST_CASE("white noise is already a martingale") {
    const LinearSpec spec{{1.0}, InnovationDist::gaussian(1.0)};
    const auto w = gen_linear(spec, kSeed, 200);
    const auto d = martingale_decompose_linear(spec, w, Frequency::pi_multiple(1, 3), 200);
    CHECK(d.D0_coeff == cplx(1.0, 0.0));
    CHECK(std::abs(d.R_n) <= 1e-12 * std::abs(d.S_n));
    CHECK(std::abs(d.R_n_projection) == 0.0);
}

TEST_CASE("explicit three-sample window for a = [1, 1]") {
    const std::vector<double> eps{0.3, -1.2, 0.7, 2.0};
    const auto w = ma1_window(eps);
    const LinearSpec spec{{1.0, 1.0}, InnovationDist::gaussian(1.0)};
    for (const auto& t : {Frequency::pi_multiple(1, 2), Frequency::pi_multiple(2, 3), Frequency::from_radians(0.37)}) {
        const auto d = martingale_decompose_linear(spec, w, t, 3);
        // R_3 = e^{it}ε_0 − e^{4it}ε_3
        const cplx oracle = t.phase(1) * eps[0] - t.phase(4) * eps[3];
        CHECK(std::abs(d.R_n - oracle) <= 1e-14);
        CHECK(std::abs(d.R_n_projection - oracle) <= 1e-14);
        CHECK(std::abs(d.S_n - d.M_n - d.R_n) <= 1e-14);
    }
}

TEST_CASE("decomposition identities on random windows") {
    for (const auto& coeffs : {std::vector<double>{1.0, -0.5, 0.25, 0.8}, geometric_coeffs(0.5, 30), std::vector<double>{0.2, 1.0}}) {
        const LinearSpec spec{coeffs, InnovationDist::student_t(6.0)};
        for (std::uint64_t r = 0; r < 20; ++r) {
            const auto w = gen_linear(spec, kSeed.with_replicate(r), 300);
            for (std::int64_t n : {1, 7, 64, 300}) {
                const auto d = martingale_decompose_linear(spec, w, Frequency::pi_multiple(3, 7), n);
                CHECK(std::abs(d.S_n - (d.M_n + d.R_n)) <= 1e-10 * std::abs(d.S_n));
                CHECK(std::abs(d.R_n - d.R_n_projection) <= 1e-9 * std::max(1.0, std::abs(d.R_n)));
            }
        }
    }
}

TEST_CASE("decomposition preconditions") {
    const LinearSpec spec{{1.0, 0.5}, InnovationDist::gaussian(1.0)};
    auto w = gen_linear(spec, kSeed, 10);
    CHECK_THROWS_AS(martingale_decompose_linear(LinearSpec{{1.0, 0.5, 0.1}, InnovationDist::gaussian(1.0)}, w,
                                                Frequency::pi_multiple(1, 2), 5),
                    std::invalid_argument);
    CHECK_THROWS_AS(martingale_decompose_linear(spec, w, Frequency::pi_multiple(1, 2), 11), std::invalid_argument);
    w.innovations.reset();
    CHECK_THROWS_AS(martingale_decompose_linear(spec, w, Frequency::pi_multiple(1, 2), 5), std::invalid_argument);
}

TEST_CASE("remainder variance closed form") {
    const LinearSpec ma1{{1.0, 1.0}, InnovationDist::gaussian(1.5)};
    for (std::int64_t n : {1, 3, 100})
        CHECK(remainder_variance_linear(ma1, Frequency::pi_multiple(1, 4), n) == doctest::Approx(2.0 * 2.25));

    const LinearSpec spec{{1.0, -0.7, 0.4, 0.3, -0.2}, InnovationDist::gaussian(1.0)};
    const auto t = Frequency::pi_multiple(2, 5);
    for (std::int64_t n : {2, 3, 10}) {
        std::vector<double> r2(4000);
        for (std::size_t r = 0; r < r2.size(); ++r) {
            const auto w = gen_linear(spec, kSeed.with_replicate(1000 + r), n);
            r2[r] = std::norm(martingale_decompose_linear(spec, w, t, n).R_n);
        }
        const auto e = mean_and_se(r2);
        CHECK(std::abs(e.mean - remainder_variance_linear(spec, t, n)) <= 4.0 * e.se);
    }
}

TEST_CASE("remainder is negligible at LIL scale") {
    const LinearSpec spec{geometric_coeffs(0.5, 60), InnovationDist::gaussian(1.0)};
    const std::int64_t n = 1 << 12;
    const auto t = Frequency::pi_multiple(1, 2);
    std::vector<double> r2(500);
    parallel_for(r2.size(), [&](std::size_t r) {
        const auto w = gen_linear(spec, kSeed.with_replicate(r), n);
        r2[r] = std::norm(martingale_decompose_linear(spec, w, t, n).R_n);
    });
    const double scale = static_cast<double>(n) * std::log(std::log(static_cast<double>(n)));
    CHECK(mean_and_se(r2).mean / scale <= 0.01);
}

TEST_CASE("remainder identity averaged over frequencies") {
    SUBCASE("white noise") {
        const auto rep = partest_identity_check(LinearSpec{{1.0}, InnovationDist::gaussian(1.0)}, 16, 16, 10, kSeed);
        CHECK(rep.rhs == 0.0);
        CHECK(rep.lhs.mean <= 1e-20);
        CHECK_FALSE(rep.ratio);
    }
    SUBCASE("a = [1, 1], n = 8") {
        const auto rep = partest_identity_check(LinearSpec{{1.0, 1.0}, InnovationDist::gaussian(1.0)}, 8, 32, 2000, kSeed);
        REQUIRE(rep.ratio);
        CHECK(rep.rhs == doctest::Approx(2.0));
        CHECK(std::abs(*rep.ratio - 1.0) <= 4.0 * *rep.ratio_se);
    }
    SUBCASE("geometric, n = 64") {
        const auto rep =
            partest_identity_check(LinearSpec{geometric_coeffs(0.5, 60), InnovationDist::gaussian(1.0)}, 64, 256, 2000, kSeed);
        REQUIRE(rep.ratio);
        CHECK(std::abs(*rep.ratio - 1.0) <= 4.0 * *rep.ratio_se);
    }
    SUBCASE("grid below n + J") {
        CHECK_THROWS_AS(partest_identity_check(LinearSpec{{1.0, 1.0, 1.0}, InnovationDist::gaussian(1.0)}, 8, 9, 10, kSeed),
                        std::invalid_argument);
    }
}

TEST_CASE("transfer function") {
    const LinearSpec spec{{1.0, 0.5}, InnovationDist::gaussian(1.0)};
    CHECK(std::abs(transfer_function(spec, Frequency::pi_multiple(1, 1)) - cplx(0.5, 0.0)) < 1e-15);
}
