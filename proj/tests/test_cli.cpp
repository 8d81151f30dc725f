#include "periodolil/cli/config.hpp"
#include "periodolil/cli/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <doctest.h>
#include <fmt/format.h>
#include <unistd.h>

using namespace periodolil;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    explicit TempDir(const std::string& tag)
        : path_(fs::temp_directory_path() / fmt::format("periodolil-{}-{}", tag, ::getpid())) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

ExperimentConfig lil_config(std::uint64_t replicates, std::vector<Frequency> ts) {
    ExperimentConfig c;
    c.process = IidSpec{InnovationDist::gaussian(1.0)};
    c.mode = Mode::lil;
    c.frequencies = std::move(ts);
    c.schedule = dyadic_checkpoints(4, 6);
    c.replicates = replicates;
    c.master_seed = 5;
    return c;
}

int run_cli(const std::string& args) {
    const int status = std::system(fmt::format("{} {} >/dev/null 2>&1", PERIODOLIL_CLI, args).c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig random_config(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, 5);
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    auto innovation = [&]() {
        switch (pick(rng) % 4) {
            case 0: return InnovationDist::gaussian(unit(rng) * 3.0);
            case 1: return InnovationDist::rademacher();
            case 2: return [&] { const double u = unit(rng); return InnovationDist::uniform(-u, u); }();
            default: return InnovationDist::student_t(2.5 + 10.0 * unit(rng));
        }
    };
    auto function = [&]() {
        switch (pick(rng)) {
            case 0: return ScalarFunction::identity();
            case 1: return ScalarFunction::square();
            case 2: return ScalarFunction::tanh_fn();
            case 3: return ScalarFunction::cosine();
            case 4: return ScalarFunction::sign_power(unit(rng));
            default: return ScalarFunction::abs_ratio();
        }
    };
    ExperimentConfig c;
    switch (pick(rng)) {
        case 0: c.process = IidSpec{innovation()}; break;
        case 1: c.process = LinearSpec{geometric_coeffs(unit(rng), 5 + pick(rng) * 7), innovation()}; break;
        case 2: c.process = LinearSpec{{unit(rng), -unit(rng), 1e-3 * unit(rng)}, innovation()}; break;
        case 3: c.process = FunctionOfLinearSpec{LinearSpec{power_coeffs(0.6 + unit(rng), 50), innovation()}, function()}; break;
        case 4: c.process = ARLSpec{unit(rng), unit(rng), innovation(), pick(rng) * 100}; break;
        default:
            if (pick(rng) % 2) c.process = IntermittentSpec{unit(rng), 123, function()};
            else c.process = MetropolisSpec{ScalarFunction::constant(unit(rng)), innovation(), function(), 7};
    }
    c.mode = static_cast<Mode>(pick(rng) % 5);
    c.frequencies.clear();
    for (int i = 0, m = 1 + pick(rng); i < m; ++i) {
        if (pick(rng) % 2) c.frequencies.push_back(Frequency::pi_multiple(1 + pick(rng), 7 + pick(rng)));
        else c.frequencies.push_back(Frequency::fourier(1 + pick(rng), 1024));
    }
    c.include_zero = pick(rng) % 2;
    if (pick(rng) % 2) c.schedule = dyadic_checkpoints(4, 8 + pick(rng));
    else c.schedule = CheckpointSchedule({16, 17 + pick(rng), 100});
    c.replicates = 1 + static_cast<std::uint64_t>(pick(rng)) * 11;
    c.master_seed = rng();
    c.n = 64 << pick(rng);
    c.half_width = pick(rng);
    c.fejer_order = 1 + pick(rng) * 100;
    c.k_max = 1000 + pick(rng);
    c.grid = 1024 << pick(rng);
    c.iterations = 10 + pick(rng);
    c.alpha_lags = {1 + pick(rng), 20};
    c.output_dir = fmt::format("runs/r{}", pick(rng));
    return c;
}

}  // namespace

TEST_CASE("config text round-trips") {
    std::mt19937_64 rng(20240229);
    for (int i = 0; i < 50; ++i) {
        const auto c = random_config(rng);
        const auto text = render_config(c);
        CAPTURE(text);
        CHECK(parse_config(text) == c);
        CHECK(render_config(parse_config(text)) == text);
    }
}

TEST_CASE("frequency text") {
    CHECK(render_frequency(Frequency::pi_multiple(2, 3)) == "2/3 pi");
    CHECK(render_frequency(Frequency::pi_multiple(1, 1)) == "pi");
    CHECK(render_frequency(Frequency::fourier(1, 4)) == "1/2 pi");
    CHECK(parse_frequency("grid(3, 8)") == Frequency::fourier(3, 8));
    CHECK(parse_frequency("3/4 pi") == Frequency::pi_multiple(3, 4));
    CHECK_THROWS_AS(parse_frequency("0.5"), config_error);
    CHECK_THROWS_AS(parse_frequency("1/0 pi"), config_error);
}

TEST_CASE("config errors") {
    const std::string head = "[process]\nkind = iid\ninnovation = gaussian(1)\n[experiment]\nmode = lil\n";
    CHECK_THROWS_AS(parse_config("[experiment]\nmode = lil\n"), config_error);
    CHECK_THROWS_AS(parse_config(head + "colour = red\n"), config_error);
    CHECK_THROWS_AS(parse_config(head + "replicates = two\n"), config_error);
    CHECK_THROWS_AS(parse_config(head + "[bogus]\n"), config_error);
    CHECK_THROWS_AS(parse_config("[process]\nkind = quantum\n[experiment]\nmode = lil\n"), config_error);

    auto c = lil_config(0, {Frequency::pi_multiple(1, 2)});
    CHECK_THROWS_AS(validate_config(c), config_error);
    c.replicates = 1;
    c.frequencies.push_back(Frequency::pi_multiple(0, 1));
    CHECK_THROWS_AS(validate_config(c), config_error);
    c.include_zero = true;
    CHECK_NOTHROW(validate_config(c));
    c.mode = Mode::martingale;
    CHECK_THROWS_AS(validate_config(c), config_error);
}

TEST_CASE("lil run writes one row per seed, frequency and checkpoint") {
    TempDir tmp("lil");
    const auto c = lil_config(2, {Frequency::pi_multiple(2, 3), Frequency::pi_multiple(1, 1)});
    const auto m = run_experiment(c, tmp / "out");
    const auto rows = lines_of(slurp(tmp / "out" / "lil.csv"));
    REQUIRE(!rows.empty());
    CHECK(rows.front() == "seed,t,n,re_S,im_S,periodogram,loglog_ratio,running_max");
    CHECK(rows.size() - 1 == 2 * 2 * 3);
    CHECK(m.mode == "lil");
    CHECK(m.checksums.count("lil.csv") == 1);
    CHECK(m.checksums.count("config.ini") == 1);
    CHECK(read_manifest(tmp / "out") == m);
    CHECK(parse_config(slurp(tmp / "out" / "config.ini")) == c);
    // existing non-empty output directories are refused
    CHECK_THROWS_AS(run_experiment(c, tmp / "out"), config_error);
}

TEST_CASE("identical config and seed give identical bytes") {
    TempDir tmp("det");
    std::vector<ExperimentConfig> configs{lil_config(3, {Frequency::pi_multiple(1, 3)})};
    ExperimentConfig spec;
    spec.process = LinearSpec{geometric_coeffs(0.5, 60), InnovationDist::gaussian(1.0)};
    spec.mode = Mode::spectral;
    spec.frequencies = {Frequency::pi_multiple(1, 2)};
    spec.replicates = 30;
    spec.n = 1024;
    spec.master_seed = 9;
    configs.push_back(spec);
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto a = run_experiment(configs[i], tmp / fmt::format("a{}", i));
        const auto b = run_experiment(configs[i], tmp / fmt::format("b{}", i));
        CHECK(a.checksums == b.checksums);
        CHECK(a.config_hash == b.config_hash);
        for (const auto& [file, sum] : a.checksums)
            CHECK(slurp(tmp / fmt::format("a{}", i) / file) == slurp(tmp / fmt::format("b{}", i) / file));
    }
    auto other = configs[0];
    other.master_seed = 6;
    const auto c = run_experiment(other, tmp / "c");
    CHECK(c.config_hash == config_hash(configs[0]));
    CHECK(c.checksums.at("lil.csv") != read_manifest(tmp / "a0").checksums.at("lil.csv"));
}

TEST_CASE("command line") {
    TempDir tmp("cli");
    const auto cfg = tmp / "bad.ini";
    {
        std::ofstream out(cfg);
        out << render_config(lil_config(0, {Frequency::pi_multiple(1, 2)}));
    }
    CHECK(run_cli(fmt::format("run {} --out {}", cfg.string(), (tmp / "bad").string())) == 2);
    CHECK_FALSE(fs::exists(tmp / "bad"));
    CHECK(run_cli(fmt::format("check {}", cfg.string())) == 2);
    for (const auto& entry : fs::directory_iterator(tmp.path())) CHECK(entry.path() == cfg);

    const auto good = tmp / "good.ini";
    {
        std::ofstream out(good);
        out << render_config(lil_config(4, {Frequency::pi_multiple(2, 3), Frequency::pi_multiple(1, 1)}));
    }
    CHECK(run_cli(fmt::format("check {}", good.string())) == 0);
    CHECK(run_cli("run /nonexistent/config.ini") == 2);
    CHECK(run_cli("frobnicate") == 2);

    SUBCASE("thread count does not change any output byte") {
        // same --out for both runs so the stored config is identical
        const auto d1 = tmp / "t1", d3 = tmp / "t";
        CHECK(run_cli(fmt::format("run {} --out {}", good.string(), d3.string())) == 0);
        fs::rename(d3, d1);
        REQUIRE(setenv("PERIODOLIL_THREADS", "3", 1) == 0);
        CHECK(run_cli(fmt::format("run {} --out {}", good.string(), d3.string())) == 0);
        unsetenv("PERIODOLIL_THREADS");
        const auto m1 = read_manifest(d1), m3 = read_manifest(d3);
        CHECK(m1.checksums == m3.checksums);
        for (const auto& [file, sum] : m1.checksums) CHECK(slurp(d1 / file) == slurp(d3 / file));
    }
    SUBCASE("seed override and summarize") {
        const auto d = tmp / "s";
        CHECK(run_cli(fmt::format("run {} --seed 77 --out {}", good.string(), d.string())) == 0);
        CHECK(read_manifest(d).master_seed == 77);
        CHECK(run_cli(fmt::format("summarize {}", d.string())) == 0);
        CHECK(run_cli(fmt::format("summarize {}", (tmp / "missing").string())) != 0);
    }
}

TEST_CASE("summaries") {
    TempDir tmp("sum");
    const auto f = 1.0 / (2.0 * M_PI);

    SUBCASE("single seed, single frequency") {
        const auto c = lil_config(1, {Frequency::pi_multiple(2, 3)});
        run_experiment(c, tmp / "one");
        const auto rows = lines_of(slurp(tmp / "one" / "lil.csv"));
        const auto last = rows.back();
        const double running_max = std::stod(last.substr(last.rfind(',') + 1));
        const auto s = summarize_runs({tmp / "one"});
        REQUIRE(s.size() == 1);
        CHECK(s[0].seeds == 1);
        CHECK(s[0].median == running_max);
        REQUIRE(s[0].reference);
        CHECK(*s[0].reference == doctest::Approx(f).epsilon(1e-14));
        CHECK(*s[0].ratio == doctest::Approx(running_max / f).epsilon(1e-14));
    }
    SUBCASE("pi is compared against twice the density") {
        const auto c = lil_config(3, {Frequency::pi_multiple(1, 2), Frequency::pi_multiple(1, 1)});
        run_experiment(c, tmp / "pi");
        const auto s = summarize_runs({tmp / "pi"});
        REQUIRE(s.size() == 2);
        CHECK(*s[0].reference == doctest::Approx(f));
        CHECK(s[1].t.is_pi());
        CHECK(*s[1].reference == doctest::Approx(2.0 * f));
        CHECK(s[1].seeds == 3);
        CHECK(s[1].q10 <= s[1].median);
        CHECK(s[1].median <= s[1].q90);
        const auto table = lines_of(render_summary(s));
        CHECK(table.front() == "t,seeds,median,q10,q90,min,max,reference,ratio");
        CHECK(table[2].rfind("pi,3,", 0) == 0);
    }
    SUBCASE("runs differing only by seed are pooled") {
        auto c = lil_config(2, {Frequency::pi_multiple(1, 2)});
        run_experiment(c, tmp / "a");
        c.master_seed = 8;
        run_experiment(c, tmp / "b");
        CHECK(summarize_runs({tmp / "a", tmp / "b"})[0].seeds == 4);
    }
    SUBCASE("mixed configs are rejected") {
        run_experiment(lil_config(1, {Frequency::pi_multiple(1, 2)}), tmp / "a");
        run_experiment(lil_config(1, {Frequency::pi_multiple(1, 3)}), tmp / "b");
        CHECK_THROWS_AS(summarize_runs({tmp / "a", tmp / "b"}), config_error);
    }
    SUBCASE("non-lil runs are rejected") {
        ExperimentConfig c;
        c.process = IntermittentSpec{0.25, 100, ScalarFunction::identity()};
        c.mode = Mode::transfer;
        c.grid = 1024;
        c.iterations = 20;
        c.alpha_lags = {1};
        run_experiment(c, tmp / "tr");
        CHECK_THROWS_AS(summarize_runs({tmp / "tr"}), config_error);
    }
}
