#include "periodolil/cli/config.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include <fmt/format.h>

namespace periodolil {

std::string to_string(Mode m) {
    switch (m) {
        case Mode::lil: return "lil";
        case Mode::spectral: return "spectral";
        case Mode::conditions: return "conditions";
        case Mode::martingale: return "martingale";
        case Mode::transfer: return "transfer";
    }
    return "unknown";
}

Mode parse_mode(std::string_view text) {
    for (auto m : {Mode::lil, Mode::spectral, Mode::conditions, Mode::martingale, Mode::transfer})
        if (to_string(m) == text) return m;
    throw config_error(fmt::format("unknown mode '{}'", text));
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Splits on commas outside parentheses.
std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        else if (s[i] == ')') --depth;
        else if (s[i] == ',' && depth == 0) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    const auto last = trim(s.substr(start));
    if (!last.empty() || !out.empty()) out.push_back(last);
    return out;
}

template <typename Int>
Int parse_int(std::string_view s) {
    s = trim(s);
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw config_error(fmt::format("invalid integer '{}'", s));
    return v;
}

double parse_number(std::string_view s) {
    try {
        return parse_real(s);
    } catch (const std::exception&) {
        throw config_error(fmt::format("invalid number '{}'", s));
    }
}

// name(arg, arg, ...) → (name, args)
std::pair<std::string_view, std::vector<std::string_view>> parse_call(std::string_view s) {
    s = trim(s);
    const auto open = s.find('(');
    if (open == std::string_view::npos || s.back() != ')') return {s, {}};
    return {trim(s.substr(0, open)), split_list(s.substr(open + 1, s.size() - open - 2))};
}

std::string render_coeffs(const std::vector<double>& a) {
    const auto J = static_cast<std::int64_t>(a.size()) - 1;
    if (a.size() >= 2 && std::abs(a[1]) < 1.0 && a[0] == 1.0) {
        try {
            if (geometric_coeffs(a[1], J) == a) return fmt::format("geometric({}, {})", format_real(a[1]), J);
        } catch (const std::invalid_argument&) {
        }
    }
    if (a.size() >= 3 && a[0] == 1.0 && a[1] == 1.0 && a[2] > 0.0 && a[2] < 1.0) {
        const double beta = -std::log2(a[2]);
        try {
            if (power_coeffs(beta, J) == a) return fmt::format("power({}, {})", format_real(beta), J);
        } catch (const std::invalid_argument&) {
        }
    }
    std::string s;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ", ";
        s += format_real(a[i]);
    }
    return s;
}

std::vector<double> parse_coeffs(std::string_view s) {
    const auto [name, args] = parse_call(s);
    try {
        if (name == "geometric") {
            if (args.size() == 1) return geometric_coeffs(parse_number(args[0]));
            if (args.size() == 2) return geometric_coeffs(parse_number(args[0]), parse_int<std::int64_t>(args[1]));
            throw config_error("geometric(rho[, order]) takes one or two arguments");
        }
        if (name == "power") {
            if (args.size() != 2) throw config_error("power(beta, order) takes two arguments");
            return power_coeffs(parse_number(args[0]), parse_int<std::int64_t>(args[1]));
        }
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    std::vector<double> a;
    for (auto item : split_list(s)) a.push_back(parse_number(item));
    if (a.empty()) throw config_error("empty coefficient list");
    return a;
}

std::string render_schedule(const CheckpointSchedule& s) {
    const auto& p = s.points();
    if (!p.empty() && std::has_single_bit(static_cast<std::uint64_t>(p.front()))) {
        const int k0 = std::countr_zero(static_cast<std::uint64_t>(p.front()));
        const int k1 = k0 + static_cast<int>(p.size()) - 1;
        if (k0 >= 4 && k1 <= 62 && dyadic_checkpoints(k0, k1) == s) return fmt::format("dyadic({}, {})", k0, k1);
    }
    std::string out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(p[i]);
    }
    return out;
}

CheckpointSchedule parse_schedule(std::string_view s) {
    const auto [name, args] = parse_call(s);
    try {
        if (name == "dyadic") {
            if (args.size() != 2) throw config_error("dyadic(k_min, k_max) takes two arguments");
            return dyadic_checkpoints(parse_int<int>(args[0]), parse_int<int>(args[1]));
        }
        std::vector<std::int64_t> pts;
        for (auto item : split_list(s)) pts.push_back(parse_int<std::int64_t>(item));
        return CheckpointSchedule(std::move(pts));
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
}

template <typename F>
auto wrap(F&& f) {
    try {
        return f();
    } catch (const config_error&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
}

using Section = std::map<std::string, std::pair<std::string, int>, std::less<>>;

class SectionReader {
public:
    SectionReader(const Section& s, std::string name) : s_(s), name_(std::move(name)) {}

    std::optional<std::string_view> get(std::string_view key) {
        const auto it = s_.find(key);
        if (it == s_.end()) return std::nullopt;
        used_.emplace_back(key);
        return it->second.first;
    }

    std::string_view require(std::string_view key) {
        auto v = get(key);
        if (!v) throw config_error(fmt::format("[{}] is missing key '{}'", name_, key));
        return *v;
    }

    void finish() const {
        for (const auto& [k, v] : s_)
            if (std::find(used_.begin(), used_.end(), k) == used_.end())
                throw config_error(fmt::format("line {}: unknown key '{}' in [{}]", v.second, k, name_));
    }

private:
    const Section& s_;
    std::string name_;
    std::vector<std::string> used_;
};

ProcessSpec read_process(SectionReader& r) {
    const std::string kind(r.require("kind"));
    auto innovation = [&](std::string_view key) {
        return wrap([&] { return InnovationDist::parse(r.require(key)); });
    };
    auto function = [&](std::string_view key, ScalarFunction fallback) {
        const auto v = r.get(key);
        return v ? wrap([&] { return ScalarFunction::parse(*v); }) : fallback;
    };
    auto burn = [&](std::int64_t fallback) {
        const auto v = r.get("burn_in");
        return v ? parse_int<std::int64_t>(*v) : fallback;
    };
    if (kind == "iid") return IidSpec{innovation("innovation")};
    if (kind == "linear") return LinearSpec{parse_coeffs(r.require("coeffs")), innovation("innovation")};
    if (kind == "function_of_linear") {
        LinearSpec base{parse_coeffs(r.require("coeffs")), innovation("innovation")};
        return FunctionOfLinearSpec{std::move(base), function("h", ScalarFunction::identity())};
    }
    if (kind == "arl") {
        ARLSpec s;
        s.C = parse_number(r.require("C"));
        s.delta = parse_number(r.require("delta"));
        s.innovation = innovation("innovation");
        s.burn_in = burn(s.burn_in);
        return s;
    }
    if (kind == "intermittent") {
        IntermittentSpec s;
        s.gamma = parse_number(r.require("gamma"));
        s.burn_in = burn(s.burn_in);
        s.observable = function("observable", s.observable);
        return s;
    }
    if (kind == "metropolis") {
        MetropolisSpec s;
        s.stay_probability = function("stay_probability", s.stay_probability);
        if (const auto v = r.get("base")) s.base = wrap([&] { return InnovationDist::parse(*v); });
        s.observable = function("observable", s.observable);
        s.burn_in = burn(s.burn_in);
        return s;
    }
    throw config_error(fmt::format("unknown process kind '{}'", kind));
}

}  // namespace

std::string render_frequency(const Frequency& t) {
    if (!t.is_exact()) throw config_error("only exact frequencies can be rendered");
    // t = 2π num/den = (2 num/den) π
    std::int64_t p = 2 * t.turns_num(), q = t.turns_den();
    const std::int64_t g = std::gcd(p, q);
    if (g > 0) {
        p /= g;
        q /= g;
    }
    if (p == 0) return "0";
    if (q == 1) return p == 1 ? "pi" : fmt::format("{} pi", p);
    return fmt::format("{}/{} pi", p, q);
}

Frequency parse_frequency(std::string_view text) {
    text = trim(text);
    const auto [name, args] = parse_call(text);
    if (name == "grid") {
        if (args.size() != 2) throw config_error("grid(j, n) takes two arguments");
        return wrap([&] { return Frequency::fourier(parse_int<std::int64_t>(args[0]), parse_int<std::int64_t>(args[1])); });
    }
    if (text == "pi") return Frequency::pi_multiple(1, 1);
    if (text == "0") return Frequency::pi_multiple(0, 1);
    if (text.size() < 3 || text.substr(text.size() - 2) != "pi")
        throw config_error(fmt::format("frequency '{}' must be 'p/q pi', 'pi' or 'grid(j, n)'", text));
    const auto num = trim(text.substr(0, text.size() - 2));
    const auto slash = num.find('/');
    if (slash == std::string_view::npos) return Frequency::pi_multiple(parse_int<std::int64_t>(num), 1);
    const auto q = parse_int<std::int64_t>(num.substr(slash + 1));
    if (q == 0) throw config_error("frequency denominator must be nonzero");
    return Frequency::pi_multiple(parse_int<std::int64_t>(num.substr(0, slash)), q);
}

std::string render_process(const ProcessSpec& spec) {
    std::string s = fmt::format("kind = {}\n", process_kind(spec));
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, IidSpec>) {
                s += fmt::format("innovation = {}\n", p.innovation.render());
            } else if constexpr (std::is_same_v<T, LinearSpec>) {
                s += fmt::format("coeffs = {}\ninnovation = {}\n", render_coeffs(p.coeffs), p.innovation.render());
            } else if constexpr (std::is_same_v<T, FunctionOfLinearSpec>) {
                s += fmt::format("coeffs = {}\ninnovation = {}\nh = {}\n", render_coeffs(p.base.coeffs),
                                 p.base.innovation.render(), p.h.render());
            } else if constexpr (std::is_same_v<T, ARLSpec>) {
                s += fmt::format("C = {}\ndelta = {}\ninnovation = {}\nburn_in = {}\n", format_real(p.C),
                                 format_real(p.delta), p.innovation.render(), p.burn_in);
            } else if constexpr (std::is_same_v<T, IntermittentSpec>) {
                s += fmt::format("gamma = {}\nburn_in = {}\nobservable = {}\n", format_real(p.gamma), p.burn_in,
                                 p.observable.render());
            } else {
                s += fmt::format("stay_probability = {}\nbase = {}\nobservable = {}\nburn_in = {}\n",
                                 p.stay_probability.render(), p.base.render(), p.observable.render(), p.burn_in);
            }
        },
        spec);
    return s;
}

std::string render_config(const ExperimentConfig& c) {
    std::string s = "[process]\n" + render_process(c.process);
    s += "\n[experiment]\n";
    s += fmt::format("mode = {}\n", to_string(c.mode));
    std::string freqs;
    for (std::size_t i = 0; i < c.frequencies.size(); ++i) {
        if (i) freqs += ", ";
        freqs += render_frequency(c.frequencies[i]);
    }
    s += fmt::format("frequencies = {}\n", freqs);
    s += fmt::format("include_zero = {}\n", c.include_zero ? "true" : "false");
    s += fmt::format("checkpoints = {}\n", render_schedule(c.schedule));
    s += fmt::format("replicates = {}\n", c.replicates);
    s += fmt::format("seed = {}\n", c.master_seed);
    s += fmt::format("n = {}\n", c.n);
    s += fmt::format("half_width = {}\n", c.half_width);
    s += fmt::format("fejer_order = {}\n", c.fejer_order);
    s += fmt::format("k_max = {}\n", c.k_max);
    s += fmt::format("grid = {}\n", c.grid);
    s += fmt::format("iterations = {}\n", c.iterations);
    std::string lags;
    for (std::size_t i = 0; i < c.alpha_lags.size(); ++i) {
        if (i) lags += ", ";
        lags += std::to_string(c.alpha_lags[i]);
    }
    s += fmt::format("alpha_lags = {}\n", lags);
    s += "\n[output]\n";
    s += fmt::format("dir = {}\n", c.output_dir);
    return s;
}

ExperimentConfig parse_config(std::string_view text) {
    std::map<std::string, Section, std::less<>> sections;
    std::string current;
    int lineno = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw config_error(fmt::format("line {}: malformed section header", lineno));
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (current != "process" && current != "experiment" && current != "output")
                throw config_error(fmt::format("line {}: unknown section [{}]", lineno, current));
            if (sections.count(current)) throw config_error(fmt::format("line {}: duplicate section [{}]", lineno, current));
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw config_error(fmt::format("line {}: expected key = value", lineno));
        if (current.empty()) throw config_error(fmt::format("line {}: key outside any section", lineno));
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw config_error(fmt::format("line {}: empty key", lineno));
        auto& sec = sections[current];
        if (sec.count(key)) throw config_error(fmt::format("line {}: duplicate key '{}'", lineno, key));
        sec.emplace(key, std::make_pair(value, lineno));
    }
    if (!sections.count("process")) throw config_error("missing [process] section");
    if (!sections.count("experiment")) throw config_error("missing [experiment] section");

    ExperimentConfig c;
    SectionReader proc(sections["process"], "process");
    c.process = read_process(proc);
    proc.finish();

    SectionReader ex(sections["experiment"], "experiment");
    c.mode = parse_mode(ex.require("mode"));
    if (auto v = ex.get("frequencies")) {
        c.frequencies.clear();
        for (auto item : split_list(*v)) c.frequencies.push_back(parse_frequency(item));
    }
    if (auto v = ex.get("include_zero")) {
        if (*v == "true") c.include_zero = true;
        else if (*v == "false") c.include_zero = false;
        else throw config_error("include_zero must be true or false");
    }
    if (auto v = ex.get("checkpoints")) c.schedule = parse_schedule(*v);
    if (auto v = ex.get("replicates")) c.replicates = parse_int<std::uint64_t>(*v);
    if (auto v = ex.get("seed")) c.master_seed = parse_int<std::uint64_t>(*v);
    if (auto v = ex.get("n")) c.n = parse_int<std::int64_t>(*v);
    if (auto v = ex.get("half_width")) c.half_width = parse_int<std::int64_t>(*v);
    if (auto v = ex.get("fejer_order")) c.fejer_order = parse_int<std::int64_t>(*v);
    if (auto v = ex.get("k_max")) c.k_max = parse_int<std::int64_t>(*v);
    if (auto v = ex.get("grid")) c.grid = parse_int<std::int64_t>(*v);
    if (auto v = ex.get("iterations")) c.iterations = parse_int<std::int64_t>(*v);
    if (auto v = ex.get("alpha_lags")) {
        c.alpha_lags.clear();
        for (auto item : split_list(*v)) c.alpha_lags.push_back(parse_int<std::int64_t>(item));
    }
    ex.finish();

    if (sections.count("output")) {
        SectionReader out(sections["output"], "output");
        if (auto v = out.get("dir")) c.output_dir = std::string(*v);
        out.finish();
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error(fmt::format("cannot read config '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate_config(const ExperimentConfig& c) {
    if (c.replicates < 1) throw config_error("replicates must be >= 1");
    for (const auto& t : c.frequencies)
        if (t.is_zero() && !c.include_zero)
            throw config_error("frequency 0 requires include_zero = true");

    std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            auto check_innovation = [](const InnovationDist& d) {
                if (d.is_test_only()) throw config_error("degenerate innovations are reserved for tests");
            };
            if constexpr (std::is_same_v<T, IidSpec>) check_innovation(p.innovation);
            else if constexpr (std::is_same_v<T, LinearSpec>) check_innovation(p.innovation);
            else if constexpr (std::is_same_v<T, FunctionOfLinearSpec>) check_innovation(p.base.innovation);
            else if constexpr (std::is_same_v<T, ARLSpec>) {
                check_innovation(p.innovation);
                if (!(p.C > 0.0 && p.C <= 1.0)) throw config_error("ARL: C must lie in (0, 1]");
                if (!(p.delta >= 0.0 && p.delta < 1.0)) throw config_error("ARL: delta must lie in [0, 1)");
                if (p.burn_in < 0) throw config_error("burn_in must be >= 0");
            } else if constexpr (std::is_same_v<T, IntermittentSpec>) {
                if (!(p.gamma > 0.0 && p.gamma < 1.0)) throw config_error("intermittent: gamma must lie in (0, 1)");
                if (p.burn_in < 0) throw config_error("burn_in must be >= 0");
            } else {
                if (p.burn_in < 0) throw config_error("burn_in must be >= 0");
            }
        },
        c.process);

    const bool linear = std::holds_alternative<LinearSpec>(c.process);
    switch (c.mode) {
        case Mode::lil:
            if (c.frequencies.empty()) throw config_error("mode lil needs at least one frequency");
            if (c.schedule.empty()) throw config_error("mode lil needs a checkpoint schedule");
            if (c.schedule.front() < 16) throw config_error("checkpoints must start at 16 or later");
            break;
        case Mode::spectral:
            if (c.frequencies.empty()) throw config_error("mode spectral needs at least one frequency");
            if (c.n < 8) throw config_error("spectral window length n must be >= 8");
            if (c.half_width < 0 || 4 * c.half_width > c.n) throw config_error("half_width must lie in [0, n/4]");
            if (c.fejer_order < 1) throw config_error("fejer_order must be >= 1");
            break;
        case Mode::conditions:
            if (c.k_max < 1000) throw config_error("k_max must be >= 1000");
            if (std::holds_alternative<IntermittentSpec>(c.process) && c.grid < 1024)
                throw config_error("grid must be >= 1024");
            if (const auto* f = std::get_if<FunctionOfLinearSpec>(&c.process); f && !f->h.holder())
                throw config_error("the function h has no declared Hölder data");
            break;
        case Mode::martingale:
            if (!linear) throw config_error("mode martingale requires a linear process");
            if (c.frequencies.empty()) throw config_error("mode martingale needs at least one frequency");
            if (c.n < 1) throw config_error("n must be >= 1");
            if (c.replicates < 2) throw config_error("mode martingale needs replicates >= 2");
            break;
        case Mode::transfer:
            if (!std::holds_alternative<IntermittentSpec>(c.process))
                throw config_error("mode transfer requires an intermittent process");
            if (c.grid < 1024) throw config_error("grid must be >= 1024");
            if (c.iterations < 1) throw config_error("iterations must be >= 1");
            if (c.alpha_lags.empty()) throw config_error("alpha_lags must not be empty");
            for (auto k : c.alpha_lags)
                if (k < 1) throw config_error("alpha lags must be >= 1");
            break;
    }
    if (c.output_dir.empty()) throw config_error("output dir must not be empty");
}

}  // namespace periodolil
