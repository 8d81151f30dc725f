#include "periodolil/functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace periodolil {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

// Splits "name(a, b)" into name and argument list. A bare name has no args.
struct Call {
    std::string name;
    std::vector<double> args;
};

Call parse_call(std::string_view text) {
    text = trim(text);
    Call call;
    const auto open = text.find('(');
    if (open == std::string_view::npos) {
        call.name = std::string(text);
        return call;
    }
    if (text.back() != ')') throw std::invalid_argument(fmt::format("malformed call '{}'", text));
    call.name = std::string(trim(text.substr(0, open)));
    std::string_view inner = text.substr(open + 1, text.size() - open - 2);
    while (!trim(inner).empty()) {
        const auto comma = inner.find(',');
        call.args.push_back(parse_real(inner.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        inner.remove_prefix(comma + 1);
    }
    return call;
}

void expect_args(const Call& c, std::size_t n) {
    if (c.args.size() != n)
        throw std::invalid_argument(fmt::format("'{}' expects {} argument(s), got {}", c.name, n, c.args.size()));
}

}  // namespace

std::string format_real(double x) { return fmt::format("{:.17g}", x); }

double parse_real(std::string_view text) {
    text = trim(text);
    if (text.empty()) throw std::invalid_argument("empty number");
    const std::string buf(text);
    char* end = nullptr;
    const double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size()) throw std::invalid_argument(fmt::format("not a number: '{}'", text));
    return v;
}

// ---------------------------------------------------------------------------
// InnovationDist

InnovationDist InnovationDist::gaussian(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian: sigma must be positive");
    return {Kind::gaussian, sigma, 0.0};
}

InnovationDist InnovationDist::rademacher() { return {Kind::rademacher, 1.0, 0.0}; }

InnovationDist InnovationDist::uniform(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("uniform: need lo < hi");
    return {Kind::uniform, lo, hi};
}

InnovationDist InnovationDist::student_t(double nu) {
    if (!(nu > 0.0)) throw std::invalid_argument("student_t: nu must be positive");
    return {Kind::student_t, nu, 0.0};
}

InnovationDist InnovationDist::degenerate(double c) { return {Kind::degenerate, c, 0.0}; }

bool InnovationDist::finite_variance() const noexcept { return kind != Kind::student_t || a > 2.0; }

double InnovationDist::variance() const noexcept {
    switch (kind) {
        case Kind::gaussian: return a * a;
        case Kind::rademacher: return 1.0;
        case Kind::uniform: return (b - a) * (b - a) / 12.0;
        case Kind::student_t: return a > 2.0 ? a / (a - 2.0) : std::numeric_limits<double>::infinity();
        case Kind::degenerate: return a * a;
    }
    return 0.0;
}

double InnovationDist::mean() const noexcept { return kind == Kind::degenerate ? a : 0.0; }

std::string InnovationDist::render() const {
    switch (kind) {
        case Kind::gaussian: return fmt::format("gaussian({})", format_real(a));
        case Kind::rademacher: return "rademacher";
        case Kind::uniform: return fmt::format("uniform({}, {})", format_real(a), format_real(b));
        case Kind::student_t: return fmt::format("student_t({})", format_real(a));
        case Kind::degenerate: return fmt::format("degenerate({})", format_real(a));
    }
    return {};
}

InnovationDist InnovationDist::parse(std::string_view text) {
    const Call c = parse_call(text);
    if (c.name == "gaussian") {
        expect_args(c, 1);
        return gaussian(c.args[0]);
    }
    if (c.name == "rademacher") {
        expect_args(c, 0);
        return rademacher();
    }
    if (c.name == "uniform") {
        expect_args(c, 2);
        return uniform(c.args[0], c.args[1]);
    }
    if (c.name == "student_t") {
        expect_args(c, 1);
        return student_t(c.args[0]);
    }
    if (c.name == "degenerate") {
        expect_args(c, 1);
        return degenerate(c.args[0]);
    }
    throw std::invalid_argument(fmt::format("unknown innovation distribution '{}'", c.name));
}

InnovationSampler::InnovationSampler(const InnovationDist& dist)
    : dist_(dist),
      normal_(0.0, dist.kind == InnovationDist::Kind::gaussian ? dist.a : 1.0),
      uniform_(dist.kind == InnovationDist::Kind::uniform ? dist.a : 0.0,
               dist.kind == InnovationDist::Kind::uniform ? dist.b : 1.0),
      student_(dist.kind == InnovationDist::Kind::student_t ? dist.a : 1.0) {}

double InnovationSampler::operator()(Engine& rng) {
    switch (dist_.kind) {
        case InnovationDist::Kind::gaussian: return normal_(rng);
        case InnovationDist::Kind::rademacher: return coin_(rng) ? 1.0 : -1.0;
        case InnovationDist::Kind::uniform: return uniform_(rng) - 0.5 * (dist_.a + dist_.b);
        case InnovationDist::Kind::student_t: return student_(rng);
        case InnovationDist::Kind::degenerate: return dist_.a;
    }
    return 0.0;
}

void InnovationSampler::fill(Engine& rng, std::span<double> out) {
    for (double& x : out) x = (*this)(rng);
}

// ---------------------------------------------------------------------------
// ScalarFunction

ScalarFunction ScalarFunction::sign_power(double p) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("sign_power: exponent must lie in (0, 1]");
    return {Kind::sign_power, p};
}

ScalarFunction ScalarFunction::neg_power(double b) {
    if (!(b >= 0.0)) throw std::invalid_argument("neg_power: exponent must be >= 0");
    return {Kind::neg_power, b};
}

double ScalarFunction::operator()(double x) const {
    switch (kind) {
        case Kind::identity: return x;
        case Kind::square: return x * x;
        case Kind::tanh: return std::tanh(x);
        case Kind::cosine: return std::cos(x);
        case Kind::sign_power: return std::copysign(std::pow(std::abs(x), param), x);
        case Kind::abs_ratio: return std::abs(x) / (1.0 + std::abs(x));
        case Kind::constant: return param;
        case Kind::neg_power: return std::pow(x, -param);
    }
    return 0.0;
}

std::optional<HolderData> ScalarFunction::holder() const {
    switch (kind) {
        case Kind::identity:
        case Kind::tanh:
        case Kind::cosine:
        case Kind::abs_ratio:
        case Kind::constant: return HolderData{1.0, 0.0, 1.0};
        case Kind::square: return HolderData{1.0, 1.0, 2.0};
        case Kind::sign_power: return HolderData{param, 0.0, std::pow(2.0, 1.0 - param)};
        case Kind::neg_power: return std::nullopt;
    }
    return std::nullopt;
}

double ScalarFunction::bound() const {
    switch (kind) {
        case Kind::tanh:
        case Kind::cosine:
        case Kind::abs_ratio: return 1.0;
        case Kind::constant: return std::abs(param);
        case Kind::neg_power: return param == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
        default: return std::numeric_limits<double>::infinity();
    }
}

std::string ScalarFunction::render() const {
    switch (kind) {
        case Kind::identity: return "identity";
        case Kind::square: return "square";
        case Kind::tanh: return "tanh";
        case Kind::cosine: return "cosine";
        case Kind::sign_power: return fmt::format("sign_power({})", format_real(param));
        case Kind::abs_ratio: return "abs_ratio";
        case Kind::constant: return fmt::format("constant({})", format_real(param));
        case Kind::neg_power: return fmt::format("neg_power({})", format_real(param));
    }
    return {};
}

ScalarFunction ScalarFunction::parse(std::string_view text) {
    const Call c = parse_call(text);
    auto bare = [&](ScalarFunction f) {
        expect_args(c, 0);
        return f;
    };
    if (c.name == "identity") return bare(identity());
    if (c.name == "square") return bare(square());
    if (c.name == "tanh") return bare(tanh_fn());
    if (c.name == "cosine") return bare(cosine());
    if (c.name == "abs_ratio") return bare(abs_ratio());
    if (c.name == "sign_power") {
        expect_args(c, 1);
        return sign_power(c.args[0]);
    }
    if (c.name == "constant") {
        expect_args(c, 1);
        return constant(c.args[0]);
    }
    if (c.name == "neg_power") {
        expect_args(c, 1);
        return neg_power(c.args[0]);
    }
    throw std::invalid_argument(fmt::format("unknown function '{}'", c.name));
}

}  // namespace periodolil
