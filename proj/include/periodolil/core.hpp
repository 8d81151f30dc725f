#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace periodolil {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Raised when a process generator produces unusable output (non-finite
/// values, overflow, invalid kernel probabilities).
class generation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by numerical routines that fail to converge.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when input data violates a precondition (negative series terms,
/// non-monotone quantile function, ...).
class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * @brief A frequency t in [0, 2π).
 *
 * Frequencies built from exact rationals (Fourier grid indices or rational
 * multiples of π) remember the fraction of a full turn t/(2π) = num/den in
 * lowest terms. Phases e^{ikt} are then reduced modulo the denominator in
 * integer arithmetic before any trigonometric call, so S_n(t) carries no
 * phase drift for large k.
 */
class Frequency {
public:
    Frequency() = default;

    /// Arbitrary real frequency, reduced into [0, 2π).
    static Frequency from_radians(double t);
    /// Fourier frequency 2πj/n.
    static Frequency fourier(std::int64_t j, std::int64_t n);
    /// The frequency (p/q)·π.
    static Frequency pi_multiple(std::int64_t p, std::int64_t q);

    double radians() const noexcept { return t_; }
    bool is_exact() const noexcept { return den_ != 0; }
    /// Fraction of a full turn, valid only when is_exact().
    std::int64_t turns_num() const noexcept { return num_; }
    std::int64_t turns_den() const noexcept { return den_; }

    bool is_zero() const noexcept;
    bool is_pi() const noexcept;

    /// e^{ikt}.
    cplx phase(std::int64_t k) const;

    /// Reflection 2π − t (mod 2π).
    Frequency reflected() const;

    friend bool operator==(const Frequency& a, const Frequency& b) noexcept {
        if (a.den_ != 0 || b.den_ != 0) return a.num_ == b.num_ && a.den_ == b.den_;
        return a.t_ == b.t_;
    }

private:
    static Frequency from_turns(std::int64_t num, std::int64_t den);

    double t_ = 0.0;
    std::int64_t num_ = 0;
    std::int64_t den_ = 0;  // 0 means "not an exact rational of a turn"
};

/// Strictly increasing sample sizes at which running statistics are recorded.
class CheckpointSchedule {
public:
    CheckpointSchedule() = default;
    explicit CheckpointSchedule(std::vector<std::int64_t> points);

    const std::vector<std::int64_t>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    std::int64_t front() const { return points_.front(); }
    std::int64_t back() const { return points_.back(); }
    bool contains(std::int64_t n) const;

    friend bool operator==(const CheckpointSchedule&, const CheckpointSchedule&) = default;

private:
    std::vector<std::int64_t> points_;
};

/// √(2 n ln ln n). Throws std::domain_error for n < 3.
double loglog_norm(std::int64_t n);

/// {2^k : k_min ≤ k ≤ k_max}. Throws std::invalid_argument unless 4 ≤ k_min ≤ k_max ≤ 62.
CheckpointSchedule dyadic_checkpoints(int k_min, int k_max);

/// Roles distinguish independent random streams belonging to one replicate.
enum class StreamRole : std::uint32_t {
    process = 1,
    centering = 2,
    inner_futures = 3,
    auxiliary = 4,
};

struct StreamId {
    std::uint64_t replicate = 0;
    StreamRole role = StreamRole::process;

    friend bool operator==(const StreamId&, const StreamId&) = default;
};

struct SeedSpec {
    std::uint64_t master_seed = 0;
    StreamId stream{};

    SeedSpec with_role(StreamRole role) const { return {master_seed, {stream.replicate, role}}; }
    SeedSpec with_replicate(std::uint64_t r) const { return {master_seed, {r, stream.role}}; }

    friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

using Engine = std::mt19937_64;

/// Counter-based derivation: a pure hash of (master seed, replicate, role).
std::uint64_t derive_seed(const SeedSpec& seed) noexcept;
Engine make_engine(const SeedSpec& seed);

/// Monte Carlo estimate with its standard error.
struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t count = 0;
};

Estimate mean_and_se(std::span<const double> xs);

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Worker count from PERIODOLIL_THREADS, falling back to hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, count) on the worker pool. Results must be
/// written to per-index slots; the call order is unspecified.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace periodolil
