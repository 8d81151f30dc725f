#include "periodolil/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include <openssl/evp.h>

namespace periodolil {

__extension__ using i128 = __int128;

// ---------------------------------------------------------------------------
// Frequency

Frequency Frequency::from_radians(double t) {
    if (!std::isfinite(t)) throw std::invalid_argument("frequency must be finite");
    double r = std::fmod(t, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    Frequency f;
    f.t_ = r;
    return f;
}

Frequency Frequency::from_turns(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::invalid_argument("frequency denominator must be nonzero");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    num %= den;
    if (num < 0) num += den;
    const std::int64_t g = std::gcd(num, den);
    Frequency f;
    f.num_ = num / g;
    f.den_ = den / g;
    f.t_ = kTwoPi * static_cast<double>(f.num_) / static_cast<double>(f.den_);
    return f;
}

Frequency Frequency::fourier(std::int64_t j, std::int64_t n) {
    if (n <= 0) throw std::invalid_argument("Fourier grid size must be positive");
    return from_turns(j, n);
}

Frequency Frequency::pi_multiple(std::int64_t p, std::int64_t q) {
    if (q == 0) throw std::invalid_argument("frequency denominator must be nonzero");
    return from_turns(p, 2 * q);
}

bool Frequency::is_zero() const noexcept {
    return den_ != 0 ? num_ == 0 : t_ == 0.0;
}

bool Frequency::is_pi() const noexcept {
    return den_ != 0 ? 2 * num_ == den_ : t_ == kPi;
}

cplx Frequency::phase(std::int64_t k) const {
    if (den_ != 0) {
        i128 prod = static_cast<i128>(num_) * k;
        std::int64_t r = static_cast<std::int64_t>(prod % den_);
        if (r < 0) r += den_;
        // Centre the residue so the angle lies in (−π, π].
        if (2 * r > den_) r -= den_;
        const double angle = kTwoPi * static_cast<double>(r) / static_cast<double>(den_);
        return std::polar(1.0, angle);
    }
    const double angle = std::fmod(static_cast<double>(k) * t_, kTwoPi);
    return std::polar(1.0, angle);
}

Frequency Frequency::reflected() const {
    if (den_ != 0) return from_turns(den_ - num_, den_);
    return from_radians(kTwoPi - t_);
}

// ---------------------------------------------------------------------------
// Schedules and normalizers

CheckpointSchedule::CheckpointSchedule(std::vector<std::int64_t> points) : points_(std::move(points)) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (points_[i] < 3) throw std::invalid_argument("checkpoints must be >= 3");
        if (i > 0 && points_[i] <= points_[i - 1])
            throw std::invalid_argument("checkpoints must be strictly increasing");
    }
}

bool CheckpointSchedule::contains(std::int64_t n) const {
    return std::binary_search(points_.begin(), points_.end(), n);
}

double loglog_norm(std::int64_t n) {
    if (n < 3) throw std::domain_error("loglog_norm requires n >= 3");
    const double nd = static_cast<double>(n);
    return std::sqrt(2.0 * nd * std::log(std::log(nd)));
}

CheckpointSchedule dyadic_checkpoints(int k_min, int k_max) {
    if (k_min < 4) throw std::invalid_argument("dyadic_checkpoints: k_min must be >= 4");
    if (k_min > k_max) throw std::invalid_argument("dyadic_checkpoints: k_min must not exceed k_max");
    if (k_max > 62) throw std::invalid_argument("dyadic_checkpoints: k_max must be <= 62");
    std::vector<std::int64_t> pts;
    for (int k = k_min; k <= k_max; ++k) pts.push_back(std::int64_t{1} << k);
    return CheckpointSchedule(std::move(pts));
}

// ---------------------------------------------------------------------------
// Seeds

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(const SeedSpec& seed) noexcept {
    std::uint64_t h = splitmix64(seed.master_seed);
    h = splitmix64(h ^ splitmix64(seed.stream.replicate ^ 0x5851f42d4c957f2dULL));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(seed.stream.role) * 0xd1b54a32d192ed03ULL));
    return h;
}

Engine make_engine(const SeedSpec& seed) {
    const std::uint64_t s = derive_seed(seed);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
    return Engine(seq);
}

Estimate mean_and_se(std::span<const double> xs) {
    Estimate e;
    e.count = xs.size();
    if (xs.empty()) return e;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    e.mean = mean;
    if (xs.size() < 2) return e;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(xs.size() - 1);
    e.se = std::sqrt(var / static_cast<double>(xs.size()));
    return e;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Worker pool

unsigned worker_count() {
    if (const char* env = std::getenv("PERIODOLIL_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace periodolil
