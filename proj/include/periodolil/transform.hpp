#pragma once

#include "periodolil/core.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace periodolil {

/// S_n(t) = Σ_{k=1}^n e^{ikt} X_k with compensated summation.
cplx dft(std::span<const double> x, const Frequency& t);

/// S_n(2πj/n) for j = 0..n−1 via FFT, with the e^{ikt} (k from 1) phase convention.
std::vector<cplx> dft_grid(std::span<const double> x);

/// S_n(2πg/G) for g = 0..G−1, G ≥ n, i.e. the transform of x zero-padded to G.
std::vector<cplx> dft_grid_padded(std::span<const double> x, std::size_t G);

/// Phase resynchronisation period of the streaming transform.
inline constexpr std::int64_t kResyncPeriod = std::int64_t{1} << 12;

/**
 * @brief Streaming accumulator for S_n(t) at one frequency.
 *
 * The phase e^{int} advances by complex multiplication and is recomputed
 * directly every kResyncPeriod samples. The sum uses Neumaier compensation.
 */
struct DftState {
    Frequency t;
    std::int64_t n = 0;
    cplx s{0.0, 0.0};
    cplx compensation{0.0, 0.0};
    cplx phase{1.0, 0.0};
    cplx step{1.0, 0.0};

    static DftState start(const Frequency& t);
    cplx value() const noexcept { return s + compensation; }
};

DftState dft_update(DftState state, double x);
/// In-place variant for hot loops.
void dft_push(DftState& state, double x);

/// I_n = |s|²/(2πn). Throws std::domain_error for n = 0.
double periodogram(cplx s, std::int64_t n);

struct LilCheckpoint {
    std::int64_t n = 0;
    cplx s{};
    double periodogram = 0.0;
    double ratio = 0.0;                 // I_n / ln ln n
    std::array<double, 2> vector{};     // Σ Y_k / √(2 n ln ln n)
    double running_max = 0.0;
};

/// Per-frequency LIL bookkeeping over a checkpoint schedule.
struct LilTracker {
    Frequency t;
    CheckpointSchedule schedule;
    std::vector<LilCheckpoint> rows;
    double running_max = 0.0;
    std::int64_t skipped = 0;

    static LilTracker start(const Frequency& t, CheckpointSchedule schedule);
};

/// Records a checkpoint when state.n is in the schedule. Sample sizes below
/// the schedule start are skipped and counted in `skipped`.
LilTracker lil_checkpoint(LilTracker tracker, const DftState& state, std::array<double, 2> vector_sum);

/// Streams a whole window through one tracker.
LilTracker track_lil(std::span<const double> x, const Frequency& t, const CheckpointSchedule& schedule);

}  // namespace periodolil
