#include "periodolil/transform.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace periodolil {

namespace {

// Neumaier step on one real component.
inline void neumaier(double& sum, double& comp, double term) {
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) comp += (sum - t) + term;
    else comp += (term - t) + sum;
    sum = t;
}

// FFTW planning is not thread-safe; execution with new-array plans is.
std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
        if (!data) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
};

// Σ_{m=0}^{G−1} y_m e^{+2πi g m / G}
std::vector<cplx> backward_fft(std::span<const double> x, std::size_t G) {
    FftwBuffer in(G), out(G);
    for (std::size_t m = 0; m < G; ++m) {
        in.data[m][0] = m < x.size() ? x[m] : 0.0;
        in.data[m][1] = 0.0;
    }
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_plan_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(G), in.data, out.data, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
    std::vector<cplx> res(G);
    for (std::size_t g = 0; g < G; ++g) res[g] = cplx(out.data[g][0], out.data[g][1]);
    return res;
}

}  // namespace

cplx dft(std::span<const double> x, const Frequency& t) {
    if (x.empty()) throw std::invalid_argument("dft of an empty window");
    double re = 0.0, im = 0.0, cre = 0.0, cim = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const cplx term = t.phase(static_cast<std::int64_t>(k) + 1) * x[k];
        neumaier(re, cre, term.real());
        neumaier(im, cim, term.imag());
    }
    return {re + cre, im + cim};
}

std::vector<cplx> dft_grid_padded(std::span<const double> x, std::size_t G) {
    if (x.empty()) throw std::invalid_argument("dft_grid of an empty window");
    if (G < x.size()) throw std::invalid_argument("padded grid must be at least the window length");
    auto res = backward_fft(x, G);
    const auto Gi = static_cast<std::int64_t>(G);
    for (std::size_t g = 0; g < G; ++g) res[g] *= Frequency::fourier(static_cast<std::int64_t>(g), Gi).phase(1);
    return res;
}

std::vector<cplx> dft_grid(std::span<const double> x) { return dft_grid_padded(x, x.size()); }

DftState DftState::start(const Frequency& t) {
    DftState st;
    st.t = t;
    st.step = t.phase(1);
    return st;
}

void dft_push(DftState& st, double x) {
    ++st.n;
    if (st.n % kResyncPeriod == 0) st.phase = st.t.phase(st.n);
    else st.phase *= st.step;
    const cplx term = st.phase * x;
    double re = st.s.real(), im = st.s.imag();
    double cre = st.compensation.real(), cim = st.compensation.imag();
    neumaier(re, cre, term.real());
    neumaier(im, cim, term.imag());
    st.s = {re, im};
    st.compensation = {cre, cim};
}

DftState dft_update(DftState state, double x) {
    dft_push(state, x);
    return state;
}

double periodogram(cplx s, std::int64_t n) {
    if (n <= 0) throw std::domain_error("periodogram requires n >= 1");
    return std::norm(s) / (kTwoPi * static_cast<double>(n));
}

LilTracker LilTracker::start(const Frequency& t, CheckpointSchedule schedule) {
    LilTracker tr;
    tr.t = t;
    tr.schedule = std::move(schedule);
    return tr;
}

LilTracker lil_checkpoint(LilTracker tracker, const DftState& state, std::array<double, 2> vector_sum) {
    if (tracker.schedule.empty() || state.n < std::max<std::int64_t>(16, tracker.schedule.front())) {
        ++tracker.skipped;
        std::clog << "warning: LIL checkpoint at n=" << state.n << " precedes the schedule start; skipped\n";
        return tracker;
    }
    if (!tracker.schedule.contains(state.n)) return tracker;

    LilCheckpoint row;
    row.n = state.n;
    row.s = state.value();
    row.periodogram = periodogram(row.s, state.n);
    const double ll = std::log(std::log(static_cast<double>(state.n)));
    row.ratio = row.periodogram / ll;
    const double norm = loglog_norm(state.n);
    row.vector = {vector_sum[0] / norm, vector_sum[1] / norm};
    tracker.running_max = tracker.rows.empty() ? row.ratio : std::max(tracker.running_max, row.ratio);
    row.running_max = tracker.running_max;
    tracker.rows.push_back(row);
    return tracker;
}

LilTracker track_lil(std::span<const double> x, const Frequency& t, const CheckpointSchedule& schedule) {
    LilTracker tracker = LilTracker::start(t, schedule);
    DftState st = DftState::start(t);
    for (double v : x) {
        dft_push(st, v);
        if (schedule.contains(st.n)) {
            const cplx s = st.value();
            tracker = lil_checkpoint(std::move(tracker), st, {s.real(), s.imag()});
        }
    }
    return tracker;
}

}  // namespace periodolil
