#pragma once

#include "qttlab/detect.hpp"
#include "qttlab/rng.hpp"
#include "qttlab/timescale.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <omp.h>

namespace qttlab::test {

inline double mean(const std::vector<double>& v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double stddev(const std::vector<double>& v)
{
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Poisson process of ascending tick values over [0, length) at `rate` per tick.
inline std::vector<std::int64_t> poisson_ticks(double rate_per_tick, std::int64_t length, std::uint64_t seed)
{
    Rng rng = make_rng(seed);
    std::exponential_distribution<double> gap(rate_per_tick);
    std::vector<std::int64_t> out;
    double t = gap(rng);
    while (t < static_cast<double>(length)) {
        out.push_back(static_cast<std::int64_t>(t));
        t += gap(rng);
    }
    return out;
}

inline TimeTagStream stream_of(std::vector<std::int64_t> tags, double lsb = 1.0)
{
    TimeTagStream s;
    s.tags = std::move(tags);
    std::sort(s.tags.begin(), s.tags.end());
    s.lsb_ps = lsb;
    return s;
}

inline ClockRealization flat_clock(double span_s = 100.0, double offset_s = 0.0)
{
    auto m = ideal_clock();
    m.initial_offset_s = offset_s;
    return synth_phase(m, static_cast<std::size_t>(span_s / 0.1) + 2, 0.1, 1, -1.0);
}

// Restores the OpenMP thread count on scope exit.
class ThreadCount {
public:
    explicit ThreadCount(int n) : saved_(omp_get_max_threads()) { omp_set_num_threads(n); }
    ~ThreadCount() { omp_set_num_threads(saved_); }
    ThreadCount(const ThreadCount&) = delete;
    ThreadCount& operator=(const ThreadCount&) = delete;

private:
    int saved_;
};

template <class F>
double best_seconds(F&& f, int repeats = 5)
{
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

}  // namespace qttlab::test
