#include "qttlab/detect.hpp"

#include "qttlab/error.hpp"
#include "sorting.hpp"
#include "qttlab/rng.hpp"
#include "qttlab/source.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace qttlab {

void DetectorSpec::validate() const
{
    const std::string who = "detector " + label + ": ";
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw ConfigError(who + "efficiency out of range");
    if (!(jitter_fwhm_ps >= 0.0)) throw ConfigError(who + "jitter must be >= 0");
    if (!(dark_rate >= 0.0)) throw ConfigError(who + "dark_rate must be >= 0");
    if (!(dead_time_ns >= 0.0)) throw ConfigError(who + "dead_time must be >= 0");
}

void TimerSpec::validate() const
{
    if (!(lsb_ps > 0.0)) throw ConfigError("timer: lsb must be > 0");
    if (!(record_length_s > 0.0)) throw ConfigError("timer: record_length must be > 0");
    if (!(record_length_s <= cycle_period_s))
        throw ConfigError("timer: record_length must not exceed cycle_period");
    if (!(max_rate >= 0.0)) throw ConfigError("timer: max_rate must be >= 0");
}

std::int64_t quantize(double t_ps, double lsb_ps) noexcept
{
    return static_cast<std::int64_t>(std::nearbyint(t_ps / lsb_ps));
}

TimeTagStream detect(const PhotonBatch& arrivals, const DetectorSpec& det, const TimerSpec& timer,
                     const ClockRealization& clock, std::uint64_t seed, std::uint16_t channel)
{
    det.validate();
    timer.validate();
    const double epoch = static_cast<double>(arrivals.epoch_s);
    const double record_ps = timer.record_length_ps();

    // one clock read per record fixes the dark-count window; realization must cover the record
    const double margin_s = 1e-3;
    if (!clock.covers(epoch - margin_s, epoch + timer.record_length_s + margin_s))
        throw RangeError("detector " + det.label + ": clock span does not cover record at epoch " +
                         std::to_string(arrivals.epoch_s));
    const double x_start_ps = clock.offset_at(epoch) * 1e12;

    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> unit(0.0, 1.0);
    const double jitter_sigma = det.jitter_fwhm_ps / kFwhmPerSigma;

    std::vector<double> t;  // true time, ps after epoch
    t.reserve(static_cast<std::size_t>(static_cast<double>(arrivals.photons.size()) * det.efficiency) +
              static_cast<std::size_t>(det.dark_rate * timer.record_length_s * 1.2) + 16);
    for (const auto& ph : arrivals.photons) {
        if (det.efficiency < 1.0 && u01(rng) >= det.efficiency) continue;
        double ti = ph.t_ps;
        if (jitter_sigma > 0.0) ti += jitter_sigma * unit(rng);
        t.push_back(ti);
    }

    detail::sort_nearly(t.begin(), t.end());
    const auto n_photons = static_cast<std::ptrdiff_t>(t.size());
    if (det.dark_rate > 0.0) {
        std::exponential_distribution<double> gap(det.dark_rate * 1e-12);
        const double t0 = -x_start_ps;
        double td = t0 + gap(rng);
        while (td < t0 + record_ps) {
            t.push_back(td);
            td += gap(rng);
        }
    }
    std::inplace_merge(t.begin(), t.begin() + n_photons, t.end());

    // local time relative to the record start
    for (auto& ti : t) ti += clock.offset_at(epoch + ti * 1e-12) * 1e12;
    detail::sort_nearly(t.begin(), t.end());

    std::vector<double> alive;
    alive.reserve(t.size());
    const double dead_ps = det.dead_time_ns * 1e3;
    for (double ti : t) {
        if (alive.empty() || ti - alive.back() >= dead_ps) alive.push_back(ti);
    }

    std::vector<double> in_window;
    in_window.reserve(alive.size());
    for (double ti : alive) {
        if (ti >= 0.0 && ti < record_ps) in_window.push_back(ti);
    }

    const auto budget = static_cast<std::size_t>(std::floor(timer.max_rate * timer.record_length_s));
    if (in_window.size() > budget) {
        // uniform random subset of size `budget`
        std::vector<std::size_t> idx(in_window.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < budget; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
            std::swap(idx[i], idx[pick(rng)]);
        }
        idx.resize(budget);
        std::sort(idx.begin(), idx.end());
        std::vector<double> kept;
        kept.reserve(budget);
        for (auto i : idx) kept.push_back(in_window[i]);
        in_window.swap(kept);
    }

    TimeTagStream out;
    out.channel = channel;
    out.lsb_ps = timer.lsb_ps;
    out.record_epoch_s = arrivals.epoch_s;
    out.tags.reserve(in_window.size());
    const std::int64_t last_tick = quantize(record_ps, timer.lsb_ps);
    for (double ti : in_window) out.tags.push_back(std::min(quantize(ti, timer.lsb_ps), last_tick));
    detail::sort_nearly(out.tags.begin(), out.tags.end());
    return out;
}

}  // namespace qttlab
