#pragma once

#include "qttlab/optics.hpp"
#include "qttlab/timescale.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qttlab {

struct DetectorSpec {
    std::string label = "D";  // keys the detector's random stream
    double efficiency = 0.65;
    double jitter_fwhm_ps = 68.0;
    double dark_rate = 100.0;  // counts / s
    double dead_time_ns = 50.0;

    void validate() const;
};

struct TimerSpec {
    double lsb_ps = 1.0;
    double record_length_s = 2.5;
    double cycle_period_s = 7.0;
    double max_rate = 1.0e5;  // counts / s sustained by the timer
    std::string reference;

    void validate() const;
    double record_length_ps() const noexcept { return record_length_s * 1e12; }
};

// Channels D1..D4 as wired at the two sites.
enum class Channel : std::uint16_t { D1 = 1, D2 = 2, D3 = 3, D4 = 4 };

struct TimeTagStream {
    std::uint16_t channel = 0;
    std::vector<std::int64_t> tags;  // ascending, lsb ticks since record start
    double lsb_ps = 1.0;
    std::int64_t record_epoch_s = 0;

    bool operator==(const TimeTagStream&) const = default;
};

// Round half to even (IEEE default rounding).
std::int64_t quantize(double t_ps, double lsb_ps) noexcept;

// Efficiency thinning, Gaussian jitter, dark counts, local-clock mapping,
// non-paralyzable dead time, rate cap, record window and quantization.
// Arrivals are true times relative to the record epoch; the clock realization is
// indexed in absolute seconds.
TimeTagStream detect(const PhotonBatch& arrivals, const DetectorSpec& det, const TimerSpec& timer,
                     const ClockRealization& clock, std::uint64_t seed, std::uint16_t channel = 0);

}  // namespace qttlab
