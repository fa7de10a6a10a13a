#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qttlab {

// One power-law term of the fractional-frequency PSD, S_y(f) = h * f^alpha (one-sided).
struct NoiseComponent {
    int alpha = 0;
    double h = 0.0;
};

struct ClockModel {
    double initial_offset_s = 0.0;
    double frac_freq_offset = 0.0;
    double freq_drift_per_s = 0.0;
    std::vector<NoiseComponent> noise;
    std::string label;

    void validate() const;
};

// White-FM level giving the requested Allan deviation at tau: h0 = 2 tau sigma^2.
double white_fm_h0_for_adev(double adev, double tau_s);

// Flicker-FM level giving a flat Allan floor: h_-1 = sigma^2 / (2 ln 2).
double flicker_fm_h_for_floor(double adev_floor);

ClockModel ideal_clock(std::string label = "ideal");
// PRS10-class rubidium: white FM with sigma_y(6 s) = 2.9e-12.
ClockModel rubidium_clock(std::string label = "rb");
// Active H-maser: white FM two orders of magnitude below the Rb default.
ClockModel hydrogen_maser(std::string label = "hmaser");

// Phase (time-offset) samples of one clock on a uniform grid starting at origin_s.
class ClockRealization {
public:
    ClockRealization(ClockModel model, std::vector<double> phase_s, double tau0_s,
                     std::uint64_t seed, double origin_s = 0.0);

    const ClockModel& model() const noexcept { return model_; }
    const std::vector<double>& phase() const noexcept { return phase_; }
    double tau0() const noexcept { return tau0_; }
    std::uint64_t seed() const noexcept { return seed_; }
    double origin() const noexcept { return origin_; }
    double span_begin() const noexcept { return origin_; }
    double span_end() const noexcept;
    bool covers(double t_begin, double t_end) const noexcept;

    // Linear interpolation, exact on grid points. Throws RangeError outside the span.
    double offset_at(double t_s) const;

    // Time-shifted copy of the whole process (every sample + c).
    ClockRealization with_added_offset(double c_s) const;

private:
    ClockModel model_;
    std::vector<double> phase_;
    double tau0_;
    std::uint64_t seed_;
    double origin_;
};

ClockRealization synth_phase(const ClockModel& model, std::size_t n, double tau0_s,
                             std::uint64_t seed, double origin_s = 0.0);

// Residual phase added by a fiber frequency-transfer link.
struct TransferSpec {
    double white_pm_adev_1s = 0.0;  // ADEV(1 s) of the white-PM residual
    double floor_adev = 0.0;        // flat long-tau ADEV (flicker FM)
    double sine_amplitude_s = 0.0;  // temperature-driven phase term
    double sine_period_s = 0.0;
    double sine_phase_rad = 0.0;
    double epoch_offset_s = 0.0;    // free time offset of the receiving timer

    void validate() const;
    bool is_zero() const noexcept;
};

// Transfer spec of the 50 km microwave link: 1.15e-14 at 1 s, 3.2e-16 floor.
TransferSpec microwave_link_transfer();

// Residual process alone, on the upstream grid.
std::vector<double> transfer_residual(std::size_t n, double tau0_s, double origin_s,
                                      const TransferSpec& spec, std::uint64_t seed);

ClockRealization make_transferred_reference(const ClockRealization& upstream,
                                            const TransferSpec& spec, std::uint64_t seed);

}  // namespace qttlab
