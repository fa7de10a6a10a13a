#include "qttlab/config.hpp"

#include "qttlab/error.hpp"

#include <array>
#include <utility>

namespace qttlab {

namespace {

// Common-clock baseline: H-maser on both timers, 50 km link with matched gratings in
// the idler arms, ~20 kHz per detector, 2.5 s records every 7 s.
constexpr std::string_view kCommonClock = R"(
[campaign]
name = common_clock
n_runs = 100
master_seed = 50050
start_epoch_s = 0
fast_thinning = true

[clocks]
mode = common
tau0_s = 0.1

[clock_a]
kind = hmaser

[clock_b]
kind = hmaser

[source_a]
signal_center_nm = 1560.26
center_uncertainty_nm = 0.037
bandwidth_fwhm_nm = 3.5
pair_rate = 5.2e6
correlation_jitter_fwhm_ps = 71.8
tuning = common

[source_b]
signal_center_nm = 1560.24
center_uncertainty_nm = 0.044
bandwidth_fwhm_nm = 3.5
pair_rate = 5.2e6
correlation_jitter_fwhm_ps = 71.8
tuning = common

[link]
fiber = true
length_km = 50
dispersion_ps_nm_km = 17
loss_db_km = 0.2
group_delay_ps_km = 4.9e6
ref_wavelength_nm = 1560
temp_delay_ps_km_K = 40
temp_dispersion_ps_nm_km_K = -0.0025
signal_extra_loss_db = 12.28
idler_extra_loss_db = 19.28

[fbg]
enabled = true
placement = idler
dispersion_ps_nm = -850
delay_ps = 0
loss_db = 3

[detector]
efficiency = 0.65
jitter_fwhm_ps = 68
dark_rate = 100
dead_time_ns = 50

[timer]
lsb_ps = 1
record_length_s = 2.5
cycle_period_s = 7
max_rate = 1e5

[correlation]
coarse_bin_ps = 1000
search_span_ps = 1e9
fine_bin_ps = 2
fine_span_ps = 2000
significance = 5

[ambient]
mean_temp_K = 293.15
amplitude_K = 0
period_s = 86400
)";

// Timer A on a free-running Rb clock, timer B on the H-maser; 6 s cycle.
constexpr std::string_view kIndependentClocks = R"(
[campaign]
preset = common_clock
name = independent_clocks

[clocks]
mode = independent

[clock_a]
kind = rb

[timer]
cycle_period_s = 6
)";

// Timer B disciplined by the Rb 10 MHz delivered over a second 50 km link. The
// laboratory temperature cycle is accelerated to a 700 s period.
constexpr std::string_view kFreqTransfer = R"(
[campaign]
preset = common_clock
name = freq_transfer
n_runs = 600

[clocks]
mode = transfer

[clock_a]
kind = rb

[transfer]
white_pm_adev_1s = 1.15e-14
floor_adev = 3.2e-16
sine_amplitude_s = 2e-12
sine_period_s = 700
)";

constexpr std::string_view kBiasLow = R"(
[campaign]
preset = common_clock
name = bias_low_consistency
n_runs = 36

[source_a]
signal_center_nm = 1561.24
center_uncertainty_nm = 0.038
bandwidth_fwhm_nm = 3.55

[source_b]
signal_center_nm = 1560.54
center_uncertainty_nm = 0.103
bandwidth_fwhm_nm = 3.5
)";

constexpr std::string_view kBiasHigh = R"(
[campaign]
preset = common_clock
name = bias_high_consistency
n_runs = 36
)";

// Same sources with the 50 km spans removed; an attenuator keeps the remote rate at
// ~20 kHz and the wider, uncompensated peak needs a wider fine window.
constexpr std::string_view kBiasLowNoFiber = R"(
[campaign]
preset = bias_low_consistency
name = bias_low_consistency_nofiber

[link]
fiber = false
signal_extra_loss_db = 22.28

[correlation]
fine_bin_ps = 20
fine_span_ps = 10000
)";

constexpr std::string_view kBiasHighNoFiber = R"(
[campaign]
preset = bias_high_consistency
name = bias_high_consistency_nofiber

[link]
fiber = false
signal_extra_loss_db = 22.28

[correlation]
fine_bin_ps = 20
fine_span_ps = 10000
)";

// Low-consistency sources under an accelerated, exaggerated temperature cycle.
constexpr std::string_view kSpectralLow = R"(
[campaign]
preset = bias_low_consistency
name = spectral_consistency_longterm
n_runs = 800

[link]
temp_dispersion_ps_nm_km_K = -0.4

[ambient]
amplitude_K = 3
period_s = 1400
)";

constexpr std::string_view kSpectralHigh = R"(
[campaign]
preset = bias_high_consistency
name = spectral_consistency_longterm_high
n_runs = 800

[link]
temp_dispersion_ps_nm_km_K = -0.4

[ambient]
amplitude_K = 3
period_s = 1400
)";

// No noise anywhere: ideal clocks, monochromatic sources, jitter-free detectors.
constexpr std::string_view kIdealLink = R"(
[campaign]
preset = common_clock
name = ideal_link
n_runs = 10

[clock_a]
kind = ideal

[clock_b]
kind = ideal

[source_a]
signal_center_nm = 1560
bandwidth_fwhm_nm = 0
correlation_jitter_fwhm_ps = 0

[source_b]
signal_center_nm = 1560
bandwidth_fwhm_nm = 0
correlation_jitter_fwhm_ps = 0

[link]
temp_delay_ps_km_K = 0
temp_dispersion_ps_nm_km_K = 0

[detector]
jitter_fwhm_ps = 0
dark_rate = 0

[correlation]
fine_bin_ps = 1
)";

constexpr std::array<std::pair<std::string_view, std::string_view>, 10> kPresets{{
    {"common_clock", kCommonClock},
    {"independent_clocks", kIndependentClocks},
    {"freq_transfer", kFreqTransfer},
    {"bias_low_consistency", kBiasLow},
    {"bias_high_consistency", kBiasHigh},
    {"bias_low_consistency_nofiber", kBiasLowNoFiber},
    {"bias_high_consistency_nofiber", kBiasHighNoFiber},
    {"spectral_consistency_longterm", kSpectralLow},
    {"spectral_consistency_longterm_high", kSpectralHigh},
    {"ideal_link", kIdealLink},
}};

}  // namespace

std::string_view preset_text(std::string_view name)
{
    for (const auto& [n, text] : kPresets)
        if (n == name) return text;
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names()
{
    std::vector<std::string> v;
    for (const auto& p : kPresets) v.emplace_back(p.first);
    return v;
}

Scenario load_preset(std::string_view name)
{
    return parse_config(preset_text(name));
}

}  // namespace qttlab
