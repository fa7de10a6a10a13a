#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qttlab {

inline constexpr double kFwhmPerSigma = 2.354820045030949;  // 2 sqrt(2 ln 2)

// Energy conservation 1/lambda_s + 1/lambda_i = 1/lambda_p.
double idler_wavelength(double pump_nm, double signal_nm);
double pump_for(double signal_nm, double idler_nm);

struct PairSourceSpec {
    double pump_nm = 780.0;
    double signal_center_nm = 1560.0;
    double signal_bandwidth_fwhm_nm = 3.5;
    double pair_rate = 1.0e6;                 // pairs / s
    double correlation_jitter_fwhm_ps = 71.8; // signal-minus-idler emission spread
    double signal_center_uncertainty_nm = 0.0;
    std::string label = "A";

    void validate() const;
    double idler_center_nm() const { return idler_wavelength(pump_nm, signal_center_nm); }
};

// How a source is retuned to a new signal center.
enum class Tuning {
    CommonMode,  // pump follows so the idler center moves with the signal center
    FixedPump,   // pump unchanged, idler moves opposite (energy conservation)
};

// Retune `nominal` so its signal center sits at `signal_center_nm`.
PairSourceSpec tune_source(const PairSourceSpec& nominal, double signal_center_nm, Tuning tuning);

inline constexpr std::uint8_t kKeepSignal = 1;
inline constexpr std::uint8_t kKeepIdler = 2;

struct PairEvent {
    double t_emit_ps = 0.0;  // true time of the idler photon, relative to the batch epoch
    double lambda_s_nm = 0.0;
    double lambda_i_nm = 0.0;
    double dt_si_ps = 0.0;   // signal emission minus idler emission
    std::uint8_t kept = kKeepSignal | kKeepIdler;

    double t_signal_ps() const noexcept { return t_emit_ps + dt_si_ps; }
};

struct PairBatch {
    std::int64_t epoch_s = 0;
    std::vector<PairEvent> events;
};

// Homogeneous Poisson emission over [t_start, t_start + duration) seconds after epoch.
PairBatch emit_pairs(const PairSourceSpec& spec, std::int64_t epoch_s, double t_start_s,
                     double duration_s, std::uint64_t seed);

// Independent survival probability of each photon of a pair up to its detector.
struct Heralding {
    double p_signal = 1.0;
    double p_idler = 1.0;
};

// Same process as emit_pairs followed by independent per-photon thinning, sampled
// directly: only pairs with at least one surviving photon are generated and each
// event's `kept` mask tells which photons survive.
PairBatch emit_pairs_thinned(const PairSourceSpec& spec, std::int64_t epoch_s, double t_start_s,
                             double duration_s, const Heralding& keep, std::uint64_t seed);

}  // namespace qttlab
