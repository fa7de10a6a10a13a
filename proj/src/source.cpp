#include "qttlab/source.hpp"

#include "qttlab/error.hpp"
#include "qttlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace qttlab {

double idler_wavelength(double pump_nm, double signal_nm)
{
    return 1.0 / (1.0 / pump_nm - 1.0 / signal_nm);
}

double pump_for(double signal_nm, double idler_nm)
{
    return 1.0 / (1.0 / signal_nm + 1.0 / idler_nm);
}

void PairSourceSpec::validate() const
{
    const std::string who = "source " + label + ": ";
    if (!(pump_nm > 0.0)) throw ConfigError(who + "pump wavelength must be > 0");
    if (!(signal_center_nm > pump_nm))
        throw ConfigError(who + "signal center must exceed the pump wavelength");
    if (!(pair_rate >= 0.0) || !std::isfinite(pair_rate))
        throw ConfigError(who + "pair_rate must be >= 0");
    if (!(signal_bandwidth_fwhm_nm >= 0.0)) throw ConfigError(who + "bandwidth must be >= 0");
    if (!(correlation_jitter_fwhm_ps >= 0.0))
        throw ConfigError(who + "correlation jitter must be >= 0");
    if (!(signal_center_uncertainty_nm >= 0.0))
        throw ConfigError(who + "center uncertainty must be >= 0");
}

PairSourceSpec tune_source(const PairSourceSpec& nominal, double signal_center_nm, Tuning tuning)
{
    PairSourceSpec s = nominal;
    s.signal_center_nm = signal_center_nm;
    if (tuning == Tuning::CommonMode) {
        const double shift = signal_center_nm - nominal.signal_center_nm;
        s.pump_nm = pump_for(signal_center_nm, nominal.idler_center_nm() + shift);
    }
    return s;
}

namespace {

// Exponential-gap Poisson arrivals; fills events with times only.
template <class Fn>
void poisson_times(double rate, double t_start_ps, double duration_ps, Rng& rng, Fn&& on_event)
{
    if (!(rate > 0.0) || !(duration_ps > 0.0)) return;
    std::exponential_distribution<double> gap(rate * 1e-12);
    const double t_end = t_start_ps + duration_ps;
    double t = t_start_ps + gap(rng);
    while (t < t_end) {
        on_event(t);
        t += gap(rng);
    }
}

void draw_photons(const PairSourceSpec& spec, PairEvent& ev, Rng& rng,
                  std::normal_distribution<double>& unit)
{
    const double sig_bw = spec.signal_bandwidth_fwhm_nm / kFwhmPerSigma;
    const double sig_dt = spec.correlation_jitter_fwhm_ps / kFwhmPerSigma;
    ev.lambda_s_nm = spec.signal_center_nm + sig_bw * unit(rng);
    ev.lambda_i_nm = idler_wavelength(spec.pump_nm, ev.lambda_s_nm);
    ev.dt_si_ps = sig_dt * unit(rng);
}

}  // namespace

PairBatch emit_pairs(const PairSourceSpec& spec, std::int64_t epoch_s, double t_start_s,
                     double duration_s, std::uint64_t seed)
{
    spec.validate();
    if (!(duration_s >= 0.0)) throw ConfigError("emit_pairs: duration must be >= 0");
    PairBatch batch{epoch_s, {}};
    Rng rng = make_rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    batch.events.reserve(static_cast<std::size_t>(spec.pair_rate * duration_s * 1.01) + 16);
    poisson_times(spec.pair_rate, t_start_s * 1e12, duration_s * 1e12, rng, [&](double t) {
        PairEvent ev;
        ev.t_emit_ps = t;
        draw_photons(spec, ev, rng, unit);
        batch.events.push_back(ev);
    });
    return batch;
}

PairBatch emit_pairs_thinned(const PairSourceSpec& spec, std::int64_t epoch_s, double t_start_s,
                             double duration_s, const Heralding& keep, std::uint64_t seed)
{
    spec.validate();
    if (!(duration_s >= 0.0)) throw ConfigError("emit_pairs: duration must be >= 0");
    const double ps = std::clamp(keep.p_signal, 0.0, 1.0);
    const double pi = std::clamp(keep.p_idler, 0.0, 1.0);
    const double any = 1.0 - (1.0 - ps) * (1.0 - pi);

    PairBatch batch{epoch_s, {}};
    if (any <= 0.0) return batch;
    const double p_both = ps * pi / any;
    const double p_signal_only = ps * (1.0 - pi) / any;

    Rng rng = make_rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    batch.events.reserve(static_cast<std::size_t>(spec.pair_rate * any * duration_s * 1.01) + 16);
    poisson_times(spec.pair_rate * any, t_start_s * 1e12, duration_s * 1e12, rng, [&](double t) {
        PairEvent ev;
        ev.t_emit_ps = t;
        const double u = u01(rng);
        ev.kept = u < p_both ? (kKeepSignal | kKeepIdler)
                             : (u < p_both + p_signal_only ? kKeepSignal : kKeepIdler);
        draw_photons(spec, ev, rng, unit);
        batch.events.push_back(ev);
    });
    return batch;
}

}  // namespace qttlab
