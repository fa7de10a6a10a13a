#include "qttlab/twoway.hpp"

#include "qttlab/error.hpp"
#include "sorting.hpp"
#include "qttlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace qttlab {

OffsetSample combine(const MeasurementRun& run)
{
    if (!run.result_ab.fit_ok || !run.result_ba.fit_ok)
        throw InvalidRun("combine: coincidence fit failed at epoch " + std::to_string(run.epoch_s));
    OffsetSample s;
    s.epoch_s = run.epoch_s;
    s.t0_ps = (run.result_ab.center_ps - run.result_ba.center_ps) / 2.0;
    s.sigma_ps = 0.5 * std::hypot(run.result_ab.center_uncertainty_ps, run.result_ba.center_uncertainty_ps);
    s.n_ab = run.result_ab.n_coincidences;
    s.n_ba = run.result_ba.n_coincidences;
    s.fwhm_ab_ps = run.result_ab.fwhm_ps;
    s.fwhm_ba_ps = run.result_ba.fwhm_ps;
    return s;
}

BiasPrediction bias_predict(double length_km, double dispersion_ps_nm_km, double lambda_a_nm,
                            double lambda_b_nm, double u_a_nm, double u_b_nm)
{
    if (!std::isfinite(length_km) || !std::isfinite(dispersion_ps_nm_km))
        throw ConfigError("bias_predict: L and D must be finite");
    BiasPrediction b;
    b.length_km = length_km;
    b.dispersion_ps_nm_km = dispersion_ps_nm_km;
    b.lambda_a_nm = lambda_a_nm;
    b.lambda_b_nm = lambda_b_nm;
    const double ld = length_km * dispersion_ps_nm_km;
    b.tau_prime_ps = ld * (lambda_a_nm - lambda_b_nm);
    b.uncertainty_ps = std::fabs(ld) * std::hypot(u_a_nm, u_b_nm);
    return b;
}

std::int64_t run_epoch(const Scenario& s, std::size_t run_index) noexcept
{
    return s.start_epoch_s + static_cast<std::int64_t>(run_index) *
                                 static_cast<std::int64_t>(s.timer.cycle_period_s);
}

CampaignClocks synth_campaign_clocks(const Scenario& s, std::size_t n_runs, std::uint64_t seed)
{
    const double guard = 2.0;
    const double origin = static_cast<double>(s.start_epoch_s) - guard;
    const double span = static_cast<double>(n_runs) * s.timer.cycle_period_s + 2.0 * guard;
    const auto n = static_cast<std::size_t>(std::ceil(span / s.clock_tau0_s)) + 2;

    auto a = synth_phase(s.clock_a, n, s.clock_tau0_s, derive_seed(seed, "clock:" + s.clock_a.label), origin);
    switch (s.clock_mode) {
    case ClockMode::Common: {
        auto b = a;
        return {std::move(a), std::move(b)};
    }
    case ClockMode::Independent: {
        auto b = synth_phase(s.clock_b, n, s.clock_tau0_s, derive_seed(seed, "clock:" + s.clock_b.label),
                             origin);
        return {std::move(a), std::move(b)};
    }
    case ClockMode::Transfer: {
        auto b = make_transferred_reference(a, s.transfer, derive_seed(seed, "transfer"));
        return {std::move(a), std::move(b)};
    }
    }
    throw ConfigError("unknown clock mode");
}

namespace {

// Bound on |delay| of a path for any wavelength the sources can plausibly emit.
double max_abs_delay_ps(const OpticalPath& p, const Scenario& s)
{
    const double amp = std::fabs(s.ambient.amplitude_K);
    const double lam_lo = std::min(s.source_a.signal_center_nm, s.source_b.signal_center_nm);
    const double lam_hi = std::max(s.source_a.signal_center_nm, s.source_b.signal_center_nm);
    const double bw = std::max(s.source_a.signal_bandwidth_fwhm_nm, s.source_b.signal_bandwidth_fwhm_nm);
    double d = 0.0;
    for (const auto& e : p.elements) {
        const double dl = std::max(std::fabs(lam_lo - e.ref_wavelength_nm), std::fabs(lam_hi - e.ref_wavelength_nm)) +
                          4.0 * bw + 5.0;
        d += std::fabs(e.base_delay_ps) + std::fabs(e.temp_delay_coeff_ps_K) * amp +
             (std::fabs(e.dispersion_ps_nm) + std::fabs(e.temp_dispersion_coeff_ps_nm_K) * amp) * dl;
    }
    return d;
}

struct Arms {
    PhotonBatch signal;
    PhotonBatch idler;
};

Arms split(const PairBatch& pairs)
{
    Arms arms{{pairs.epoch_s, {}}, {pairs.epoch_s, {}}};
    arms.signal.photons.reserve(pairs.events.size());
    arms.idler.photons.reserve(pairs.events.size());
    for (const auto& ev : pairs.events) {
        if (ev.kept & kKeepIdler) arms.idler.photons.push_back({ev.t_emit_ps, ev.lambda_i_nm});
        if (ev.kept & kKeepSignal) arms.signal.photons.push_back({ev.t_signal_ps(), ev.lambda_s_nm});
    }
    // signal times carry the emission jitter and may be slightly out of order
    detail::sort_nearly(arms.signal.photons.begin(), arms.signal.photons.end(),
              [](const Photon& x, const Photon& y) { return x.t_ps < y.t_ps; });
    return arms;
}

DetectorSpec perfect_efficiency(DetectorSpec d)
{
    d.efficiency = 1.0;
    return d;
}

}  // namespace

RunStreams simulate_streams(const Scenario& s, const CampaignClocks& clocks, std::size_t k,
                            std::uint64_t seed)
{
    const std::int64_t epoch = run_epoch(s, k);
    const auto e = static_cast<double>(epoch);
    const double L = s.timer.record_length_s;
    const double xabs = std::max({std::fabs(clocks.a.offset_at(e)), std::fabs(clocks.a.offset_at(e + L)),
                                  std::fabs(clocks.b.offset_at(e)), std::fabs(clocks.b.offset_at(e + L))});
    double dmax_ps = 0.0;
    for (const auto* p : {&s.forward, &s.backward, &s.local_a, &s.local_b})
        dmax_ps = std::max(dmax_ps, max_abs_delay_ps(*p, s));
    const double guard = 1e-6 + xabs;
    const double t_start = -(dmax_ps * 1e-12 + guard);
    const double duration = L + 2.0 * guard + 2.0 * dmax_ps * 1e-12;

    const auto& det = s.detectors;
    auto emit = [&](const PairSourceSpec& src, const OpticalPath& sig_path, const DetectorSpec& sig_det,
                    const OpticalPath& idl_path, const DetectorSpec& idl_det) {
        const auto sd = derive_seed(seed, "source:" + src.label, k);
        if (!s.fast_thinning) return emit_pairs(src, epoch, t_start, duration, sd);
        const Heralding keep{sig_path.transmission() * sig_det.efficiency,
                             idl_path.transmission() * idl_det.efficiency};
        return emit_pairs_thinned(src, epoch, t_start, duration, keep, sd);
    };
    auto path_for = [&](const OpticalPath& p) { return s.fast_thinning ? lossless(p) : p; };
    auto det_for = [&](const DetectorSpec& d) { return s.fast_thinning ? perfect_efficiency(d) : d; };
    auto prop = [&](const PhotonBatch& b, const OpticalPath& p) {
        return propagate(b, path_for(p), s.ambient, derive_seed(seed, "path:" + p.label, k));
    };
    auto tag = [&](const PhotonBatch& b, const DetectorSpec& d, const ClockRealization& clk, std::uint16_t ch) {
        return detect(b, det_for(d), s.timer, clk, derive_seed(seed, "det:" + d.label, k), ch);
    };

    RunStreams out;
    {
        const auto arms = split(emit(s.source_a, s.forward, det[3], s.local_a, det[0]));
        out.d1 = tag(prop(arms.idler, s.local_a), det[0], clocks.a, 1);
        out.d4 = tag(prop(arms.signal, s.forward), det[3], clocks.b, 4);
    }
    {
        const auto arms = split(emit(s.source_b, s.backward, det[2], s.local_b, det[1]));
        out.d2 = tag(prop(arms.idler, s.local_b), det[1], clocks.b, 2);
        out.d3 = tag(prop(arms.signal, s.backward), det[2], clocks.a, 3);
    }
    return out;
}

MeasurementRun measure(const Scenario& s, const RunStreams& st)
{
    MeasurementRun run;
    run.epoch_s = st.d1.record_epoch_s;
    run.result_ab = identify(st.d1, st.d4, s.correlation);
    run.result_ba = identify(st.d2, st.d3, s.correlation);
    return run;
}

OffsetSeries run_campaign(const Scenario& s, std::size_t n_runs, std::uint64_t seed,
                          const RunObserver& observer)
{
    s.validate();
    if (n_runs == 0) throw ConfigError("campaign: n_runs must be >= 1");
    const auto clocks = synth_campaign_clocks(s, n_runs, seed);

    std::vector<std::optional<OffsetSample>> results(n_runs);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n_runs); ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            const auto streams = simulate_streams(s, clocks, k, seed);
            if (observer) {
#pragma omp critical(qttlab_run_observer)
                observer(k, streams);
            }
            auto sample = combine(measure(s, streams));
            sample.run_index = k;
            results[k] = sample;
        } catch (const Error&) {
            results[k].reset();
        }
    }

    OffsetSeries series;
    series.cycle_period_s = s.timer.cycle_period_s;
    for (std::size_t k = 0; k < n_runs; ++k) {
        if (results[k]) series.samples.push_back(*results[k]);
        else series.failed_runs.push_back(k);
    }
    if (2 * series.failed_runs.size() > n_runs)
        throw CampaignAborted("campaign: " + std::to_string(series.failed_runs.size()) + " of " +
                              std::to_string(n_runs) + " runs failed");
    return series;
}

PhaseData longest_contiguous(const OffsetSeries& series)
{
    const auto& v = series.samples;
    std::size_t best_lo = 0, best_len = 0;
    std::size_t lo = 0;
    for (std::size_t i = 1; i <= v.size(); ++i) {
        const bool breaks = i == v.size() || v[i].run_index != v[i - 1].run_index + 1;
        if (breaks) {
            if (i - lo > best_len) {
                best_len = i - lo;
                best_lo = lo;
            }
            lo = i;
        }
    }
    PhaseData d;
    d.tau0 = series.cycle_period_s;
    d.x.reserve(best_len);
    for (std::size_t i = best_lo; i < best_lo + best_len; ++i) d.x.push_back(v[i].t0_ps * 1e-12);
    return d;
}

double mean_t0(const OffsetSeries& series)
{
    if (series.samples.empty()) throw LengthError("mean_t0: empty series");
    double s = 0.0;
    for (const auto& x : series.samples) s += x.t0_ps;
    return s / static_cast<double>(series.samples.size());
}

double stddev_t0(const OffsetSeries& series)
{
    const auto n = series.samples.size();
    if (n < 2) throw LengthError("stddev_t0: need at least two samples");
    const double m = mean_t0(series);
    double s = 0.0;
    for (const auto& x : series.samples) s += (x.t0_ps - m) * (x.t0_ps - m);
    return std::sqrt(s / static_cast<double>(n - 1));
}

}  // namespace qttlab
