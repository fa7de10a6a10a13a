#pragma once

#include "qttlab/coincidence.hpp"
#include "qttlab/scenario.hpp"
#include "qttlab/stability.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace qttlab {

struct MeasurementRun {
    std::int64_t epoch_s = 0;
    CoincidenceResult result_ab;  // t4 - t1
    CoincidenceResult result_ba;  // t3 - t2
};

struct OffsetSample {
    std::size_t run_index = 0;
    std::int64_t epoch_s = 0;
    double t0_ps = 0.0;
    double sigma_ps = 0.0;
    double n_ab = 0.0;
    double n_ba = 0.0;
    double fwhm_ab_ps = 0.0;
    double fwhm_ba_ps = 0.0;
};

struct OffsetSeries {
    std::vector<OffsetSample> samples;  // strictly increasing epochs
    double cycle_period_s = 7.0;
    std::vector<std::size_t> failed_runs;
};

// t0 = ((t4 - t1) - (t3 - t2)) / 2, sigma = sqrt(u_ab^2 + u_ba^2) / 2.
OffsetSample combine(const MeasurementRun& run);

struct BiasPrediction {
    double tau_prime_ps = 0.0;
    double length_km = 0.0;
    double dispersion_ps_nm_km = 0.0;
    double lambda_a_nm = 0.0;
    double lambda_b_nm = 0.0;
    double uncertainty_ps = 0.0;
};

// Residual two-way bias from a signal-wavelength mismatch: L D (lambda_a - lambda_b).
BiasPrediction bias_predict(double length_km, double dispersion_ps_nm_km, double lambda_a_nm,
                            double lambda_b_nm, double u_a_nm = 0.0, double u_b_nm = 0.0);

struct CampaignClocks {
    ClockRealization a;
    ClockRealization b;
};

// Clock realizations covering n_runs measurement cycles.
CampaignClocks synth_campaign_clocks(const Scenario& s, std::size_t n_runs, std::uint64_t seed);

struct RunStreams {
    TimeTagStream d1, d2, d3, d4;
};

std::int64_t run_epoch(const Scenario& s, std::size_t run_index) noexcept;

// Emission through detection for one measurement cycle.
RunStreams simulate_streams(const Scenario& s, const CampaignClocks& clocks, std::size_t run_index,
                            std::uint64_t seed);

MeasurementRun measure(const Scenario& s, const RunStreams& streams);

using RunObserver = std::function<void(std::size_t, const RunStreams&)>;

// Runs are independent and OpenMP-parallel; failed runs become gaps. Throws
// CampaignAborted when more than half the runs fail.
OffsetSeries run_campaign(const Scenario& s, std::size_t n_runs, std::uint64_t seed,
                          const RunObserver& observer = {});

// Uniform phase series from the longest gap-free stretch (t0 converted to seconds).
PhaseData longest_contiguous(const OffsetSeries& series);

double mean_t0(const OffsetSeries& series);
double stddev_t0(const OffsetSeries& series);

}  // namespace qttlab
