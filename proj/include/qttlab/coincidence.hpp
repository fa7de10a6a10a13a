#pragma once

#include "qttlab/detect.hpp"

#include <cstdint>
#include <vector>

namespace qttlab {

struct CorrelationParams {
    double coarse_bin_ps = 1000.0;
    double search_span_ps = 1.0e9;  // lags searched in [-span, +span]
    double fine_bin_ps = 2.0;
    double fine_span_ps = 2000.0;
    double significance = 5.0;      // Gaussian-equivalent sigma, look-elsewhere corrected

    void validate() const;
};

struct Histogram {
    std::vector<double> bin_centers;  // ps
    std::vector<std::int64_t> counts;
    double bin_width = 0.0;           // ps

    std::int64_t total() const noexcept;
};

struct CoincidenceResult {
    double center_ps = 0.0;
    double center_uncertainty_ps = 0.0;
    double fwhm_ps = 0.0;
    double n_coincidences = 0.0;
    double background_per_bin = 0.0;
    bool fit_ok = false;
};

// Binned cross-correlation of lags t_b - t_a: counts[k] holds lags that round to
// (k - span_bins) * bin_ticks.
struct CoarseCorrelation {
    std::int64_t bin_ticks = 0;
    std::int64_t span_bins = 0;
    std::vector<std::uint32_t> counts;

    std::int64_t lag_ticks(std::size_t k) const noexcept
    {
        return (static_cast<std::int64_t>(k) - span_bins) * bin_ticks;
    }
};

struct CoarsePeak {
    std::int64_t lag_ticks = 0;
    std::uint32_t count = 0;
    double background = 0.0;    // mean count per bin
    double significance = 0.0;  // Gaussian-equivalent, corrected for the number of bins
};

// Two-pointer sweep over all pairs inside the search span. OpenMP-parallel over
// chunks of `a`; integer accumulation keeps the result independent of threading.
CoarseCorrelation coarse_correlation(const std::vector<std::int64_t>& a,
                                     const std::vector<std::int64_t>& b, std::int64_t bin_ticks,
                                     std::int64_t span_bins);

// Fine histogram counts of t_b - t_a over [lo, lo + n_bins * width) ticks.
std::vector<std::int64_t> fine_counts(const std::vector<std::int64_t>& a,
                                      const std::vector<std::int64_t>& b, std::int64_t lo_ticks,
                                      std::int64_t width_ticks, std::size_t n_bins);

// Single-threaded references for the two kernels above.
namespace serial {
CoarseCorrelation coarse_correlation(const std::vector<std::int64_t>& a,
                                     const std::vector<std::int64_t>& b, std::int64_t bin_ticks,
                                     std::int64_t span_bins);
std::vector<std::int64_t> fine_counts(const std::vector<std::int64_t>& a,
                                      const std::vector<std::int64_t>& b, std::int64_t lo_ticks,
                                      std::int64_t width_ticks, std::size_t n_bins);
}  // namespace serial

// Maximum bin (ties: smallest |lag|) with its Poisson significance.
CoarsePeak find_coarse_peak(const CoarseCorrelation& corr);

// Lag in ps of the cross-correlation maximum; throws NoCorrelation below threshold.
double coarse_offset(const TimeTagStream& a, const TimeTagStream& b, const CorrelationParams& p);

// Fixed point of "lower median of lags within +-window of the current center",
// started at `start_ticks`. Shift-covariant: shifting b by D shifts the result by D.
std::int64_t refine_center(const TimeTagStream& a, const TimeTagStream& b,
                           std::int64_t start_ticks, std::int64_t window_ticks);

Histogram fine_histogram(const TimeTagStream& a, const TimeTagStream& b, double center_ps,
                         const CorrelationParams& p);

// Gaussian-plus-constant weighted least squares (weights 1 / max(count, 1)).
// Throws NoPeak when no significant peak is present; a fit that does not converge
// falls back to the background-subtracted centroid with fit_ok = false.
CoincidenceResult fit_peak(const Histogram& h, double threshold = 5.0);

// coarse_offset -> refine_center -> fine_histogram -> fit_peak. Center is t_b - t_a.
CoincidenceResult identify(const TimeTagStream& a, const TimeTagStream& b, const CorrelationParams& p);

}  // namespace qttlab
