#include "qttlab/coincidence.hpp"

#include "qttlab/error.hpp"
#include "qttlab/source.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <omp.h>

namespace qttlab {

namespace {

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept
{
    const std::int64_t q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

constexpr std::size_t kChunk = 4096;

struct LagWindow {
    std::int64_t lo;  // inclusive
    std::int64_t hi;  // exclusive
};

LagWindow coarse_window(std::int64_t bin, std::int64_t span_bins)
{
    return {-span_bins * bin - bin / 2, span_bins * bin + (bin - bin / 2)};
}

// Sweeps a[i_begin, i_end) against b, calling on_lag(d) for every lag in [lo, hi).
template <class Fn>
void sweep(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
           std::size_t i_begin, std::size_t i_end, LagWindow w, Fn&& on_lag)
{
    if (i_begin >= i_end) return;
    auto j = static_cast<std::size_t>(
        std::lower_bound(b.begin(), b.end(), a[i_begin] + w.lo) - b.begin());
    for (std::size_t i = i_begin; i < i_end; ++i) {
        const std::int64_t ta = a[i];
        while (j < b.size() && b[j] < ta + w.lo) ++j;
        for (std::size_t k = j; k < b.size() && b[k] < ta + w.hi; ++k) on_lag(b[k] - ta);
    }
}

void check_pair(const TimeTagStream& a, const TimeTagStream& b)
{
    if (a.record_epoch_s != b.record_epoch_s)
        throw FormatError("coincidence: streams belong to different record epochs");
    if (a.lsb_ps != b.lsb_ps) throw FormatError("coincidence: streams have different lsb");
}

std::int64_t to_ticks(double ps, double lsb)
{
    return static_cast<std::int64_t>(std::llround(ps / lsb));
}

}  // namespace

void CorrelationParams::validate() const
{
    if (!(coarse_bin_ps > 0.0) || !(fine_bin_ps > 0.0))
        throw ConfigError("correlation: bin widths must be > 0");
    if (!(fine_bin_ps <= coarse_bin_ps)) throw ConfigError("correlation: fine_bin must be <= coarse_bin");
    if (!(search_span_ps > 0.0) || !(fine_span_ps > 0.0))
        throw ConfigError("correlation: spans must be > 0");
    if (!(significance > 0.0)) throw ConfigError("correlation: significance must be > 0");
}

std::int64_t Histogram::total() const noexcept
{
    std::int64_t s = 0;
    for (auto c : counts) s += c;
    return s;
}

namespace serial {

CoarseCorrelation coarse_correlation(const std::vector<std::int64_t>& a,
                                     const std::vector<std::int64_t>& b, std::int64_t bin_ticks,
                                     std::int64_t span_bins)
{
    CoarseCorrelation c{bin_ticks, span_bins,
                        std::vector<std::uint32_t>(static_cast<std::size_t>(2 * span_bins + 1), 0)};
    const auto w = coarse_window(bin_ticks, span_bins);
    const std::int64_t half = bin_ticks / 2;
    sweep(a, b, 0, a.size(), w, [&](std::int64_t d) {
        ++c.counts[static_cast<std::size_t>(floor_div(d + half, bin_ticks) + span_bins)];
    });
    return c;
}

std::vector<std::int64_t> fine_counts(const std::vector<std::int64_t>& a,
                                      const std::vector<std::int64_t>& b, std::int64_t lo_ticks,
                                      std::int64_t width_ticks, std::size_t n_bins)
{
    std::vector<std::int64_t> counts(n_bins, 0);
    const LagWindow w{lo_ticks, lo_ticks + width_ticks * static_cast<std::int64_t>(n_bins)};
    sweep(a, b, 0, a.size(), w, [&](std::int64_t d) {
        ++counts[static_cast<std::size_t>((d - lo_ticks) / width_ticks)];
    });
    return counts;
}

}  // namespace serial

CoarseCorrelation coarse_correlation(const std::vector<std::int64_t>& a,
                                     const std::vector<std::int64_t>& b, std::int64_t bin_ticks,
                                     std::int64_t span_bins)
{
    const auto nb = static_cast<std::size_t>(2 * span_bins + 1);
    CoarseCorrelation c{bin_ticks, span_bins, std::vector<std::uint32_t>(nb, 0)};
    const auto w = coarse_window(bin_ticks, span_bins);
    const std::size_t n_chunks = (a.size() + kChunk - 1) / kChunk;

#pragma omp parallel
    {
        // a lone thread accumulates in place and skips the reduction
        const bool alone = omp_get_num_threads() == 1;
        std::vector<std::uint32_t> local;
        std::uint32_t* out = alone ? c.counts.data() : nullptr;
#pragma omp for schedule(dynamic) nowait
        for (std::ptrdiff_t ch = 0; ch < static_cast<std::ptrdiff_t>(n_chunks); ++ch) {
            if (!out) {
                local.assign(nb, 0);
                out = local.data();
            }
            const std::size_t lo = static_cast<std::size_t>(ch) * kChunk;
            sweep(a, b, lo, std::min(a.size(), lo + kChunk), w, [&](std::int64_t d) {
                ++out[static_cast<std::size_t>((d - w.lo) / bin_ticks)];
            });
        }
        if (!local.empty()) {
#pragma omp critical(qttlab_coarse_reduce)
            for (std::size_t k = 0; k < nb; ++k) c.counts[k] += local[k];
        }
    }
    return c;
}

std::vector<std::int64_t> fine_counts(const std::vector<std::int64_t>& a,
                                      const std::vector<std::int64_t>& b, std::int64_t lo_ticks,
                                      std::int64_t width_ticks, std::size_t n_bins)
{
    std::vector<std::int64_t> counts(n_bins, 0);
    const LagWindow w{lo_ticks, lo_ticks + width_ticks * static_cast<std::int64_t>(n_bins)};
    const std::size_t n_chunks = (a.size() + kChunk - 1) / kChunk;

#pragma omp parallel
    {
        const bool alone = omp_get_num_threads() == 1;
        std::vector<std::int64_t> local;
        std::int64_t* out = alone ? counts.data() : nullptr;
#pragma omp for schedule(dynamic) nowait
        for (std::ptrdiff_t ch = 0; ch < static_cast<std::ptrdiff_t>(n_chunks); ++ch) {
            if (!out) {
                local.assign(n_bins, 0);
                out = local.data();
            }
            const std::size_t lo = static_cast<std::size_t>(ch) * kChunk;
            sweep(a, b, lo, std::min(a.size(), lo + kChunk), w, [&](std::int64_t d) {
                ++out[static_cast<std::size_t>((d - lo_ticks) / width_ticks)];
            });
        }
        if (!local.empty()) {
#pragma omp critical(qttlab_fine_reduce)
            for (std::size_t k = 0; k < n_bins; ++k) counts[k] += local[k];
        }
    }
    return counts;
}

CoarsePeak find_coarse_peak(const CoarseCorrelation& corr)
{
    CoarsePeak peak;
    if (corr.counts.empty()) return peak;
    std::uint64_t total = 0;
    std::uint32_t top = 0;
    for (auto ck : corr.counts) {
        total += ck;
        top = std::max(top, ck);
    }
    std::size_t best = 0;
    bool found = false;
    for (std::size_t k = 0; k < corr.counts.size(); ++k) {
        if (corr.counts[k] != top) continue;
        if (!found || std::llabs(corr.lag_ticks(k)) < std::llabs(corr.lag_ticks(best))) best = k;
        found = true;
    }
    const double nbins = static_cast<double>(corr.counts.size());
    peak.lag_ticks = corr.lag_ticks(best);
    peak.count = corr.counts[best];
    // background from the other bins so a strong peak does not inflate it
    peak.background = nbins > 1 ? static_cast<double>(total - peak.count) / (nbins - 1.0)
                                : static_cast<double>(total);

    if (peak.count == 0) {
        peak.significance = 0.0;
        return peak;
    }
    if (peak.background <= 0.0) {
        peak.significance = std::numeric_limits<double>::infinity();
        return peak;
    }
    // P(X >= k) for X ~ Poisson(mu) is the regularized lower incomplete gamma P(k, mu)
    const double p_bin = boost::math::gamma_p(static_cast<double>(peak.count), peak.background);
    const double p_any = p_bin >= 1.0 ? 1.0 : -std::expm1(nbins * std::log1p(-p_bin));
    if (p_any <= 0.0) {
        peak.significance = std::numeric_limits<double>::infinity();
    } else if (p_any >= 1.0) {
        peak.significance = -std::numeric_limits<double>::infinity();
    } else {
        peak.significance = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p_any);
    }
    return peak;
}

double coarse_offset(const TimeTagStream& a, const TimeTagStream& b, const CorrelationParams& p)
{
    p.validate();
    check_pair(a, b);
    if (a.tags.empty() || b.tags.empty()) throw NoCorrelation("coarse_offset: empty stream");
    const std::int64_t bin = std::max<std::int64_t>(1, to_ticks(p.coarse_bin_ps, a.lsb_ps));
    const std::int64_t span_bins = std::max<std::int64_t>(1, to_ticks(p.search_span_ps, a.lsb_ps) / bin);
    const auto corr = coarse_correlation(a.tags, b.tags, bin, span_bins);
    const auto peak = find_coarse_peak(corr);
    if (!(peak.significance >= p.significance))
        throw NoCorrelation("coarse_offset: no cross-correlation peak above " +
                            std::to_string(p.significance) + " sigma (best " +
                            std::to_string(peak.significance) + ")");
    return static_cast<double>(peak.lag_ticks) * a.lsb_ps;
}

std::int64_t refine_center(const TimeTagStream& a, const TimeTagStream& b,
                           std::int64_t start_ticks, std::int64_t window_ticks)
{
    std::int64_t c = start_ticks;
    std::vector<std::int64_t> lags;
    for (int iter = 0; iter < 16; ++iter) {
        lags.clear();
        sweep(a.tags, b.tags, 0, a.tags.size(), {c - window_ticks, c + window_ticks + 1},
              [&](std::int64_t d) { lags.push_back(d); });
        if (lags.empty()) return c;
        const auto mid = lags.begin() + static_cast<std::ptrdiff_t>((lags.size() - 1) / 2);
        std::nth_element(lags.begin(), mid, lags.end());
        if (*mid == c) return c;
        c = *mid;
    }
    return c;
}

Histogram fine_histogram(const TimeTagStream& a, const TimeTagStream& b, double center_ps,
                         const CorrelationParams& p)
{
    p.validate();
    check_pair(a, b);
    const double lsb = a.lsb_ps;
    const std::int64_t width = std::max<std::int64_t>(1, to_ticks(p.fine_bin_ps, lsb));
    const std::int64_t half_bins = std::max<std::int64_t>(
        1, (to_ticks(p.fine_span_ps, lsb) + width - 1) / width);
    const std::int64_t center = to_ticks(center_ps, lsb);
    const std::int64_t lo = center - half_bins * width;
    const auto n_bins = static_cast<std::size_t>(2 * half_bins);

    Histogram h;
    h.bin_width = static_cast<double>(width) * lsb;
    h.counts = fine_counts(a.tags, b.tags, lo, width, n_bins);
    h.bin_centers.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
        // lags are integers: a bin holds lo + k w ... lo + k w + w - 1
        const double rel = static_cast<double>(k) * static_cast<double>(width) +
                           0.5 * static_cast<double>(width - 1) -
                           static_cast<double>(half_bins * width);
        h.bin_centers[k] = static_cast<double>(center) * lsb + rel * lsb;
    }
    return h;
}

namespace {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

bool solve4(const Mat4& m, const Vec4& r, Vec4& x)
{
    Eigen::FullPivLU<Mat4> lu(m);
    if (!lu.isInvertible()) return false;
    x = lu.solve(r);
    return x.allFinite();
}

double median_of(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

struct Moments {
    double mean = 0.0;
    double sigma = 0.0;
    double weight = 0.0;
};

Moments excess_moments(const std::vector<double>& u, const std::vector<double>& c, double bg,
                       double lo, double hi)
{
    Moments m;
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (u[k] < lo || u[k] > hi) continue;
        const double e = std::max(c[k] - bg, 0.0);
        m.weight += e;
        s1 += e * u[k];
        s2 += e * u[k] * u[k];
    }
    if (m.weight > 0.0) {
        m.mean = s1 / m.weight;
        m.sigma = std::sqrt(std::max(s2 / m.weight - m.mean * m.mean, 0.0));
    }
    return m;
}

struct GaussFit {
    Vec4 p = Vec4::Zero();  // amplitude, mean, sigma, background
    Mat4 cov = Mat4::Zero();
    bool converged = false;
};

enum class Objective { CountWeighted, PoissonLikelihood };

double model_at(double u, const Vec4& p)
{
    const double z = (u - p[1]) / p[2];
    return p[0] * std::exp(-0.5 * z * z) + p[3];
}

// Weighted residual sum, or twice the Poisson negative log-likelihood ratio.
double objective(Objective obj, const std::vector<double>& u, const std::vector<double>& c,
                 const std::vector<double>& w, const Vec4& p)
{
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double mu = model_at(u[k], p);
        if (obj == Objective::CountWeighted) {
            s += w[k] * (c[k] - mu) * (c[k] - mu);
        } else {
            if (!(mu > 0.0)) return std::numeric_limits<double>::infinity();
            s += 2.0 * (mu - c[k] + (c[k] > 0.0 ? c[k] * std::log(c[k] / mu) : 0.0));
        }
    }
    return s;
}

// J^T W J and J^T W r; the likelihood objective weights by 1 / model (Fisher scoring).
void normal_equations(Objective obj, const std::vector<double>& u, const std::vector<double>& c,
                      const std::vector<double>& w, const Vec4& p, Mat4& jtj, Vec4& jtr)
{
    jtj.setZero();
    jtr.setZero();
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double z = (u[k] - p[1]) / p[2];
        const double g = std::exp(-0.5 * z * z);
        const Vec4 j(g, p[0] * g * z / p[2], p[0] * g * z * z / p[2], 1.0);
        const double mu = p[0] * g + p[3];
        const double wk = obj == Objective::CountWeighted ? w[k] : 1.0 / std::max(mu, 1e-12);
        jtr += wk * (c[k] - mu) * j;
        jtj += wk * j * j.transpose();
    }
}

constexpr int kMaxIterations = 100;

GaussFit levenberg_marquardt(Objective obj, const std::vector<double>& u, const std::vector<double>& c,
                             const std::vector<double>& w, Vec4 p)
{
    GaussFit fit;
    double lambda = 1e-3;
    double current = objective(obj, u, c, w, p);
    for (int it = 0; it < kMaxIterations; ++it) {
        Mat4 jtj;
        Vec4 jtr;
        normal_equations(obj, u, c, w, p, jtj, jtr);
        bool accepted = false;
        while (!accepted && lambda < 1e12) {
            Mat4 m = jtj;
            m.diagonal() *= 1.0 + lambda;
            Vec4 step;
            if (!solve4(m, jtr, step)) {
                lambda *= 10.0;
                continue;
            }
            const Vec4 trial(p[0] + step[0], p[1] + step[1], std::fabs(p[2] + step[2]), p[3] + step[3]);
            const double t = objective(obj, u, c, w, trial);
            if (std::isfinite(t) && t <= current) {
                const double scale = p[2];
                p = trial;
                current = t;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (std::fabs(step[1]) < 1e-3 * scale && std::fabs(step[2]) < 1e-3 * scale) {
                    fit.converged = true;
                }
            } else {
                lambda *= 10.0;
            }
        }
        // no downhill step left: already at the minimum
        if (!accepted) fit.converged = true;
        if (fit.converged) break;
    }
    fit.p = p;
    Mat4 jtj;
    Vec4 jtr;
    normal_equations(obj, u, c, w, p, jtj, jtr);
    Eigen::FullPivLU<Mat4> lu(jtj);
    if (lu.isInvertible()) fit.cov = lu.inverse();
    else fit.converged = false;
    return fit;
}

}  // namespace

CoincidenceResult fit_peak(const Histogram& h, double threshold)
{
    const std::size_t n = h.counts.size();
    if (n < 4 || h.bin_centers.size() != n || !(h.bin_width > 0.0))
        throw NoPeak("fit_peak: degenerate histogram");

    // work relative to the middle of the histogram; shifting the histogram leaves u unchanged
    const double ref = h.bin_centers[n / 2];
    std::vector<double> u(n);
    std::vector<double> c(n);
    for (std::size_t k = 0; k < n; ++k) {
        u[k] = h.bin_centers[k] - ref;
        c[k] = static_cast<double>(h.counts[k]);
    }
    const double bw = h.bin_width;
    const double half_span = 0.5 * bw * static_cast<double>(n);

    const std::size_t imax = static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
    const double b0 = median_of(c);
    auto mom = excess_moments(u, c, b0, u[imax] - half_span / 2, u[imax] + half_span / 2);
    // shrink onto the peak; stray accidentals far out would otherwise dominate sigma
    for (int it = 0; it < 8 && mom.weight > 0.0; ++it) {
        const double win = std::max(3.0 * mom.sigma, 2.0 * bw);
        const auto next = excess_moments(u, c, b0, mom.mean - win, mom.mean + win);
        if (!(next.weight > 0.0)) break;
        const bool settled = next.sigma >= 0.99 * mom.sigma;
        mom = next;
        if (settled) break;
    }

    // background: median of bins outside +-3 FWHM of the initial guess
    const double fwhm0 = kFwhmPerSigma * mom.sigma;
    std::vector<double> outside;
    for (std::size_t k = 0; k < n; ++k)
        if (std::fabs(u[k] - mom.mean) > 3.0 * fwhm0) outside.push_back(c[k]);
    if (outside.size() < 8) {
        outside.clear();
        const std::size_t edge = std::max<std::size_t>(1, n / 10);
        for (std::size_t k = 0; k < edge; ++k) {
            outside.push_back(c[k]);
            outside.push_back(c[n - 1 - k]);
        }
    }
    const double bg = median_of(outside);
    const double amp0 = c[imax] - bg;
    if (!(mom.weight > 0.0) || !(amp0 > threshold * std::sqrt(bg)))
        throw NoPeak("fit_peak: no peak above background");

    CoincidenceResult res;
    res.background_per_bin = bg;

    // peak confined to a bin or two: centroid of the excess around the maximum
    if (mom.sigma <= bw) {
        const auto m = excess_moments(u, c, bg, u[imax] - 1.5 * bw, u[imax] + 1.5 * bw);
        const double var = m.sigma * m.sigma + bw * bw / 12.0;
        res.center_ps = ref + m.mean;
        res.fwhm_ps = kFwhmPerSigma * std::sqrt(var);
        res.n_coincidences = m.weight;
        res.center_uncertainty_ps = std::sqrt(var / std::max(m.weight, 1.0));
        res.fit_ok = true;
        return res;
    }

    std::vector<double> w(n);
    for (std::size_t k = 0; k < n; ++k) w[k] = 1.0 / std::max(c[k], 1.0);
    const Vec4 guess(amp0, mom.mean, std::max(mom.sigma, bw), bg);
    const auto seed = levenberg_marquardt(Objective::CountWeighted, u, c, w, guess);
    // count weights bias sparse peaks low; finish on the Poisson likelihood
    Vec4 start = seed.converged ? seed.p : guess;
    start[3] = std::max(start[3], 1e-3);
    auto fit = levenberg_marquardt(Objective::PoissonLikelihood, u, c, w, start);
    if (!fit.converged && seed.converged) fit = seed;
    const double amp = fit.p[0];
    const double sigma = fit.p[2];
    const double fbg = std::max(fit.p[3], 0.0);
    const bool sane = fit.converged && std::isfinite(amp) && std::isfinite(fit.p[1]) &&
                      sigma >= 0.25 * bw && sigma <= 2.0 * half_span &&
                      std::fabs(fit.p[1]) <= half_span && fit.cov(1, 1) > 0.0;

    if (sane && amp < threshold * std::sqrt(fbg)) throw NoPeak("fit_peak: fitted amplitude not significant");

    if (!sane) {
        const auto m = excess_moments(u, c, bg, mom.mean - 3.0 * std::max(mom.sigma, bw),
                                      mom.mean + 3.0 * std::max(mom.sigma, bw));
        res.center_ps = ref + m.mean;
        res.fwhm_ps = kFwhmPerSigma * std::max(m.sigma, bw / std::sqrt(12.0));
        res.n_coincidences = m.weight;
        res.center_uncertainty_ps = std::max(m.sigma, bw) / std::sqrt(std::max(m.weight, 1.0));
        res.fit_ok = false;
        return res;
    }

    res.center_ps = ref + fit.p[1];
    res.center_uncertainty_ps = std::sqrt(fit.cov(1, 1));
    res.fwhm_ps = kFwhmPerSigma * sigma;
    res.n_coincidences = amp * sigma * std::sqrt(2.0 * std::numbers::pi) / bw;
    res.background_per_bin = fbg;
    res.fit_ok = true;
    return res;
}

CoincidenceResult identify(const TimeTagStream& a, const TimeTagStream& b, const CorrelationParams& p)
{
    const double coarse = coarse_offset(a, b, p);
    const std::int64_t window = std::max<std::int64_t>(1, to_ticks(p.coarse_bin_ps, a.lsb_ps));
    const std::int64_t center = refine_center(a, b, to_ticks(coarse, a.lsb_ps), window);
    const auto h = fine_histogram(a, b, static_cast<double>(center) * a.lsb_ps, p);
    return fit_peak(h, p.significance);
}

}  // namespace qttlab
