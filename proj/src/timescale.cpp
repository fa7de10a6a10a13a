#include "qttlab/timescale.hpp"

#include "qttlab/error.hpp"
#include "qttlab/rng.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>

namespace qttlab {

namespace {

std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

bool supported_alpha(int alpha)
{
    return alpha >= -2 && alpha <= 2;
}

std::size_t next_pow2(std::size_t n)
{
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

// Fractional-frequency samples y_j with one-sided PSD sum_k h_k f^alpha_k, by
// shaping white Gaussian noise in the frequency domain. The circular sequence is
// generated at twice the needed length and only the leading part is kept.
std::vector<double> shaped_frequency_noise(const std::vector<NoiseComponent>& noise,
                                           std::size_t n, double tau0, Rng& rng)
{
    const std::size_t m = next_pow2(std::max<std::size_t>(2 * n, 16));
    const std::size_t nc = m / 2 + 1;

    std::unique_ptr<double, FftwFree> buf(static_cast<double*>(fftw_malloc(sizeof(double) * m)));
    std::unique_ptr<fftw_complex, FftwFree> spec(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nc)));

    fftw_plan fwd;
    fftw_plan inv;
    {
        std::lock_guard lock(fftw_planner_mutex());
        fwd = fftw_plan_dft_r2c_1d(static_cast<int>(m), buf.get(), spec.get(), FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_1d(static_cast<int>(m), spec.get(), buf.get(), FFTW_ESTIMATE);
    }

    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t j = 0; j < m; ++j) buf.get()[j] = gauss(rng);
    fftw_execute(fwd);

    // white unit-variance samples have one-sided PSD 2*tau0; scale by sqrt(S_y / (2 tau0))
    const double df = 1.0 / (static_cast<double>(m) * tau0);
    spec.get()[0][0] = 0.0;
    spec.get()[0][1] = 0.0;
    for (std::size_t k = 1; k < nc; ++k) {
        const double f = static_cast<double>(k) * df;
        double s = 0.0;
        for (const auto& c : noise) s += c.h * std::pow(f, c.alpha);
        const double gain = std::sqrt(s / (2.0 * tau0)) / static_cast<double>(m);
        spec.get()[k][0] *= gain;
        spec.get()[k][1] *= gain;
    }
    fftw_execute(inv);

    std::vector<double> y(buf.get(), buf.get() + n);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
    }
    return y;
}

}  // namespace

void ClockModel::validate() const
{
    if (!std::isfinite(initial_offset_s) || !std::isfinite(frac_freq_offset) ||
        !std::isfinite(freq_drift_per_s))
        throw ConfigError("clock " + label + ": non-finite deterministic term");
    for (const auto& c : noise) {
        if (!supported_alpha(c.alpha))
            throw ConfigError("clock " + label + ": unsupported noise exponent alpha=" +
                              std::to_string(c.alpha));
        if (!(c.h >= 0.0) || !std::isfinite(c.h))
            throw ConfigError("clock " + label + ": noise amplitude must be >= 0");
    }
}

double white_fm_h0_for_adev(double adev, double tau_s)
{
    return 2.0 * tau_s * adev * adev;
}

double flicker_fm_h_for_floor(double adev_floor)
{
    return adev_floor * adev_floor / (2.0 * std::numbers::ln2);
}

ClockModel ideal_clock(std::string label)
{
    ClockModel m;
    m.label = std::move(label);
    return m;
}

ClockModel rubidium_clock(std::string label)
{
    ClockModel m;
    m.label = std::move(label);
    m.noise.push_back({0, white_fm_h0_for_adev(2.9e-12, 6.0)});
    return m;
}

ClockModel hydrogen_maser(std::string label)
{
    ClockModel m;
    m.label = std::move(label);
    m.noise.push_back({0, white_fm_h0_for_adev(2.9e-14, 6.0)});
    return m;
}

ClockRealization::ClockRealization(ClockModel model, std::vector<double> phase_s, double tau0_s,
                                   std::uint64_t seed, double origin_s)
    : model_(std::move(model)), phase_(std::move(phase_s)), tau0_(tau0_s), seed_(seed),
      origin_(origin_s)
{
    if (phase_.size() < 2) throw LengthError("clock realization needs at least 2 samples");
    if (!(tau0_ > 0.0)) throw ConfigError("clock realization tau0 must be > 0");
}

double ClockRealization::span_end() const noexcept
{
    return origin_ + tau0_ * static_cast<double>(phase_.size() - 1);
}

bool ClockRealization::covers(double t_begin, double t_end) const noexcept
{
    return t_begin >= span_begin() && t_end <= span_end();
}

double ClockRealization::offset_at(double t_s) const
{
    const double u = (t_s - origin_) / tau0_;
    const double last = static_cast<double>(phase_.size() - 1);
    if (!(u >= 0.0) || u > last)
        throw RangeError("clock " + model_.label + ": time " + std::to_string(t_s) +
                         " s outside realization span");
    const double fl = std::floor(u);
    auto i = static_cast<std::size_t>(fl);
    if (i >= phase_.size() - 1) return phase_.back();
    const double w = u - fl;
    if (w == 0.0) return phase_[i];
    return phase_[i] + w * (phase_[i + 1] - phase_[i]);
}

ClockRealization ClockRealization::with_added_offset(double c_s) const
{
    auto shifted = phase_;
    for (auto& x : shifted) x += c_s;
    auto m = model_;
    m.initial_offset_s += c_s;
    return ClockRealization(std::move(m), std::move(shifted), tau0_, seed_, origin_);
}

ClockRealization synth_phase(const ClockModel& model, std::size_t n, double tau0_s,
                             std::uint64_t seed, double origin_s)
{
    model.validate();
    if (n < 2) throw LengthError("synth_phase: n must be >= 2");
    if (!(tau0_s > 0.0)) throw ConfigError("synth_phase: tau0 must be > 0");

    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * tau0_s;
        x[i] = model.initial_offset_s + model.frac_freq_offset * t +
               0.5 * model.freq_drift_per_s * t * t;
    }

    const bool has_noise = std::any_of(model.noise.begin(), model.noise.end(),
                                       [](const NoiseComponent& c) { return c.h > 0.0; });
    if (has_noise) {
        Rng rng = make_rng(seed);
        const auto y = shaped_frequency_noise(model.noise, n, tau0_s, rng);
        double acc = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            acc += y[i - 1] * tau0_s;
            x[i] += acc;
        }
    }
    return ClockRealization(model, std::move(x), tau0_s, seed, origin_s);
}

void TransferSpec::validate() const
{
    if (!(white_pm_adev_1s >= 0.0) || !(floor_adev >= 0.0) || !(sine_amplitude_s >= 0.0))
        throw ConfigError("transfer: levels must be >= 0");
    if (sine_amplitude_s > 0.0 && !(sine_period_s > 0.0))
        throw ConfigError("transfer: sine_period must be > 0 when sine_amplitude > 0");
    if (!std::isfinite(epoch_offset_s) || !std::isfinite(sine_phase_rad))
        throw ConfigError("transfer: non-finite offset");
}

bool TransferSpec::is_zero() const noexcept
{
    return white_pm_adev_1s == 0.0 && floor_adev == 0.0 && sine_amplitude_s == 0.0 &&
           epoch_offset_s == 0.0;
}

TransferSpec microwave_link_transfer()
{
    TransferSpec s;
    s.white_pm_adev_1s = 1.15e-14;
    s.floor_adev = 3.2e-16;
    return s;
}

std::vector<double> transfer_residual(std::size_t n, double tau0_s, double origin_s,
                                      const TransferSpec& spec, std::uint64_t seed)
{
    spec.validate();
    std::vector<double> r(n, spec.epoch_offset_s);
    Rng rng = make_rng(seed);

    if (spec.white_pm_adev_1s > 0.0) {
        // overlapping ADEV of white x: sigma_y(tau) = sqrt(3) sigma_x / tau
        const double sigma_x = spec.white_pm_adev_1s / std::sqrt(3.0);
        std::normal_distribution<double> gauss(0.0, sigma_x);
        for (auto& v : r) v += gauss(rng);
    }
    if (spec.floor_adev > 0.0 && n >= 2) {
        const std::vector<NoiseComponent> flicker{{-1, flicker_fm_h_for_floor(spec.floor_adev)}};
        const auto y = shaped_frequency_noise(flicker, n, tau0_s, rng);
        double acc = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            acc += y[i - 1] * tau0_s;
            r[i] += acc;
        }
    }
    if (spec.sine_amplitude_s > 0.0) {
        const double w = 2.0 * std::numbers::pi / spec.sine_period_s;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = origin_s + static_cast<double>(i) * tau0_s;
            r[i] += spec.sine_amplitude_s * std::sin(w * t + spec.sine_phase_rad);
        }
    }
    return r;
}

ClockRealization make_transferred_reference(const ClockRealization& upstream,
                                            const TransferSpec& spec, std::uint64_t seed)
{
    spec.validate();
    auto phase = upstream.phase();
    if (!spec.is_zero()) {
        const auto r = transfer_residual(phase.size(), upstream.tau0(), upstream.origin(), spec, seed);
        for (std::size_t i = 0; i < phase.size(); ++i) phase[i] += r[i];
    }
    auto model = upstream.model();
    model.label += "+transfer";
    return ClockRealization(std::move(model), std::move(phase), upstream.tau0(), seed,
                            upstream.origin());
}

}  // namespace qttlab
