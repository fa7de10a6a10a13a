#include "qttlab/verify/oracles.hpp"

#include "qttlab/error.hpp"
#include "qttlab/optics.hpp"
#include "qttlab/source.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <numbers>

namespace qttlab::verify {

namespace {

double second_difference(const std::vector<double>& x, std::size_t i, std::size_t m)
{
    return x[i + 2 * m] - 2.0 * x[i + m] + x[i];
}

}  // namespace

double brute_adev(const PhaseData& d, std::size_t m)
{
    const std::size_t n = d.x.size();
    if (m == 0 || n < 2 * m + 1) throw LengthError("brute_adev: series too short");
    const double tau = static_cast<double>(m) * d.tau0;
    double s = 0.0;
    for (std::size_t i = 0; i + 2 * m < n; ++i) {
        const double v = second_difference(d.x, i, m);
        s += v * v;
    }
    return std::sqrt(s / (2.0 * tau * tau * static_cast<double>(n - 2 * m)));
}

double brute_mdev(const PhaseData& d, std::size_t m)
{
    const std::size_t n = d.x.size();
    if (m == 0 || n < 3 * m) throw LengthError("brute_mdev: series too short");
    const double tau = static_cast<double>(m) * d.tau0;
    double s = 0.0;
    for (std::size_t j = 0; j + 3 * m <= n; ++j) {
        double inner = 0.0;
        for (std::size_t i = j; i < j + m; ++i) inner += second_difference(d.x, i, m);
        s += inner * inner;
    }
    const double terms = static_cast<double>(n - 3 * m + 1);
    return std::sqrt(s / (2.0 * static_cast<double>(m * m) * tau * tau * terms));
}

double brute_tdev(const PhaseData& d, std::size_t m)
{
    const double tau = static_cast<double>(m) * d.tau0;
    return tau / std::sqrt(3.0) * brute_mdev(d, m);
}

double expected_direction_delay(const PairSourceSpec& src, const OpticalPath& signal_path,
                                const OpticalPath& idler_path, const AmbientModel& ambient,
                                double t_s)
{
    auto delta = [&](double lambda_s) {
        const double lambda_i = idler_wavelength(src.pump_nm, lambda_s);
        return path_delay(lambda_s, signal_path, t_s, ambient) -
               path_delay(lambda_i, idler_path, t_s, ambient);
    };
    const double sigma = src.signal_bandwidth_fwhm_nm / kFwhmPerSigma;
    if (sigma == 0.0) return delta(src.signal_center_nm);

    // Gaussian-weighted mean over +-8 sigma
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
    auto weighted = [&](double l) {
        const double z = (l - src.signal_center_nm) / sigma;
        return norm * std::exp(-0.5 * z * z) * delta(l);
    };
    const double lo = src.signal_center_nm - 8.0 * sigma;
    const double hi = src.signal_center_nm + 8.0 * sigma;
    return boost::math::quadrature::gauss<double, 30>::integrate(weighted, lo, hi);
}

PathDelayOracle path_delay_oracle(const Scenario& s, double t_s)
{
    PathDelayOracle o;
    o.ab_ps = expected_direction_delay(s.source_a, s.forward, s.local_a, s.ambient, t_s);
    o.ba_ps = expected_direction_delay(s.source_b, s.backward, s.local_b, s.ambient, t_s);
    double clock_ps = 0.0;
    if (s.clock_mode == ClockMode::Independent)
        clock_ps = (s.clock_b.initial_offset_s - s.clock_a.initial_offset_s) * 1e12;
    else if (s.clock_mode == ClockMode::Transfer)
        clock_ps = s.transfer.epoch_offset_s * 1e12;
    o.t0_ps = 0.5 * (o.ab_ps - o.ba_ps) + clock_ps;
    return o;
}

}  // namespace qttlab::verify
