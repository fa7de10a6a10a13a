#include "qttlab/stability.hpp"

#include "qttlab/error.hpp"

#include <algorithm>
#include <cmath>

namespace qttlab {

std::string_view to_string(Estimator e) noexcept
{
    switch (e) {
    case Estimator::Adev: return "adev";
    case Estimator::Mdev: return "mdev";
    case Estimator::Tdev: return "tdev";
    }
    return "?";
}

Estimator parse_estimator(std::string_view s)
{
    if (s == "adev") return Estimator::Adev;
    if (s == "mdev") return Estimator::Mdev;
    if (s == "tdev") return Estimator::Tdev;
    throw ConfigError("unknown estimator '" + std::string(s) + "' (adev, mdev, tdev)");
}

std::size_t n_terms(Estimator e, std::size_t n, std::size_t m) noexcept
{
    if (m == 0) return 0;
    if (e == Estimator::Adev) return n >= 2 * m + 1 ? n - 2 * m : 0;
    return n >= 3 * m ? n - 3 * m + 1 : 0;
}

std::size_t max_m(Estimator e, std::size_t n) noexcept
{
    if (e == Estimator::Adev) return n >= 3 ? (n - 1) / 2 : 0;
    return n / 3;
}

double adev(const PhaseData& data, std::size_t m)
{
    const auto& x = data.x;
    const std::size_t terms = n_terms(Estimator::Adev, x.size(), m);
    if (terms == 0) throw LengthError("adev: need at least 2m+1 samples");
    double s = 0.0;
    for (std::size_t i = 0; i < terms; ++i) {
        const double d = x[i + 2 * m] - 2.0 * x[i + m] + x[i];
        s += d * d;
    }
    const double tau = static_cast<double>(m) * data.tau0;
    return std::sqrt(s / (2.0 * static_cast<double>(terms) * tau * tau));
}

double mdev(const PhaseData& data, std::size_t m)
{
    const auto& x = data.x;
    const std::size_t terms = n_terms(Estimator::Mdev, x.size(), m);
    if (terms == 0) throw LengthError("mdev: need at least 3m samples");
    // running sum of m consecutive second differences, carried in extended precision
    auto d2 = [&](std::size_t i) {
        return static_cast<long double>(x[i + 2 * m]) - 2.0L * x[i + m] + x[i];
    };
    long double inner = 0.0L;
    for (std::size_t i = 0; i < m; ++i) inner += d2(i);
    long double acc = inner * inner;
    for (std::size_t j = 1; j < terms; ++j) {
        inner += d2(j + m - 1) - d2(j - 1);
        acc += inner * inner;
    }
    const auto s = static_cast<double>(acc);
    const double md = static_cast<double>(m);
    const double tau = md * data.tau0;
    return std::sqrt(s / (2.0 * md * md * tau * tau * static_cast<double>(terms)));
}

double tdev(const PhaseData& data, std::size_t m)
{
    const double tau = static_cast<double>(m) * data.tau0;
    return tau / std::sqrt(3.0) * mdev(data, m);
}

double evaluate(Estimator e, const PhaseData& data, std::size_t m)
{
    switch (e) {
    case Estimator::Adev: return adev(data, m);
    case Estimator::Mdev: return mdev(data, m);
    case Estimator::Tdev: return tdev(data, m);
    }
    return 0.0;
}

std::vector<std::size_t> octave_grid(Estimator e, std::size_t n)
{
    std::vector<std::size_t> g;
    const std::size_t top = max_m(e, n);
    for (std::size_t m = 1; m <= top; m *= 2) g.push_back(m);
    if (top >= 1 && g.back() != top) g.push_back(top);
    return g;
}

std::vector<std::size_t> log_grid(Estimator e, std::size_t n, int per_octave)
{
    std::vector<std::size_t> g;
    const std::size_t top = max_m(e, n);
    const double step = std::pow(2.0, 1.0 / std::max(per_octave, 1));
    for (double v = 1.0; v <= static_cast<double>(top) + 0.5; v *= step) {
        const auto m = static_cast<std::size_t>(std::llround(v));
        if (m <= top && (g.empty() || m > g.back())) g.push_back(m);
    }
    return g;
}

namespace {

std::vector<std::size_t> valid_ms(Estimator e, std::size_t n, const std::vector<std::size_t>& m_list)
{
    std::vector<std::size_t> ms;
    for (auto m : m_list)
        if (n_terms(e, n, m) > 0) ms.push_back(m);
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    if (ms.empty()) throw LengthError("stability curve: no valid averaging factor for the series length");
    return ms;
}

StabilityCurve shell(const PhaseData& data, Estimator e, std::vector<std::size_t> ms)
{
    StabilityCurve c;
    c.estimator = e;
    c.ms = std::move(ms);
    c.taus.resize(c.ms.size());
    c.values.resize(c.ms.size());
    c.n_terms.resize(c.ms.size());
    for (std::size_t k = 0; k < c.ms.size(); ++k) {
        c.taus[k] = static_cast<double>(c.ms[k]) * data.tau0;
        c.n_terms[k] = n_terms(e, data.x.size(), c.ms[k]);
    }
    return c;
}

}  // namespace

StabilityCurve curve(const PhaseData& data, Estimator e, const std::vector<std::size_t>& m_list)
{
    auto c = shell(data, e, valid_ms(e, data.x.size(), m_list));
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(c.ms.size()); ++k)
        c.values[static_cast<std::size_t>(k)] = evaluate(e, data, c.ms[static_cast<std::size_t>(k)]);
    return c;
}

StabilityCurve curve(const PhaseData& data, Estimator e)
{
    return curve(data, e, octave_grid(e, data.x.size()));
}

namespace serial {
StabilityCurve curve(const PhaseData& data, Estimator e, const std::vector<std::size_t>& m_list)
{
    auto c = shell(data, e, valid_ms(e, data.x.size(), m_list));
    for (std::size_t k = 0; k < c.ms.size(); ++k) c.values[k] = evaluate(e, data, c.ms[k]);
    return c;
}
}  // namespace serial

double loglog_slope(const StabilityCurve& c, double tau_min, double tau_max)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = 0;
    for (std::size_t k = 0; k < c.taus.size(); ++k) {
        if (c.taus[k] < tau_min || c.taus[k] > tau_max || !(c.values[k] > 0.0)) continue;
        const double lx = std::log(c.taus[k]);
        const double ly = std::log(c.values[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        n += 1;
    }
    if (n < 2) throw LengthError("loglog_slope: fewer than two usable points");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace qttlab
