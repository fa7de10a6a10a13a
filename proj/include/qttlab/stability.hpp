#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qttlab {

struct PhaseData {
    std::vector<double> x;  // time offsets, s
    double tau0 = 1.0;      // s
};

enum class Estimator { Adev, Mdev, Tdev };

std::string_view to_string(Estimator e) noexcept;
Estimator parse_estimator(std::string_view s);

// Overlapping Allan deviation at tau = m tau0. Needs len(x) >= 2m + 1.
double adev(const PhaseData& data, std::size_t m);
// Modified Allan deviation. Needs len(x) >= 3m.
double mdev(const PhaseData& data, std::size_t m);
// Time deviation, (tau / sqrt 3) mdev.
double tdev(const PhaseData& data, std::size_t m);

double evaluate(Estimator e, const PhaseData& data, std::size_t m);
std::size_t n_terms(Estimator e, std::size_t n_samples, std::size_t m) noexcept;
std::size_t max_m(Estimator e, std::size_t n_samples) noexcept;

struct StabilityCurve {
    Estimator estimator = Estimator::Tdev;
    std::vector<double> taus;
    std::vector<double> values;
    std::vector<std::size_t> n_terms;
    std::vector<std::size_t> ms;
};

// Powers of two up to the largest valid m, with that m appended.
std::vector<std::size_t> octave_grid(Estimator e, std::size_t n_samples);
// Roughly `per_octave` log-spaced integers per octave, up to the largest valid m.
std::vector<std::size_t> log_grid(Estimator e, std::size_t n_samples, int per_octave);

// Points computed in parallel; empty valid grid -> LengthError.
StabilityCurve curve(const PhaseData& data, Estimator e, const std::vector<std::size_t>& m_list);
StabilityCurve curve(const PhaseData& data, Estimator e);

namespace serial {
StabilityCurve curve(const PhaseData& data, Estimator e, const std::vector<std::size_t>& m_list);
}

// Least-squares slope of log(value) against log(tau) over points with value > 0.
double loglog_slope(const StabilityCurve& c, double tau_min = 0.0, double tau_max = 1e300);

}  // namespace qttlab
