#include "doctest.h"

#include "helpers.hpp"
#include "qttlab/error.hpp"
#include "qttlab/stability.hpp"
#include "qttlab/timescale.hpp"

#include <cmath>
#include <numbers>

using namespace qttlab;

TEST_SUITE("timescale") {

TEST_CASE("noise-free clock is its deterministic polynomial")
{
    auto m = ideal_clock();
    m.initial_offset_s = 2.5e-6;
    auto c = synth_phase(m, 50, 1.0, 7);
    for (double x : c.phase()) CHECK(x == 2.5e-6);

    m.initial_offset_s = 0.0;
    m.frac_freq_offset = 1e-9;
    c = synth_phase(m, 50, 1.0, 7);
    for (std::size_t i = 0; i < 50; ++i)
        CHECK(c.phase()[i] == doctest::Approx(1e-9 * static_cast<double>(i)).epsilon(1e-14));

    m.frac_freq_offset = 0.0;
    m.freq_drift_per_s = 1e-12;
    c = synth_phase(m, 20, 0.5, 7);
    for (std::size_t i = 0; i < 20; ++i) {
        const double t = 0.5 * static_cast<double>(i);
        CHECK(c.phase()[i] == doctest::Approx(0.5e-12 * t * t).epsilon(1e-14));
    }
}

TEST_CASE("ideal clock reads zero everywhere in its span")
{
    const auto c = synth_phase(ideal_clock(), 11, 1.0, 3);
    for (double t : {0.0, 0.3, 5.5, 9.999, 10.0}) CHECK(c.offset_at(t) == 0.0);
}

TEST_CASE("offset_at interpolates linearly and is exact on the grid")
{
    ClockRealization c(ideal_clock(), {0.0, 2e-12, -1e-12, 5e-12}, 1.0, 0, 10.0);
    CHECK(c.offset_at(10.0) == 0.0);
    CHECK(c.offset_at(11.0) == 2e-12);
    CHECK(c.offset_at(13.0) == 5e-12);
    CHECK(c.offset_at(10.5) == doctest::Approx(1e-12).epsilon(1e-12));
    CHECK(c.offset_at(11.25) == doctest::Approx(1.25e-12).epsilon(1e-12));
    CHECK_THROWS_AS(c.offset_at(9.999), RangeError);
    CHECK_THROWS_AS(c.offset_at(13.001), RangeError);
    CHECK(c.covers(10.0, 13.0));
    CHECK_FALSE(c.covers(9.0, 12.0));
}

TEST_CASE("realizations are reproducible from the seed")
{
    const auto m = rubidium_clock();
    const auto a = synth_phase(m, 4096, 0.1, 99);
    const auto b = synth_phase(m, 4096, 0.1, 99);
    const auto c = synth_phase(m, 4096, 0.1, 100);
    CHECK(a.phase() == b.phase());
    CHECK(a.phase() != c.phase());
}

TEST_CASE("white FM realization meets the rubidium Allan deviation")
{
    const auto c = synth_phase(rubidium_clock(), 1'000'000, 1.0, 2024);
    const PhaseData d{c.phase(), 1.0};
    CHECK(adev(d, 6) == doctest::Approx(2.9e-12).epsilon(0.10));
}

TEST_CASE("white FM Allan deviation follows sqrt(h0 / 2 tau) over two decades")
{
    const double h0 = 1.058e-22;
    auto m = ideal_clock();
    m.noise.push_back({0, h0});
    const auto c = synth_phase(m, 400'000, 1.0, 17);
    const PhaseData d{c.phase(), 1.0};
    for (std::size_t k : {1, 3, 10, 30, 100}) {
        const double expect = std::sqrt(h0 / (2.0 * static_cast<double>(k)));
        CHECK(adev(d, k) == doctest::Approx(expect).epsilon(0.10));
    }
}

TEST_CASE("every supported power law synthesizes; others are rejected")
{
    for (int alpha = -2; alpha <= 2; ++alpha) {
        auto m = ideal_clock();
        m.noise.push_back({alpha, 1e-24});
        const auto c = synth_phase(m, 1000, 1.0, 5);
        CHECK(std::isfinite(c.phase().back()));
    }
    auto bad = ideal_clock();
    bad.noise.push_back({3, 1e-24});
    CHECK_THROWS_AS(synth_phase(bad, 100, 1.0, 1), ConfigError);
    auto neg = ideal_clock();
    neg.noise.push_back({0, -1.0});
    CHECK_THROWS_AS(synth_phase(neg, 100, 1.0, 1), ConfigError);
    CHECK_THROWS_AS(synth_phase(ideal_clock(), 1, 1.0, 1), LengthError);
}

TEST_CASE("zero transfer is the identity")
{
    const auto up = synth_phase(hydrogen_maser(), 1000, 0.1, 8);
    const auto down = make_transferred_reference(up, TransferSpec{}, 9);
    CHECK(down.phase() == up.phase());
    CHECK(TransferSpec{}.is_zero());
}

TEST_CASE("transfer residual reaches its configured ADEV at 1 s")
{
    const auto spec = microwave_link_transfer();
    const auto r = transfer_residual(200'000, 0.1, 0.0, spec, 31);
    const PhaseData d{r, 0.1};
    CHECK(adev(d, 10) == doctest::Approx(1.15e-14).epsilon(0.15));

    const auto r1 = transfer_residual(200'000, 1.0, 0.0, spec, 32);
    CHECK(adev(PhaseData{r1, 1.0}, 1) == doctest::Approx(1.15e-14).epsilon(0.15));
}

TEST_CASE("a sinusoidal transfer term puts a TDEV bump between P/4 and P")
{
    TransferSpec spec;
    spec.sine_amplitude_s = 1e-12;
    spec.sine_period_s = 1000.0;
    const auto r = transfer_residual(4000, 10.0, 0.0, spec, 1);
    const PhaseData d{r, 10.0};
    const auto c = curve(d, Estimator::Tdev, log_grid(Estimator::Tdev, r.size(), 8));
    double best_tau = 0.0, best = -1.0;
    for (std::size_t i = 1; i + 1 < c.values.size(); ++i) {
        if (c.values[i] >= c.values[i - 1] && c.values[i] >= c.values[i + 1] && c.values[i] > best) {
            best = c.values[i];
            best_tau = c.taus[i];
        }
    }
    CHECK(best_tau >= 250.0);
    CHECK(best_tau <= 1000.0);
}

TEST_CASE("adding an offset shifts every sample")
{
    const auto c = synth_phase(rubidium_clock(), 500, 0.1, 3);
    const auto s = c.with_added_offset(1e-6);
    for (std::size_t i = 0; i < c.phase().size(); ++i) CHECK(s.phase()[i] == c.phase()[i] + 1e-6);
    CHECK(s.offset_at(12.34) == doctest::Approx(c.offset_at(12.34) + 1e-6).epsilon(1e-14));
}

}
