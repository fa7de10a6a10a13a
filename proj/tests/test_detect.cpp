#include "doctest.h"

#include "helpers.hpp"
#include "qttlab/detect.hpp"
#include "qttlab/error.hpp"
#include "qttlab/source.hpp"

#include <cmath>

using namespace qttlab;

namespace {

DetectorSpec transparent()
{
    DetectorSpec d;
    d.efficiency = 1.0;
    d.jitter_fwhm_ps = 0.0;
    d.dark_rate = 0.0;
    d.dead_time_ns = 0.0;
    return d;
}

TimerSpec timer_of(double record_s = 1.0, double lsb = 1.0)
{
    TimerSpec t;
    t.lsb_ps = lsb;
    t.record_length_s = record_s;
    t.cycle_period_s = std::max(record_s, 7.0);
    t.max_rate = 1e9;
    return t;
}

PhotonBatch train(std::size_t n, double spacing_ps, double start_ps = 1000.0)
{
    PhotonBatch b{0, {}};
    for (std::size_t i = 0; i < n; ++i) b.photons.push_back({start_ps + spacing_ps * static_cast<double>(i), 1560.0});
    return b;
}

}  // namespace

TEST_SUITE("detect") {

TEST_CASE("quantization rounds half to even")
{
    CHECK(quantize(0.5, 1.0) == 0);
    CHECK(quantize(1.5, 1.0) == 2);
    CHECK(quantize(2.5, 1.0) == 2);
    CHECK(quantize(-0.5, 1.0) == 0);
    CHECK(quantize(7.4, 2.0) == 4);
}

TEST_CASE("a transparent chain tags the rounded arrival times")
{
    PhotonBatch b{0, {}};
    for (int i = 0; i < 500; ++i) b.photons.push_back({1000.3 + 12345.7 * i, 1560.0});
    const auto clk = test::flat_clock();
    const auto s = detect(b, transparent(), timer_of(), clk, 1, 4);
    REQUIRE(s.tags.size() == b.photons.size());
    for (std::size_t i = 0; i < s.tags.size(); ++i) CHECK(s.tags[i] == quantize(b.photons[i].t_ps, 1.0));
    CHECK(s.channel == 4);
}

TEST_CASE("detection efficiency thins binomially")
{
    auto d = transparent();
    d.efficiency = 0.65;
    const std::size_t n = 100'000;
    const auto s = detect(train(n, 1e6), d, timer_of(), test::flat_clock(), 2);
    const double sd = std::sqrt(n * 0.65 * 0.35);
    CHECK(std::fabs(static_cast<double>(s.tags.size()) - 0.65 * n) < 5.0 * sd);
}

TEST_CASE("dark counts alone give rate times record length")
{
    auto d = transparent();
    d.dark_rate = 100.0;
    const auto s = detect(PhotonBatch{}, d, timer_of(2.5), test::flat_clock(), 3);
    CHECK(std::fabs(static_cast<double>(s.tags.size()) - 250.0) < 5.0 * std::sqrt(250.0));
}

TEST_CASE("singles at 20 kHz after efficiency give about 50000 tags per record")
{
    DetectorSpec d;
    d.efficiency = 0.65;
    d.dark_rate = 0.0;
    PairSourceSpec src;
    src.pair_rate = 20'000.0 / 0.65;
    const auto pairs = emit_pairs(src, 0, 0.0, 2.5, 4);
    PhotonBatch b{0, {}};
    for (const auto& ev : pairs.events) b.photons.push_back({ev.t_emit_ps, ev.lambda_i_nm});
    const auto s = detect(b, d, timer_of(2.5), test::flat_clock(), 5);
    CHECK(std::fabs(static_cast<double>(s.tags.size()) - 50'000.0) < 3.0 * std::sqrt(50'000.0));
}

TEST_CASE("timing jitter has the configured FWHM")
{
    auto d = transparent();
    d.jitter_fwhm_ps = 68.0;
    const std::size_t n = 50'000;
    const auto b = train(n, 1e6);
    const auto s = detect(b, d, timer_of(), test::flat_clock(), 6);
    REQUIRE(s.tags.size() == n);
    std::vector<double> err(n);
    for (std::size_t i = 0; i < n; ++i) err[i] = static_cast<double>(s.tags[i]) - b.photons[i].t_ps;
    CHECK(test::stddev(err) * kFwhmPerSigma == doctest::Approx(68.0).epsilon(0.05));
}

TEST_CASE("quantization error averages out when jitter exceeds the lsb")
{
    auto d = transparent();
    d.jitter_fwhm_ps = 68.0;
    const std::size_t n = 100'000;
    const auto b = train(n, 9e5, 1234.567);
    const auto s = detect(b, d, timer_of(), test::flat_clock(), 7);
    REQUIRE(s.tags.size() == n);
    // jittered times are not observable; compare to the truth with the jitter mean removed
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += static_cast<double>(s.tags[i]) - b.photons[i].t_ps;
    const double bias = sum / static_cast<double>(n);
    const double se = (68.0 / kFwhmPerSigma) / std::sqrt(static_cast<double>(n));
    CHECK(std::fabs(bias) < 5.0 * se);
}

TEST_CASE("dead time drops the second of two close arrivals")
{
    auto d = transparent();
    d.dead_time_ns = 50.0;
    PhotonBatch b{0, {{1000.0, 1560.0}, {1000.0 + 10'000.0, 1560.0}, {1000.0 + 60'000.0, 1560.0}}};
    const auto s = detect(b, d, timer_of(), test::flat_clock(), 8);
    REQUIRE(s.tags.size() == 2);
    CHECK(s.tags[0] == 1000);
    CHECK(s.tags[1] == 61000);
}

TEST_CASE("rate cap keeps exactly the timer budget")
{
    auto t = timer_of();
    t.max_rate = 1000.0;
    const auto s = detect(train(5000, 1e8), transparent(), t, test::flat_clock(), 9);
    CHECK(s.tags.size() == 1000);
}

TEST_CASE("tags stay inside the record window")
{
    PhotonBatch b{0, {{-5.0, 1560.0}, {10.0, 1560.0}, {0.999e12, 1560.0}, {1.2e12, 1560.0}}};
    const auto s = detect(b, transparent(), timer_of(1.0), test::flat_clock(), 10);
    REQUIRE(s.tags.size() == 2);
    for (auto x : s.tags) {
        CHECK(x >= 0);
        CHECK(x <= quantize(1e12, 1.0));
    }
}

TEST_CASE("a constant clock offset shifts every tag")
{
    const auto b = train(100, 1e7, 5e6);
    const auto s0 = detect(b, transparent(), timer_of(), test::flat_clock(), 11);
    const auto s1 = detect(b, transparent(), timer_of(), test::flat_clock(100.0, 1e-6), 11);
    REQUIRE(s0.tags.size() == s1.tags.size());
    for (std::size_t i = 0; i < s0.tags.size(); ++i) CHECK(s1.tags[i] - s0.tags[i] == 1'000'000);
}

TEST_CASE("a clock realization not covering the record is a range error")
{
    const auto clk = synth_phase(ideal_clock(), 5, 0.1, 1);
    CHECK_THROWS_AS(detect(train(10, 1e6), transparent(), timer_of(), clk, 12), RangeError);
}

TEST_CASE("invalid detector or timer parameters are rejected")
{
    auto d = transparent();
    d.efficiency = 1.3;
    CHECK_THROWS_WITH_AS(d.validate(), doctest::Contains("efficiency out of range"), ConfigError);
    auto t = timer_of();
    t.record_length_s = 8.0;
    t.cycle_period_s = 7.0;
    CHECK_THROWS_AS(t.validate(), ConfigError);
}

}
