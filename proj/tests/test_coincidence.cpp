#include "doctest.h"

#include "helpers.hpp"
#include "qttlab/coincidence.hpp"
#include "qttlab/config.hpp"
#include "qttlab/error.hpp"
#include "qttlab/twoway.hpp"
#include "qttlab/verify/oracles.hpp"

#include <cmath>

using namespace qttlab;

namespace {

constexpr double kRate = 2e-8;  // 20 kHz in 1 ps ticks

// Independent background in both streams plus `n_pairs` correlated lags ~ N(offset, sigma).
struct PairStreams {
    TimeTagStream a, b;
};

PairStreams correlated(std::int64_t length, std::size_t n_pairs, double offset, double sigma,
                       std::uint64_t seed)
{
    auto a = test::poisson_ticks(kRate, length, seed);
    auto b = test::poisson_ticks(kRate, length, seed + 1);
    Rng rng = make_rng(seed + 2);
    std::uniform_int_distribution<std::size_t> pick(0, a.size() - 1);
    std::normal_distribution<double> lag(offset, sigma);
    for (std::size_t i = 0; i < n_pairs; ++i) {
        const auto t = a[pick(rng)] + static_cast<std::int64_t>(std::llround(lag(rng)));
        if (t >= 0 && t < length) b.push_back(t);
    }
    return {test::stream_of(std::move(a)), test::stream_of(std::move(b))};
}

Histogram gaussian_histogram(double center, double sigma, double amp, double bg, double bw = 2.0,
                             double span = 2000.0)
{
    Histogram h;
    h.bin_width = bw;
    for (double x = -span + bw / 2; x < span; x += bw) {
        h.bin_centers.push_back(x);
        const double z = (x - center) / sigma;
        h.counts.push_back(std::llround(amp * std::exp(-0.5 * z * z) + bg));
    }
    return h;
}

}  // namespace

TEST_SUITE("coincidence") {

TEST_CASE("coarse search recovers a pure shift")
{
    const auto a = test::stream_of(test::poisson_ticks(kRate, 2'500'000'000'000, 1));
    auto b = a;
    for (auto& t : b.tags) t += 123'456;
    const CorrelationParams p;
    CHECK(std::fabs(coarse_offset(a, b, p) - 123'456.0) <= p.coarse_bin_ps);
    const auto r = identify(a, b, p);
    CHECK(std::fabs(r.center_ps - 123'456.0) <= 0.5 * p.fine_bin_ps);

    auto p1 = p;
    p1.fine_bin_ps = 1.0;
    CHECK(identify(a, b, p1).center_ps == doctest::Approx(123'456.0).epsilon(1e-12));
}

TEST_CASE("identical streams give zero lag and a width below one fine bin")
{
    const auto a = test::stream_of(test::poisson_ticks(kRate, 2'500'000'000'000, 2));
    const CorrelationParams p;
    const auto r = identify(a, a, p);
    CHECK(std::fabs(r.center_ps) <= 0.5 * p.fine_bin_ps);
    CHECK(r.fwhm_ps <= p.fine_bin_ps);
}

TEST_CASE("independent streams have no correlation peak")
{
    const auto a = test::stream_of(test::poisson_ticks(kRate, 2'500'000'000'000, 3));
    const auto b = test::stream_of(test::poisson_ticks(kRate, 2'500'000'000'000, 4));
    CHECK_THROWS_AS(coarse_offset(a, b, CorrelationParams{}), NoCorrelation);
    CHECK_THROWS_AS(identify(a, b, CorrelationParams{}), NoCorrelation);
}

TEST_CASE("a flat histogram has no peak")
{
    Histogram h;
    h.bin_width = 2.0;
    Rng rng = make_rng(5);
    std::poisson_distribution<int> bg(20.0);
    for (int k = 0; k < 2000; ++k) {
        h.bin_centers.push_back(-2000.0 + 1.0 + 2.0 * k);
        h.counts.push_back(bg(rng));
    }
    CHECK_THROWS_AS(fit_peak(h), NoPeak);
}

TEST_CASE("noiseless Gaussian counts are fitted exactly")
{
    const auto h = gaussian_histogram(100.0, 51.0, 1e6, 3.0);
    const auto r = fit_peak(h);
    CHECK(r.fit_ok);
    CHECK(std::fabs(r.center_ps - 100.0) <= 0.01);
    CHECK(r.fwhm_ps == doctest::Approx(51.0 * kFwhmPerSigma).epsilon(1e-3));
}

TEST_CASE("Poisson peak of 385 counts: uncertainty matches sigma/sqrt(N) and the scatter")
{
    const double sigma = 51.0;
    const std::size_t n = 385;
    std::vector<double> centers, uncert;
    Rng rng = make_rng(6);
    std::normal_distribution<double> lag(0.0, sigma);
    for (int trial = 0; trial < 200; ++trial) {
        Histogram h;
        h.bin_width = 2.0;
        h.counts.assign(2000, 0);
        for (int k = 0; k < 2000; ++k) h.bin_centers.push_back(-2000.0 + 1.0 + 2.0 * k);
        for (std::size_t i = 0; i < n; ++i) {
            const auto k = static_cast<std::ptrdiff_t>(std::floor((lag(rng) + 2000.0) / 2.0));
            if (k >= 0 && k < 2000) ++h.counts[static_cast<std::size_t>(k)];
        }
        const auto r = fit_peak(h);
        if (!r.fit_ok) continue;
        centers.push_back(r.center_ps);
        uncert.push_back(r.center_uncertainty_ps);
    }
    REQUIRE(centers.size() >= 190);
    const double expect = sigma / std::sqrt(static_cast<double>(n));
    CHECK(test::mean(uncert) == doctest::Approx(expect).epsilon(0.15));
    CHECK(test::stddev(centers) == doctest::Approx(test::mean(uncert)).epsilon(0.20));
}

TEST_CASE("shifting one stream by whole ticks shifts the center by the same amount")
{
    const auto s = correlated(2'500'000'000'000, 400, 5000.0, 51.0, 7);
    const CorrelationParams p;
    const auto r0 = identify(s.a, s.b, p);
    for (std::int64_t d : {1, 37, -250'000, 123'456'789}) {
        auto b = s.b;
        for (auto& t : b.tags) t += d;
        const auto r = identify(s.a, b, p);
        CHECK(std::fabs(r.center_ps - r0.center_ps - static_cast<double>(d)) <= 1e-6);
        CHECK(r.center_uncertainty_ps == doctest::Approx(r0.center_uncertainty_ps).epsilon(1e-9));
    }
}

TEST_CASE("swapping the streams negates the center")
{
    const auto s = correlated(2'500'000'000'000, 400, 5000.0, 51.0, 8);
    const CorrelationParams p;
    const auto ab = identify(s.a, s.b, p);
    const auto ba = identify(s.b, s.a, p);
    CHECK(std::fabs(ab.center_ps + ba.center_ps) <= std::max(1.0, 0.5 * ab.center_uncertainty_ps));
    CHECK(std::fabs(ab.center_ps - 5000.0) <= 4.0 * ab.center_uncertainty_ps);
}

TEST_CASE("coincidence count scales with the record length")
{
    const CorrelationParams p;
    const auto s1 = correlated(1'250'000'000'000, 2000, 3000.0, 51.0, 9);
    const auto s2 = correlated(2'500'000'000'000, 4000, 3000.0, 51.0, 10);
    const double n1 = identify(s1.a, s1.b, p).n_coincidences;
    const double n2 = identify(s2.a, s2.b, p).n_coincidences;
    CHECK(std::fabs(n2 / n1 - 2.0) <= 3.0 * 2.0 * std::sqrt(1.0 / n1 + 1.0 / n2));
}

TEST_CASE("correlation time grows linearly with record length at fixed rate")
{
    const CorrelationParams p;
    const auto s1 = correlated(1'250'000'000'000, 400, 3000.0, 51.0, 11);
    const auto s2 = correlated(2'500'000'000'000, 800, 3000.0, 51.0, 12);
    const double t1 = test::best_seconds([&] { identify(s1.a, s1.b, p); });
    const double t2 = test::best_seconds([&] { identify(s2.a, s2.b, p); });
    CHECK(t2 / t1 <= 2.0 * 2.5);
    CHECK(t2 / t1 >= 2.0 / 2.5);
}

TEST_CASE("parallel kernels reproduce the serial references at any thread count")
{
    const auto s = correlated(2'500'000'000'000, 400, 5000.0, 51.0, 13);
    const auto ref_c = serial::coarse_correlation(s.a.tags, s.b.tags, 1000, 1'000'000);
    const auto ref_f = serial::fine_counts(s.a.tags, s.b.tags, 3000, 2, 2000);
    for (int threads : {1, 2, 4}) {
        test::ThreadCount tc(threads);
        const auto c = coarse_correlation(s.a.tags, s.b.tags, 1000, 1'000'000);
        CHECK(c.counts == ref_c.counts);
        CHECK(fine_counts(s.a.tags, s.b.tags, 3000, 2, 2000) == ref_f);
    }
}

TEST_CASE("coarse peak ties resolve to the smallest absolute lag")
{
    CoarseCorrelation c;
    c.bin_ticks = 10;
    c.span_bins = 3;
    c.counts = {0, 5, 0, 0, 5, 0, 0};
    const auto pk = find_coarse_peak(c);
    CHECK(pk.lag_ticks == 10);
    CHECK(pk.count == 5);
    CHECK(pk.background == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("streams from different records or timers are rejected")
{
    auto a = test::stream_of({1, 2, 3});
    auto b = a;
    b.record_epoch_s = 7;
    CHECK_THROWS_AS(coarse_offset(a, b, CorrelationParams{}), FormatError);
    b = a;
    b.lsb_ps = 2.0;
    CHECK_THROWS_AS(coarse_offset(a, b, CorrelationParams{}), FormatError);
}

TEST_CASE("simulated forward link: coarse and fine centers agree with the path delays")
{
    const auto s = load_preset("common_clock");
    const auto clocks = synth_campaign_clocks(s, 1, 41);
    const auto st = simulate_streams(s, clocks, 0, 41);
    const auto truth = verify::path_delay_oracle(s);
    CHECK(std::fabs(coarse_offset(st.d1, st.d4, s.correlation) - truth.ab_ps) <= s.correlation.coarse_bin_ps);
    const auto r = identify(st.d1, st.d4, s.correlation);
    CHECK(r.fit_ok);
    CHECK(std::fabs(r.center_ps - truth.ab_ps) <= 3.0 * r.center_uncertainty_ps + 1.0);
}

}
