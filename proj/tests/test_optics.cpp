#include "doctest.h"

#include "helpers.hpp"
#include "qttlab/coincidence.hpp"
#include "qttlab/config.hpp"
#include "qttlab/optics.hpp"
#include "qttlab/twoway.hpp"
#include "qttlab/verify/oracles.hpp"

#include <cmath>

using namespace qttlab;

namespace {

OpticalPath path_of(std::vector<OpticalElement> e)
{
    OpticalPath p;
    p.elements = std::move(e);
    p.label = "test";
    return p;
}

OpticalElement disp(double d, double base = 0.0)
{
    return fbg_module(d, base, 0.0, 1560.0, "e");
}

}  // namespace

TEST_SUITE("optics") {

TEST_CASE("delay at the reference wavelength is the sum of base delays")
{
    const auto p = path_of({disp(850.0, 1000.0), disp(-825.0, 20.0)});
    CHECK(path_delay(1560.0, p, 0.0, AmbientModel{}) == 1020.0);
}

TEST_CASE("850 ps/nm over a 0.7 nm detuning adds 595 ps")
{
    const auto p = path_of({disp(850.0)});
    CHECK(path_delay(1560.7, p, 0.0, AmbientModel{}) == doctest::Approx(595.0).epsilon(1e-9));
}

TEST_CASE("net dispersion of combinations")
{
    CHECK(net_dispersion(path_of({})) == 0.0);
    CHECK(net_dispersion(path_of({disp(850.0), disp(-825.0)})) == 25.0);
    CHECK(net_dispersion(path_of({disp(-825.0), disp(-825.0)})) == -1650.0);
    // residual spread of a 3.5 nm band with and without compensation
    CHECK(25.0 * 3.5 == doctest::Approx(87.5));
    CHECK(850.0 * 3.5 == doctest::Approx(2975.0));

    FiberSpanSpec f;
    const auto e = fiber_span(f);
    CHECK(e.dispersion_ps_nm == 850.0);
    CHECK(e.loss_db == doctest::Approx(10.0));
}

TEST_CASE("delay is affine in wavelength with slope equal to the net dispersion")
{
    const auto p = path_of({disp(850.0, 100.0), disp(-830.0, 5.0)});
    const AmbientModel amb;
    const double slope = net_dispersion(p);
    for (double l : {1555.0, 1559.3, 1562.8}) {
        const double d = path_delay(l, p, 0.0, amb) - path_delay(1560.0, p, 0.0, amb);
        CHECK(d == doctest::Approx(slope * (l - 1560.0)).epsilon(1e-9));
    }
}

TEST_CASE("element order does not change the delay")
{
    FiberSpanSpec f;
    const auto a = path_of({fiber_span(f), disp(-850.0, 3.0), fixed_element(7.0, 1.0, "x")});
    const auto b = path_of({fixed_element(7.0, 1.0, "x"), disp(-850.0, 3.0), fiber_span(f)});
    AmbientModel amb;
    amb.amplitude_K = 2.0;
    amb.period_s = 100.0;
    for (double l : {1557.0, 1561.1})
        CHECK(path_delay(l, a, 13.0, amb) == doctest::Approx(path_delay(l, b, 13.0, amb)).epsilon(1e-15));
}

TEST_CASE("lossless path transmits every photon with a common delay")
{
    PhotonBatch in{0, {}};
    for (int i = 0; i < 1000; ++i) in.photons.push_back({static_cast<double>(i) * 10.0, 1555.0 + 0.01 * i});
    const auto p = path_of({fixed_element(250.0, 0.0, "x")});
    const auto out = propagate(in, p, AmbientModel{}, 1);
    REQUIRE(out.photons.size() == in.photons.size());
    for (std::size_t i = 0; i < in.photons.size(); ++i) CHECK(out.photons[i].t_ps == in.photons[i].t_ps + 250.0);
}

TEST_CASE("10 dB of loss passes one photon in ten")
{
    PhotonBatch in{0, {}};
    const int n = 100'000;
    for (int i = 0; i < n; ++i) in.photons.push_back({static_cast<double>(i), 1560.0});
    const auto out = propagate(in, path_of({fixed_element(0.0, 10.0, "x")}), AmbientModel{}, 2);
    const double sd = std::sqrt(n * 0.1 * 0.9);
    CHECK(std::fabs(static_cast<double>(out.photons.size()) - 0.1 * n) < 5.0 * sd);
}

TEST_CASE("propagation output is sorted and independent of the thread count")
{
    PhotonBatch in{0, {}};
    Rng rng = make_rng(5);
    std::normal_distribution<double> lam(1560.0, 1.5);
    for (int i = 0; i < 200'000; ++i) in.photons.push_back({static_cast<double>(i) * 3.0, lam(rng)});
    FiberSpanSpec f;
    const auto p = path_of({fiber_span(f)});
    PhotonBatch one, three;
    {
        test::ThreadCount tc(1);
        one = propagate(in, p, AmbientModel{}, 9);
    }
    {
        test::ThreadCount tc(3);
        three = propagate(in, p, AmbientModel{}, 9);
    }
    REQUIRE(one.photons.size() == three.photons.size());
    bool same = true, sorted = true;
    for (std::size_t i = 0; i < one.photons.size(); ++i) {
        same = same && one.photons[i].t_ps == three.photons[i].t_ps;
        if (i) sorted = sorted && one.photons[i - 1].t_ps <= one.photons[i].t_ps;
    }
    CHECK(same);
    CHECK(sorted);
}

TEST_CASE("ambient temperature swing of the bias scales with the wavelength mismatch")
{
    auto s = load_preset("spectral_consistency_longterm");
    const double period = s.ambient.period_s;
    auto swing = [&](const Scenario& sc) {
        double lo = 1e300, hi = -1e300;
        for (int k = 0; k < 16; ++k) {
            const double t0 = verify::path_delay_oracle(sc, period * k / 16.0).t0_ps;
            lo = std::min(lo, t0);
            hi = std::max(hi, t0);
        }
        return hi - lo;
    };
    const double dl = s.source_a.signal_center_nm - s.source_b.signal_center_nm;
    REQUIRE(std::fabs(dl) > 0.1);
    const double w1 = swing(s);
    auto s2 = s;
    s2.source_a = tune_source(s.source_a, s.source_b.signal_center_nm + 2.0 * dl, Tuning::CommonMode);
    s2.build_paths();
    const double w2 = swing(s2);
    CHECK(w1 > 0.0);
    CHECK(w2 / w1 == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("coincidence width is smallest with a matched grating")
{
    auto base = load_preset("common_clock");
    base.n_runs = 1;
    std::vector<double> widths;
    for (double scale : {0.95, 1.0, 1.05}) {
        auto s = base;
        s.link.fbg_dispersion_ps_nm = base.link.fbg_dispersion_ps_nm * scale;
        s.build_paths();
        const auto clocks = synth_campaign_clocks(s, 1, 77);
        const auto st = simulate_streams(s, clocks, 0, 77);
        widths.push_back(identify(st.d1, st.d4, s.correlation).fwhm_ps);
    }
    CHECK(widths[1] < widths[0]);
    CHECK(widths[1] < widths[2]);
}

}
