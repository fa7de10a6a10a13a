#include "doctest.h"

#include "cli.hpp"
#include "helpers.hpp"
#include "qttlab/config.hpp"
#include "qttlab/error.hpp"
#include "qttlab/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qttlab;
namespace fs = std::filesystem;

namespace {

std::string with_base(const std::string& extra)
{
    return "[campaign]\npreset = common_clock\n" + extra;
}

fs::path scratch_dir(const std::string& name)
{
    const auto d = fs::temp_directory_path() / ("qttlab_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string first_line(const fs::path& p)
{
    std::ifstream in(p);
    std::string l;
    std::getline(in, l);
    return l;
}

int cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "qttlab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("every shipped preset loads and validates")
{
    const auto names = preset_names();
    for (const char* want : {"common_clock", "independent_clocks", "freq_transfer", "bias_low_consistency",
                             "bias_high_consistency", "spectral_consistency_longterm"})
        CHECK(std::find(names.begin(), names.end(), want) != names.end());
    for (const auto& n : names) {
        CAPTURE(n);
        const auto s = load_preset(n);
        CHECK_NOTHROW(s.validate());
        CHECK(s.name == n);
    }
    CHECK_THROWS_AS(load_preset("nope"), ConfigError);
}

TEST_CASE("common-clock preset shares one H-maser reference")
{
    const auto s = load_preset("common_clock");
    CHECK(s.clock_mode == ClockMode::Common);
    REQUIRE(s.clock_a.noise.size() == 1);
    CHECK(s.clock_a.noise[0].alpha == 0);
    CHECK(s.link.fiber.length_km == 50.0);
    CHECK(s.link.fiber.dispersion_ps_nm_km == 17.0);
    CHECK(s.detectors[0].efficiency == 0.65);
    CHECK(s.timer.cycle_period_s == 7.0);
}

TEST_CASE("keys on top of a preset override it; later assignments win")
{
    const auto s = parse_config(with_base("[timer]\ncycle_period_s = 5\ncycle_period_s = 6 # later\n"));
    CHECK(s.timer.cycle_period_s == 6.0);
    CHECK(s.source_a.pair_rate == 5.2e6);
}

TEST_CASE("per-detector sections refine the shared detector section")
{
    const auto s = parse_config(with_base("[detector.D3]\nefficiency = 0.5\n"));
    CHECK(s.detectors[2].efficiency == 0.5);
    CHECK(s.detectors[0].efficiency == 0.65);
}

TEST_CASE("out-of-range efficiency names the problem")
{
    CHECK_THROWS_WITH_AS(parse_config(with_base("[detector]\nefficiency = 1.3\n")),
                         doctest::Contains("efficiency out of range"), ConfigError);
}

TEST_CASE("empty text lists the missing sections")
{
    try {
        parse_config("");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("[campaign]") != std::string::npos);
        CHECK(msg.find("[link]") != std::string::npos);
    }
}

TEST_CASE("syntax errors carry the line number")
{
    CHECK_THROWS_WITH_AS(parse_config_tree("# c\n[campaign\n"), doctest::Contains("line 2"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_tree("[a]\nkey value\n"), doctest::Contains("line 2"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_tree("key = 1\n"), doctest::Contains("line 1"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(with_base("[timer]\nlsb_ps = abc\n")), doctest::Contains("lsb_ps"),
                         ConfigError);
}

TEST_CASE("unknown keys and sections are rejected with their line")
{
    CHECK_THROWS_WITH_AS(parse_config(with_base("[timer]\nlsb = 1\n")), doctest::Contains("line 4"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(with_base("[timer]\nlsb = 1\n")), doctest::Contains("'lsb'"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(with_base("[bogus]\nx = 1\n")), doctest::Contains("[bogus]"), ConfigError);
}

TEST_CASE("comments and whitespace are ignored")
{
    const auto t = parse_config_tree("; top\n  [s]  \n  k =  v  # trailing\n# end\n");
    REQUIRE(t.count("s") == 1);
    CHECK(t.at("s").at("k").text == "v");
    CHECK(t.at("s").at("k").line == 3);
}

TEST_CASE("tag files round-trip")
{
    TimeTagStream s = test::stream_of(test::poisson_ticks(2e-8, 2'500'000'000'000, 1));
    s.channel = 3;
    s.record_epoch_s = -42;
    REQUIRE(s.tags.size() > 40'000);
    std::stringstream buf;
    write_tags(s, buf);
    CHECK(read_tags(buf) == s);

    const auto dir = scratch_dir("tags");
    write_tags(s, dir / "x.qtt");
    CHECK(read_tags(dir / "x.qtt") == s);

    TimeTagStream empty;
    std::stringstream eb;
    write_tags(empty, eb);
    CHECK(read_tags(eb) == empty);
}

TEST_CASE("corrupt tag files are format errors")
{
    TimeTagStream s = test::stream_of({1, 5, 9, 12, 30, 31, 40, 41, 60, 100});
    std::stringstream buf;
    write_tags(s, buf);
    const std::string bytes = buf.str();

    std::stringstream bad(std::string("XXXX") + bytes.substr(4));
    CHECK_THROWS_AS(read_tags(bad), FormatError);

    std::stringstream trunc(bytes.substr(0, bytes.size() - 8));
    CHECK_THROWS_WITH_AS(read_tags(trunc), doctest::Contains("truncated"), FormatError);

    // swap the third and fourth tag records behind the 28-byte header
    std::string swapped = bytes;
    std::swap_ranges(swapped.begin() + 28 + 16, swapped.begin() + 28 + 24, swapped.begin() + 28 + 24);
    std::stringstream ub(swapped);
    CHECK_THROWS_AS(read_tags(ub), FormatError);

    TimeTagStream unsorted = s;
    std::swap(unsorted.tags[2], unsorted.tags[3]);
    std::stringstream wb;
    CHECK_THROWS_AS(write_tags(unsorted, wb), FormatError);
}

TEST_CASE("CSV formats round-trip exactly")
{
    OffsetSeries series;
    series.cycle_period_s = 7.0;
    for (std::size_t k : {0, 1, 2, 4, 5}) {
        OffsetSample x;
        x.run_index = k;
        x.epoch_s = static_cast<std::int64_t>(7 * k);
        x.t0_ps = 0.1 * static_cast<double>(k) + 1.0 / 3.0;
        x.sigma_ps = 2.6;
        x.n_ab = 190.25;
        x.n_ba = 188.5;
        x.fwhm_ab_ps = 120.0 + 1e-9;
        x.fwhm_ba_ps = 119.0;
        series.samples.push_back(x);
    }
    std::stringstream os;
    write_offsets_csv(series, os);
    const auto back = read_offsets_csv(os);
    REQUIRE(back.samples.size() == series.samples.size());
    for (std::size_t i = 0; i < back.samples.size(); ++i) {
        CHECK(back.samples[i].t0_ps == series.samples[i].t0_ps);
        CHECK(back.samples[i].fwhm_ab_ps == series.samples[i].fwhm_ab_ps);
        CHECK(back.samples[i].run_index == series.samples[i].run_index);
    }
    CHECK(back.cycle_period_s == 7.0);
    CHECK(back.failed_runs == std::vector<std::size_t>{3});

    StabilityCurve c;
    c.estimator = Estimator::Mdev;
    c.taus = {7.0, 14.0};
    c.values = {1.0 / 3.0 * 1e-12, 2e-13};
    c.n_terms = {98, 95};
    c.ms = {1, 2};
    std::stringstream cs;
    write_stability_csv(c, cs);
    const auto cb = read_stability_csv(cs);
    CHECK(cb.values == c.values);
    CHECK(cb.taus == c.taus);
    CHECK(cb.estimator == Estimator::Mdev);

    Histogram h;
    h.bin_width = 2.0;
    h.bin_centers = {-1.5, 0.5, 2.5};
    h.counts = {3, 7, 1};
    std::stringstream hs;
    write_histogram_csv(h, hs);
    const auto hb = read_histogram_csv(hs);
    CHECK(hb.counts == h.counts);
    CHECK(hb.bin_centers == h.bin_centers);
    CHECK(hb.bin_width == 2.0);
}

TEST_CASE("CSV kinds are recognised by their header")
{
    CHECK(sniff_csv("run_index,epoch_s,t0_ps,sigma_ps,n_ab,n_ba,fwhm_ab_ps,fwhm_ba_ps") == CsvKind::Offsets);
    CHECK(sniff_csv("tau_s,value,estimator,n_terms") == CsvKind::Stability);
    CHECK(sniff_csv("bin_center_ps,counts") == CsvKind::Histogram);
    CHECK(sniff_csv("a,b") == CsvKind::Unknown);
}

TEST_CASE("every CSV the tool writes is accepted by its stability command")
{
    const auto dir = scratch_dir("cli");
    const auto out = dir / "sim";
    REQUIRE(cli({"simulate", "--preset", "common_clock", "--runs", "6", "--tag-runs", "1", "--out", out.string()}) == 0);
    const auto offsets = out / "offsets.csv";
    REQUIRE(fs::exists(offsets));
    CHECK(sniff_csv(first_line(offsets)) == CsvKind::Offsets);

    const auto stab_dir = dir / "stab";
    REQUIRE(cli({"stability", offsets.string(), "--estimator", "tdev", "--out", stab_dir.string()}) == 0);
    const auto stab = stab_dir / "stability_tdev.csv";
    REQUIRE(fs::exists(stab));
    CHECK(sniff_csv(first_line(stab)) == CsvKind::Stability);
    CHECK(cli({"stability", stab.string(), "--out", (dir / "stab2").string()}) == 0);

    const auto tags = out / "tags";
    REQUIRE(fs::exists(tags / "run0_D1.qtt"));
    const auto coi_dir = dir / "coi";
    REQUIRE(cli({"coincide", (tags / "run0_D1.qtt").string(), (tags / "run0_D4.qtt").string(), "--out",
                 coi_dir.string()}) == 0);
    const auto hist = coi_dir / "histogram.csv";
    CHECK(sniff_csv(first_line(hist)) == CsvKind::Histogram);
    CHECK(cli({"stability", hist.string()}) == 0);
}

TEST_CASE("command-line errors map to exit codes")
{
    CHECK(cli({"frobnicate"}) == 2);
    CHECK(cli({"simulate", "--preset", "common_clock", "--runs", "0", "--out",
               scratch_dir("bad").string()}) == 1);
    CHECK(cli({"simulate", "--preset", "no_such_preset", "--out", scratch_dir("bad2").string()}) == 1);
    CHECK(cli({"stability", "/nonexistent/file.csv"}) != 0);
}

}
