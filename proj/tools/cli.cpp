#include "cli.hpp"

#include "qttlab/config.hpp"
#include "qttlab/error.hpp"
#include "qttlab/io.hpp"
#include "qttlab/twoway.hpp"
#include "qttlab/verify/acceptance.hpp"
#include "qttlab/verify/oracles.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace qttlab {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScenarioSource {
    std::string config;
    std::string preset;
};

void add_scenario_options(CLI::App& cmd, ScenarioSource& src)
{
    auto* c = cmd.add_option("--config", src.config, "scenario file")->check(CLI::ExistingFile);
    cmd.add_option("--preset", src.preset, "shipped preset name")->excludes(c);
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot open " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Scenario load_scenario(const ScenarioSource& src, const char* fallback)
{
    if (!src.config.empty()) return parse_config(slurp(src.config));
    return load_preset(src.preset.empty() ? fallback : src.preset);
}

void apply_thread_cap()
{
    const char* env = std::getenv("QTTLAB_THREADS");
    if (!env || !*env) return;
    int n = 0;
    const std::string_view v(env);
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc() || p != v.data() + v.size() || n < 1)
        throw UsageError("QTTLAB_THREADS must be a positive integer");
    omp_set_num_threads(n);
}

std::string whole_file(auto&& writer)
{
    std::ostringstream os;
    writer(os);
    return os.str();
}

int cmd_simulate(const ScenarioSource& src, const fs::path& out, const std::optional<std::uint64_t>& seed,
                 const std::optional<std::size_t>& runs, std::size_t tag_runs)
{
    Scenario s = load_scenario(src, "common_clock");
    if (seed) s.master_seed = *seed;
    if (runs) s.n_runs = *runs;
    s.validate();

    fs::create_directories(out);
    RunObserver observer;
    if (tag_runs > 0) {
        fs::create_directories(out / "tags");
        observer = [&](std::size_t k, const RunStreams& st) {
            if (k >= tag_runs) return;
            for (const auto* t : {&st.d1, &st.d2, &st.d3, &st.d4}) {
                const auto name = "run" + std::to_string(k) + "_D" + std::to_string(t->channel) + ".qtt";
                write_tags(*t, out / "tags" / name);
            }
        };
    }
    const auto series = run_campaign(s, s.n_runs, s.master_seed, observer);
    write_file(out / "offsets.csv", whole_file([&](std::ostream& os) { write_offsets_csv(series, os); }));

    std::printf("scenario %s: %zu runs, %zu ok, %zu failed\n", s.name.c_str(), s.n_runs,
                series.samples.size(), series.failed_runs.size());
    if (!series.samples.empty()) {
        std::printf("mean t0 %s ps", format_double(mean_t0(series)).c_str());
        if (series.samples.size() > 1) std::printf(", std %s ps", format_double(stddev_t0(series)).c_str());
        std::printf("\n");
    }
    std::printf("wrote %s\n", (out / "offsets.csv").string().c_str());
    return 0;
}

int cmd_coincide(const ScenarioSource& src, const fs::path& a_path, const fs::path& b_path, const fs::path& out)
{
    const auto params = load_scenario(src, "common_clock").correlation;
    const auto a = read_tags(a_path);
    const auto b = read_tags(b_path);
    const auto r = identify(a, b, params);
    const auto h = fine_histogram(a, b, r.center_ps, params);
    fs::create_directories(out);
    write_file(out / "histogram.csv", whole_file([&](std::ostream& os) { write_histogram_csv(h, os); }));

    std::printf("center_ps %s\n", format_double(r.center_ps).c_str());
    std::printf("center_uncertainty_ps %s\n", format_double(r.center_uncertainty_ps).c_str());
    std::printf("fwhm_ps %s\n", format_double(r.fwhm_ps).c_str());
    std::printf("n_coincidences %s\n", format_double(r.n_coincidences).c_str());
    std::printf("background_per_bin %s\n", format_double(r.background_per_bin).c_str());
    std::printf("fit_ok %s\n", r.fit_ok ? "true" : "false");
    std::printf("wrote %s\n", (out / "histogram.csv").string().c_str());
    return 0;
}

int cmd_stability(const fs::path& in_path, const std::string& estimator, const fs::path& out)
{
    const auto e = parse_estimator(estimator);
    std::ifstream in(in_path);
    if (!in) throw Error("cannot open " + in_path.string());
    std::string header;
    std::getline(in, header);
    in.seekg(0);

    StabilityCurve c;
    switch (sniff_csv(header)) {
    case CsvKind::Offsets: {
        const auto series = read_offsets_csv(in);
        const auto pd = longest_contiguous(series);
        c = curve(pd, e);
        break;
    }
    case CsvKind::Stability:
        c = read_stability_csv(in);
        break;
    case CsvKind::Histogram: {
        const auto h = read_histogram_csv(in);
        std::printf("histogram: %zu bins, %lld counts; no time series to evaluate\n", h.counts.size(),
                    static_cast<long long>(h.total()));
        return 0;
    }
    case CsvKind::Unknown:
        throw FormatError("unrecognized CSV header in " + in_path.string());
    }

    fs::create_directories(out);
    const auto name = "stability_" + std::string(to_string(c.estimator)) + ".csv";
    write_file(out / name, whole_file([&](std::ostream& os) { write_stability_csv(c, os); }));
    std::printf("%-14s %-14s %s\n", "tau_s", to_string(c.estimator).data(), "n_terms");
    for (std::size_t i = 0; i < c.taus.size(); ++i)
        std::printf("%-14s %-14s %zu\n", format_double(c.taus[i]).c_str(), format_double(c.values[i]).c_str(),
                    c.n_terms[i]);
    std::printf("wrote %s\n", (out / name).string().c_str());
    return 0;
}

int cmd_bias(const ScenarioSource& src)
{
    const auto s = load_scenario(src, "bias_low_consistency");
    const auto& f = s.link.fiber;
    const auto b = bias_predict(f.length_km, f.dispersion_ps_nm_km, s.source_a.signal_center_nm,
                                s.source_b.signal_center_nm, s.source_a.signal_center_uncertainty_nm,
                                s.source_b.signal_center_uncertainty_nm);
    const auto o = verify::path_delay_oracle(s);
    std::printf("scenario               %s\n", s.name.c_str());
    std::printf("length_km              %s\n", format_double(b.length_km).c_str());
    std::printf("dispersion_ps_nm_km    %s\n", format_double(b.dispersion_ps_nm_km).c_str());
    std::printf("lambda_a_nm            %s +- %s\n", format_double(b.lambda_a_nm).c_str(),
                format_double(s.source_a.signal_center_uncertainty_nm).c_str());
    std::printf("lambda_b_nm            %s +- %s\n", format_double(b.lambda_b_nm).c_str(),
                format_double(s.source_b.signal_center_uncertainty_nm).c_str());
    std::printf("predicted_bias_ps      %.1f +- %.1f\n", b.tau_prime_ps, b.uncertainty_ps);
    std::printf("path_delay_oracle_ps   %.1f\n", o.t0_ps);
    return 0;
}

int cmd_selftest(const std::vector<std::string>& only)
{
    bool all = true;
    for (const auto& c : verify::acceptance_criteria()) {
        const std::string id = c.id > 10 ? std::to_string(c.id / 10) : std::to_string(c.id);
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto r = verify::run_criterion(c);
        std::printf("%s\n", verify::format_result(r).c_str());
        std::fflush(stdout);
        all = all && r.pass;
    }
    return all ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv)
{
    CLI::App app{"qttlab: two-way quantum time transfer simulator"};
    app.require_subcommand(1);

    ScenarioSource src;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::size_t tag_runs = 0;
    std::string tag_a, tag_b, csv_in, estimator = "tdev";
    std::vector<std::string> only;

    auto* sim = app.add_subcommand("simulate", "run a measurement campaign, write offsets.csv");
    add_scenario_options(*sim, src);
    sim->add_option("--out", out, "output directory");
    sim->add_option("--seed", seed, "master seed");
    sim->add_option("--runs", runs, "number of measurement cycles");
    sim->add_option("--tag-runs", tag_runs, "also write QTT1 tag files for the first N runs");

    auto* coi = app.add_subcommand("coincide", "identify coincidences between two tag files");
    coi->add_option("a", tag_a, "tag file of the local detector")->required()->check(CLI::ExistingFile);
    coi->add_option("b", tag_b, "tag file of the remote detector")->required()->check(CLI::ExistingFile);
    add_scenario_options(*coi, src);
    coi->add_option("--out", out, "output directory");

    auto* stab = app.add_subcommand("stability", "ADEV/MDEV/TDEV of an offsets CSV");
    stab->add_option("csv", csv_in, "offsets CSV")->required()->check(CLI::ExistingFile);
    stab->add_option("--estimator", estimator, "adev | mdev | tdev")
        ->check(CLI::IsMember({"adev", "mdev", "tdev"}));
    stab->add_option("--out", out, "output directory");

    auto* bias = app.add_subcommand("bias", "print the wavelength-mismatch bias prediction");
    add_scenario_options(*bias, src);

    auto* self = app.add_subcommand("selftest", "run the acceptance suite");
    self->add_option("--only", only, "criterion numbers (1..9)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        apply_thread_cap();
        if (*sim) return cmd_simulate(src, out, seed, runs, tag_runs);
        if (*coi) return cmd_coincide(src, tag_a, tag_b, out);
        if (*stab) return cmd_stability(csv_in, estimator, out);
        if (*bias) return cmd_bias(src);
        if (*self) return cmd_selftest(only);
    } catch (const UsageError& e) {
        std::cerr << "qttlab: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "qttlab: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace qttlab
