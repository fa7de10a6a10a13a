#include "qttlab/coincidence.hpp"
#include "qttlab/config.hpp"
#include "qttlab/rng.hpp"
#include "qttlab/stability.hpp"
#include "qttlab/twoway.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

using namespace qttlab;

namespace {

template <class F>
double best_ms(F&& f, int repeats)
{
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

std::vector<std::int64_t> poisson_ticks(double rate, std::int64_t length, std::uint64_t seed)
{
    Rng rng = make_rng(seed);
    std::exponential_distribution<double> gap(rate);
    std::vector<std::int64_t> v;
    for (double t = gap(rng); t < static_cast<double>(length); t += gap(rng)) v.push_back(static_cast<std::int64_t>(t));
    return v;
}

void row(const char* name, double serial_ms, double parallel_ms, bool same)
{
    std::printf("%-22s %10.2f %10.2f %8.2fx  %s\n", name, serial_ms, parallel_ms, serial_ms / parallel_ms,
                same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv)
{
    const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 5;
    std::printf("threads %d, best of %d\n", omp_get_max_threads(), repeats);
    std::printf("%-22s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

    const auto a = poisson_ticks(2e-8, 2'500'000'000'000, 1);
    const auto b = poisson_ticks(2e-8, 2'500'000'000'000, 2);

    CoarseCorrelation cs, cp;
    const double t_cs = best_ms([&] { cs = serial::coarse_correlation(a, b, 1000, 1'000'000); }, repeats);
    const double t_cp = best_ms([&] { cp = coarse_correlation(a, b, 1000, 1'000'000); }, repeats);
    row("coarse_correlation", t_cs, t_cp, cs.counts == cp.counts);

    std::vector<std::int64_t> fs, fp;
    const double t_fs = best_ms([&] { fs = serial::fine_counts(a, b, -1'000'000, 2, 1'000'000); }, repeats);
    const double t_fp = best_ms([&] { fp = fine_counts(a, b, -1'000'000, 2, 1'000'000); }, repeats);
    row("fine_counts", t_fs, t_fp, fs == fp);

    PhaseData pd;
    pd.tau0 = 7.0;
    auto clk = rubidium_clock();
    pd.x = synth_phase(clk, 100'000, 7.0, 3).phase();
    const auto grid = log_grid(Estimator::Tdev, pd.x.size(), 8);
    StabilityCurve ss, sp;
    const double t_ss = best_ms([&] { ss = serial::curve(pd, Estimator::Tdev, grid); }, repeats);
    const double t_sp = best_ms([&] { sp = curve(pd, Estimator::Tdev, grid); }, repeats);
    row("tdev curve", t_ss, t_sp, ss.values == sp.values);

    const auto s = load_preset("common_clock");
    OffsetSeries one, many;
    const int nthreads = omp_get_max_threads();
    omp_set_num_threads(1);
    const double t_c1 = best_ms([&] { one = run_campaign(s, 8, s.master_seed); }, 1);
    omp_set_num_threads(nthreads);
    const double t_cn = best_ms([&] { many = run_campaign(s, 8, s.master_seed); }, 1);
    bool same = one.samples.size() == many.samples.size();
    for (std::size_t i = 0; same && i < one.samples.size(); ++i) same = one.samples[i].t0_ps == many.samples[i].t0_ps;
    row("campaign (8 runs)", t_c1, t_cn, same);
    return 0;
}
