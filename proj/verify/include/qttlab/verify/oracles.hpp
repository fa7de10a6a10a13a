#pragma once

#include "qttlab/scenario.hpp"
#include "qttlab/stability.hpp"

namespace qttlab::verify {

// Definitional double sums, O(N m); reference values for the fast estimators.
double brute_adev(const PhaseData& d, std::size_t m);
double brute_mdev(const PhaseData& d, std::size_t m);
double brute_tdev(const PhaseData& d, std::size_t m);

// Noise-free bookkeeping of every element delay along one direction: the mean of
// signal-path delay minus idler-path delay over the source spectrum, ps.
double expected_direction_delay(const PairSourceSpec& src, const OpticalPath& signal_path,
                                const OpticalPath& idler_path, const AmbientModel& ambient,
                                double t_s);

struct PathDelayOracle {
    double ab_ps = 0.0;  // expected t4 - t1, clock offsets excluded
    double ba_ps = 0.0;  // expected t3 - t2
    double t0_ps = 0.0;  // (ab - ba) / 2 + configured clock offset difference
};

PathDelayOracle path_delay_oracle(const Scenario& s, double t_s = 0.0);

}  // namespace qttlab::verify
