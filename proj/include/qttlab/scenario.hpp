#pragma once

#include "qttlab/coincidence.hpp"
#include "qttlab/detect.hpp"
#include "qttlab/optics.hpp"
#include "qttlab/source.hpp"
#include "qttlab/timescale.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace qttlab {

enum class ClockMode {
    Common,       // both timers on clock A
    Independent,  // each timer on its own clock
    Transfer,     // timer B on clock A's frequency delivered over a transfer link
};

enum class FbgPlacement { Idler, Signal };

// Link geometry as configured; the resolved optical paths live in Scenario.
struct LinkSpec {
    FiberSpanSpec fiber;
    bool fiber_enabled = true;
    bool fbg_enabled = true;
    FbgPlacement fbg_placement = FbgPlacement::Idler;
    double fbg_dispersion_ps_nm = -850.0;
    double fbg_delay_ps = 0.0;
    double fbg_loss_db = 3.0;
    double fbg_delay_asymmetry_ps = 0.0;  // extra delay of site B's grating
    double fbg_dispersion_asymmetry_ps_nm = 0.0;
    double signal_extra_loss_db = 0.0;    // coupling/filter loss before the remote detector
    double idler_extra_loss_db = 0.0;     // attenuation in the local arm
    double common_extra_delay_ps = 0.0;   // added to both transmitted paths
    double local_delay_a_ps = 0.0;
    double local_delay_b_ps = 0.0;
};

struct Scenario {
    std::string name;

    ClockMode clock_mode = ClockMode::Common;
    ClockModel clock_a = hydrogen_maser("clock_a");
    ClockModel clock_b = hydrogen_maser("clock_b");
    TransferSpec transfer;
    double clock_tau0_s = 0.1;

    PairSourceSpec source_a;
    PairSourceSpec source_b;
    LinkSpec link;

    // resolved from `link` by build_paths()
    OpticalPath forward;   // signal A -> site B
    OpticalPath backward;  // signal B -> site A
    OpticalPath local_a;   // idler A -> D1
    OpticalPath local_b;   // idler B -> D2

    std::array<DetectorSpec, 4> detectors;  // D1..D4
    TimerSpec timer;
    CorrelationParams correlation;
    AmbientModel ambient;

    std::size_t n_runs = 100;
    std::uint64_t master_seed = 1;
    std::int64_t start_epoch_s = 0;
    bool fast_thinning = true;

    Scenario();

    void build_paths();
    void validate() const;

    // Relabel A <-> B: sources, clocks, detectors and paths trade places and keep
    // their random-stream labels.
    Scenario swapped_sites() const;
};

}  // namespace qttlab
