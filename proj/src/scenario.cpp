#include "qttlab/scenario.hpp"

#include "qttlab/error.hpp"

#include <cmath>
#include <utility>

namespace qttlab {

Scenario::Scenario()
{
    source_a.label = "A";
    source_b.label = "B";
    detectors[0].label = "D1";
    detectors[1].label = "D2";
    detectors[2].label = "D3";
    detectors[3].label = "D4";
    build_paths();
}

void Scenario::build_paths()
{
    const auto& l = link;
    forward = OpticalPath{{}, "forward"};
    backward = OpticalPath{{}, "backward"};
    local_a = OpticalPath{{}, "local_a"};
    local_b = OpticalPath{{}, "local_b"};

    const auto fbg_a = fbg_module(l.fbg_dispersion_ps_nm, l.fbg_delay_ps, l.fbg_loss_db,
                                  l.fiber.ref_wavelength_nm, "fbg_a");
    const auto fbg_b = fbg_module(l.fbg_dispersion_ps_nm + l.fbg_dispersion_asymmetry_ps_nm,
                                  l.fbg_delay_ps + l.fbg_delay_asymmetry_ps, l.fbg_loss_db,
                                  l.fiber.ref_wavelength_nm, "fbg_b");

    if (l.fbg_enabled && l.fbg_placement == FbgPlacement::Signal) {
        forward.elements.push_back(fbg_a);
        backward.elements.push_back(fbg_b);
    }
    if (l.fiber_enabled) {
        forward.elements.push_back(fiber_span(l.fiber, "fiber"));
        backward.elements.push_back(fiber_span(l.fiber, "fiber"));
    }
    if (l.common_extra_delay_ps != 0.0 || l.signal_extra_loss_db != 0.0) {
        forward.elements.push_back(fixed_element(l.common_extra_delay_ps, l.signal_extra_loss_db, "coupling"));
        backward.elements.push_back(fixed_element(l.common_extra_delay_ps, l.signal_extra_loss_db, "coupling"));
    }
    if (l.fbg_enabled && l.fbg_placement == FbgPlacement::Idler) {
        local_a.elements.push_back(fbg_a);
        local_b.elements.push_back(fbg_b);
    }
    local_a.elements.push_back(fixed_element(l.local_delay_a_ps, l.idler_extra_loss_db, "local"));
    local_b.elements.push_back(fixed_element(l.local_delay_b_ps, l.idler_extra_loss_db, "local"));
}

void Scenario::validate() const
{
    clock_a.validate();
    clock_b.validate();
    transfer.validate();
    if (!(clock_tau0_s > 0.0)) throw ConfigError("clocks: tau0 must be > 0");
    source_a.validate();
    source_b.validate();
    forward.validate();
    backward.validate();
    local_a.validate();
    local_b.validate();
    for (const auto& d : detectors) d.validate();
    timer.validate();
    if (timer.cycle_period_s != std::floor(timer.cycle_period_s) || timer.cycle_period_s < 1.0)
        throw ConfigError("timer: cycle_period must be a whole number of seconds");
    correlation.validate();
    ambient.validate();
    if (n_runs == 0) throw ConfigError("campaign: n_runs must be >= 1");
}

Scenario Scenario::swapped_sites() const
{
    if (clock_mode == ClockMode::Transfer)
        throw ConfigError("swapped_sites: transfer mode has a fixed sending site");
    Scenario s = *this;
    // a shared reference stays shared
    if (clock_mode == ClockMode::Independent) std::swap(s.clock_a, s.clock_b);
    std::swap(s.source_a, s.source_b);
    std::swap(s.forward, s.backward);
    std::swap(s.local_a, s.local_b);
    std::swap(s.detectors[0], s.detectors[1]);
    std::swap(s.detectors[2], s.detectors[3]);
    std::swap(s.link.local_delay_a_ps, s.link.local_delay_b_ps);
    return s;
}

}  // namespace qttlab
