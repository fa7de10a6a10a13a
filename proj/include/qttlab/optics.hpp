#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qttlab {

// One delay/dispersion/loss element. delay(lambda) = base + dispersion * (lambda - ref).
struct OpticalElement {
    std::string label;
    double base_delay_ps = 0.0;
    double dispersion_ps_nm = 0.0;  // total (D*L for a fiber span)
    double ref_wavelength_nm = 1560.0;
    double loss_db = 0.0;
    double temp_delay_coeff_ps_K = 0.0;
    double temp_dispersion_coeff_ps_nm_K = 0.0;

    void validate() const;
};

struct OpticalPath {
    std::vector<OpticalElement> elements;
    std::string label;  // also keys the propagation random stream

    double total_loss_db() const noexcept;
    double transmission() const noexcept;
    void validate() const;
};

struct AmbientModel {
    double mean_temp_K = 293.15;
    double amplitude_K = 0.0;
    double period_s = 86400.0;
    double phase_rad = 0.0;

    void validate() const;
    double delta_T(double t_s) const noexcept;  // deviation from mean_temp_K
};

struct FiberSpanSpec {
    double length_km = 50.0;
    double dispersion_ps_nm_km = 17.0;
    double loss_db_km = 0.2;
    double group_delay_ps_km = 4.9e6;
    double ref_wavelength_nm = 1560.0;
    double temp_delay_ps_km_K = 40.0;
    double temp_dispersion_ps_nm_km_K = -0.0025;
};

OpticalElement fiber_span(const FiberSpanSpec& f, std::string label = "fiber");
OpticalElement fbg_module(double dispersion_ps_nm, double base_delay_ps, double loss_db,
                          double ref_wavelength_nm = 1560.0, std::string label = "fbg");
OpticalElement fixed_element(double base_delay_ps, double loss_db, std::string label);

// Sum over elements of [base + c_T dT] + [D + c_D dT] * (lambda - ref).
double path_delay(double lambda_nm, const OpticalPath& path, double t_s, const AmbientModel& ambient);

// Sum of element dispersions at dT = 0.
double net_dispersion(const OpticalPath& path) noexcept;

// A photon in flight: true time relative to its batch epoch, and its wavelength.
struct Photon {
    double t_ps = 0.0;
    double lambda_nm = 0.0;
};

struct PhotonBatch {
    std::int64_t epoch_s = 0;
    std::vector<Photon> photons;
};

inline constexpr std::size_t kPropagatePartition = 1u << 15;

// Loss thinning then wavelength-dependent delay; output sorted by arrival time.
// `time_origin_s` converts the batch epoch into the ambient model's time axis.
PhotonBatch propagate(const PhotonBatch& in, const OpticalPath& path, const AmbientModel& ambient,
                      std::uint64_t seed, double time_origin_s = 0.0);

// Path with every element's loss set to zero.
OpticalPath lossless(OpticalPath path);

}  // namespace qttlab
