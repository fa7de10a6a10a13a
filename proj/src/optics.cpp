#include "qttlab/optics.hpp"

#include "qttlab/error.hpp"
#include "sorting.hpp"
#include "qttlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace qttlab {

void OpticalElement::validate() const
{
    if (!(loss_db >= 0.0)) throw ConfigError("element " + label + ": loss_db must be >= 0");
    if (!(base_delay_ps >= 0.0)) throw ConfigError("element " + label + ": base_delay must be >= 0");
    if (!(ref_wavelength_nm > 0.0))
        throw ConfigError("element " + label + ": reference wavelength must be > 0");
}

double OpticalPath::total_loss_db() const noexcept
{
    double s = 0.0;
    for (const auto& e : elements) s += e.loss_db;
    return s;
}

double OpticalPath::transmission() const noexcept
{
    return std::pow(10.0, -total_loss_db() / 10.0);
}

void OpticalPath::validate() const
{
    for (const auto& e : elements) e.validate();
}

void AmbientModel::validate() const
{
    if (amplitude_K != 0.0 && !(period_s > 0.0))
        throw ConfigError("ambient: period must be > 0 when amplitude > 0");
}

double AmbientModel::delta_T(double t_s) const noexcept
{
    if (amplitude_K == 0.0) return 0.0;
    return amplitude_K * std::sin(2.0 * std::numbers::pi * t_s / period_s + phase_rad);
}

OpticalElement fiber_span(const FiberSpanSpec& f, std::string label)
{
    OpticalElement e;
    e.label = std::move(label);
    e.base_delay_ps = f.group_delay_ps_km * f.length_km;
    e.dispersion_ps_nm = f.dispersion_ps_nm_km * f.length_km;
    e.ref_wavelength_nm = f.ref_wavelength_nm;
    e.loss_db = f.loss_db_km * f.length_km;
    e.temp_delay_coeff_ps_K = f.temp_delay_ps_km_K * f.length_km;
    e.temp_dispersion_coeff_ps_nm_K = f.temp_dispersion_ps_nm_km_K * f.length_km;
    return e;
}

OpticalElement fbg_module(double dispersion_ps_nm, double base_delay_ps, double loss_db,
                          double ref_wavelength_nm, std::string label)
{
    OpticalElement e;
    e.label = std::move(label);
    e.dispersion_ps_nm = dispersion_ps_nm;
    e.base_delay_ps = base_delay_ps;
    e.loss_db = loss_db;
    e.ref_wavelength_nm = ref_wavelength_nm;
    return e;
}

OpticalElement fixed_element(double base_delay_ps, double loss_db, std::string label)
{
    OpticalElement e;
    e.label = std::move(label);
    e.base_delay_ps = base_delay_ps;
    e.loss_db = loss_db;
    return e;
}

double path_delay(double lambda_nm, const OpticalPath& path, double t_s, const AmbientModel& ambient)
{
    const double dT = ambient.delta_T(t_s);
    double d = 0.0;
    for (const auto& e : path.elements) {
        d += e.base_delay_ps + e.temp_delay_coeff_ps_K * dT;
        d += (e.dispersion_ps_nm + e.temp_dispersion_coeff_ps_nm_K * dT) *
             (lambda_nm - e.ref_wavelength_nm);
    }
    return d;
}

double net_dispersion(const OpticalPath& path) noexcept
{
    double s = 0.0;
    for (const auto& e : path.elements) s += e.dispersion_ps_nm;
    return s;
}

PhotonBatch propagate(const PhotonBatch& in, const OpticalPath& path, const AmbientModel& ambient,
                      std::uint64_t seed, double time_origin_s)
{
    const double p_survive = path.transmission();
    const std::size_t n = in.photons.size();
    const std::size_t n_parts = (n + kPropagatePartition - 1) / kPropagatePartition;
    std::vector<std::vector<Photon>> parts(n_parts);

    // fixed-size partitions with their own streams: output independent of thread count
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(n_parts); ++p) {
        const std::size_t lo = static_cast<std::size_t>(p) * kPropagatePartition;
        const std::size_t hi = std::min(n, lo + kPropagatePartition);
        Rng rng = make_rng(derive_seed(seed, "partition", static_cast<std::uint64_t>(p)));
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        auto& out = parts[static_cast<std::size_t>(p)];
        out.reserve(static_cast<std::size_t>(static_cast<double>(hi - lo) * p_survive * 1.1) + 8);
        const double epoch = time_origin_s + static_cast<double>(in.epoch_s);
        for (std::size_t k = lo; k < hi; ++k) {
            const Photon& ph = in.photons[k];
            if (p_survive < 1.0 && u01(rng) >= p_survive) continue;
            const double t_s = epoch + ph.t_ps * 1e-12;
            out.push_back({ph.t_ps + path_delay(ph.lambda_nm, path, t_s, ambient), ph.lambda_nm});
        }
    }

    PhotonBatch result{in.epoch_s, {}};
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    result.photons.reserve(total);
    for (const auto& p : parts) result.photons.insert(result.photons.end(), p.begin(), p.end());
    detail::sort_nearly(result.photons.begin(), result.photons.end(),
              [](const Photon& a, const Photon& b) { return a.t_ps < b.t_ps; });
    return result;
}

OpticalPath lossless(OpticalPath path)
{
    for (auto& e : path.elements) e.loss_db = 0.0;
    return path;
}

}  // namespace qttlab
