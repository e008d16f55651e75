#include "fsqkd/channel.hpp"

#include <cmath>
#include <numbers>

#include "fsqkd/errors.hpp"

namespace fsqkd::channel {

namespace {
constexpr double kPlanck = 6.62607015e-34;     // J s
constexpr double kLightSpeed = 299792458.0;    // m/s
} // namespace

void LinkConfig::validate() const {
    check_positive(range_m, "range_m");
    check_positive(tx_beam.w0_m, "tx_beam.w0_m");
    check_positive(tx_beam.wavelength_m, "tx_beam.wavelength_m");
    check_positive(rx_aperture_diameter_m, "rx_aperture_diameter_m");
    check_nonnegative(atm_attenuation_db_per_km, "atm_attenuation_db_per_km");
    check_unit_interval(optics_efficiency, "optics_efficiency");
    check_positive(fiber_core_diameter_m, "fiber_core_diameter_m");
    check_positive(focal_length_m, "focal_length_m");
    check_positive(spectral_filter_fwhm_nm, "spectral_filter_fwhm_nm");
}

double geometric_coupling(double w_lt_m, double rx_aperture_diameter_m) {
    check_positive(w_lt_m, "w_lt_m");
    check_positive(rx_aperture_diameter_m, "rx_aperture_diameter_m");
    const double a = 0.5 * rx_aperture_diameter_m;
    return -std::expm1(-2.0 * a * a / (w_lt_m * w_lt_m));
}

double fiber_fov_halfangle(const LinkConfig& l) {
    check_positive(l.focal_length_m, "focal_length_m");
    check_nonnegative(l.fiber_core_diameter_m, "fiber_core_diameter_m");
    return l.fiber_core_diameter_m / (2.0 * l.focal_length_m);
}

double total_transmittance(const LinkConfig& l, double w_lt_m) {
    l.validate();
    const double geo = geometric_coupling(w_lt_m, l.rx_aperture_diameter_m);
    const double atm =
        std::pow(10.0, -l.atm_attenuation_db_per_km * (l.range_m / 1000.0) / 10.0);
    return geo * atm * l.optics_efficiency;
}

double background_count_rate(const LinkConfig& l, const BackgroundEnvironment& env,
                             double detector_efficiency) {
    l.validate();
    check_nonnegative(env.sky_radiance, "sky_radiance");
    check_unit_interval(detector_efficiency, "detector_efficiency");
    const double halfangle = fiber_fov_halfangle(l);
    const double aperture_area =
        std::numbers::pi * 0.25 * l.rx_aperture_diameter_m * l.rx_aperture_diameter_m;
    const double solid_angle = std::numbers::pi * halfangle * halfangle;
    const double photon_energy = kPlanck * kLightSpeed / l.tx_beam.wavelength_m;
    return env.sky_radiance * l.spectral_filter_fwhm_nm * aperture_area * solid_angle *
           l.optics_efficiency * detector_efficiency / photon_energy;
}

} // namespace fsqkd::channel
