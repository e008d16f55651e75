#pragma once

#include <string>

#include "fsqkd/turbulence.hpp"

namespace fsqkd::channel {

/// Static geometry and optics of the link. Defaults describe the 300 m urban
/// reference configuration: 40 mm collimated transmit beam, 8 cm receiver
/// aperture, 62.5 um receiver fiber, sub-nm spectral filter.
///
/// focal_length_m and optics_efficiency are engineering assumptions, not
/// measured values; simulation output flags them as such.
struct LinkConfig {
    double range_m = 300.0;
    turbulence::BeamGeometry tx_beam{};
    double rx_aperture_diameter_m = 0.08;
    double atm_attenuation_db_per_km = 3.0;
    double optics_efficiency = 0.5;
    double fiber_core_diameter_m = 62.5e-6;
    double focal_length_m = 2.0;
    double spectral_filter_fwhm_nm = 0.5;

    double rx_aperture_radius_m() const { return 0.5 * rx_aperture_diameter_m; }
    void validate() const; // throws std::domain_error naming the offending field
};

/// Sky background at the data wavelength. Radiance in W m^-2 sr^-1 nm^-1.
struct BackgroundEnvironment {
    double sky_radiance = 1e-4;
    std::string label = "post-sunset";
};

/// Truncated-Gaussian power capture 1 - exp(-2 a^2 / W_LT^2) for aperture
/// radius a and spot radius W_LT.
double geometric_coupling(double w_lt_m, double rx_aperture_diameter_m);

/// Receiver field-of-view half angle set by the fiber core acting as a
/// spatial filter: core_diameter / (2 f).
double fiber_fov_halfangle(const LinkConfig& l);

/// Product of geometric capture, scalar band attenuation 10^(-alpha L / 10),
/// and receiver optics throughput.
double total_transmittance(const LinkConfig& l, double w_lt_m);

/// Background click rate summed over both detector arms:
///   N_b = radiance * filter_width * A_rx * Omega_fov * eta_opt * eta_det / E_photon
/// with Omega_fov = pi * halfangle^2 and E_photon = h c / lambda.
double background_count_rate(const LinkConfig& l, const BackgroundEnvironment& env,
                             double detector_efficiency);

} // namespace fsqkd::channel
