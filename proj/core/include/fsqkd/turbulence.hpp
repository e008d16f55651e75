#pragma once

namespace fsqkd::turbulence {

/// Kolmogorov turbulence strength. cn2 is the refractive-index structure
/// constant in m^(-2/3), assumed uniform along the path. cn2 = 0 is vacuum:
/// every statistic collapses to its diffraction-only value.
///
/// Representative regimes: 1e-15 (average), 1e-14 (very strong),
/// 1e-13 (extreme, rarely observed).
struct TurbulenceParams {
    double cn2 = 1e-15;
};

/// Collimated Gaussian launch geometry. w0_m is the 1/e^2 intensity radius
/// at the transmit telescope; the models below assume a divergence-free
/// (collimated) launch.
struct BeamGeometry {
    double w0_m = 0.020;
    double wavelength_m = 850e-9;
    bool collimated = true;

    double wavenumber() const;       // k = 2*pi/lambda
    double rayleigh_range_m() const; // z_R = pi*w0^2/lambda
};

/// Second-order statistics of the received beam at one range.
struct TurbulenceStats {
    double rytov_var = 0.0;     // scintillation strength sigma_R^2
    double w_diff_m = 0.0;      // diffraction-only 1/e^2 radius
    double w_lt_m = 0.0;        // long-term radius (diffraction + spreading + wander)
    double wander_var_m2 = 0.0; // centroid displacement variance <r_c^2>
    double aoa_var_rad2 = 0.0;  // angle-of-arrival variance <beta_a^2>
    double lambda_param = 0.0;  // Fresnel ratio at range

    /// Closed forms are weak-fluctuation theory; callers flag results
    /// computed beyond sigma_R^2 = 1.
    bool weak_fluctuation() const { return rytov_var <= 1.0; }
};

/// Plane-wave Rytov variance sigma_R^2 = 1.23 Cn^2 k^(7/6) L^(11/6).
double rytov_variance(const TurbulenceParams& t, const BeamGeometry& b, double range_m);

/// Vacuum Gaussian-beam radius W(L) = W0 sqrt(1 + (L/z_R)^2).
double diffraction_radius(const BeamGeometry& b, double range_m);

/// Fresnel ratio of the received beam, Lambda = 2L / (k W(L)^2).
double fresnel_ratio(const BeamGeometry& b, double range_m);

/// Long-term radius W_LT = W sqrt(1 + 1.33 sigma_R^2 Lambda^(5/6)),
/// folding turbulent spreading and wander into an effective spot size.
double long_term_radius(const TurbulenceParams& t, const BeamGeometry& b, double range_m);

/// Beam-wander centroid variance for a collimated beam,
/// <r_c^2> = 2.42 Cn^2 L^3 W0^(-1/3). Scales exactly as L^3.
double beam_wander_variance(const TurbulenceParams& t, const BeamGeometry& b, double range_m);

/// Plane-wave angle-of-arrival variance over an aperture of diameter D,
/// <beta_a^2> = 2.91 Cn^2 L D^(-1/3). Linear in both Cn^2 and L.
double aoa_variance(const TurbulenceParams& t, double aperture_diameter_m, double range_m);

/// Fraction of time the wandering beam centroid falls outside a capture
/// radius a. The centroid is isotropic zero-mean Gaussian with per-axis
/// variance <r_c^2>/2, so the radial tail is P = exp(-a^2 / <r_c^2>).
double interruption_fraction(const TurbulenceParams& t, const BeamGeometry& b, double range_m,
                             double capture_radius_m);

/// Receiver-aperture to long-term-beam-diameter ratio, D / (2 W_LT).
/// Strictly decreasing in range for cn2 > 0; above 1 the received spot fits
/// inside the aperture.
double aperture_ratio(const TurbulenceParams& t, const BeamGeometry& b, double range_m,
                      double receiver_aperture_diameter_m);

struct BoundaryResult {
    double distance_m = 0.0;
    bool saturated = false; // ratio still above 1 at the search cap
};

/// Range L* where aperture_ratio(L*) = 1, bracketing + bisection to 1e-6
/// relative. Throws std::domain_error when the ratio is already <= 1 at
/// L = 0 (no receiver-compensation region). When the ratio stays above 1 up
/// to max_range_m the result is reported saturated at the cap.
BoundaryResult boundary_distance(const TurbulenceParams& t, const BeamGeometry& b,
                                 double receiver_aperture_diameter_m,
                                 double max_range_m = 50e3);

/// All statistics at one range; aoa uses the receiver aperture diameter.
TurbulenceStats evaluate(const TurbulenceParams& t, const BeamGeometry& b, double range_m,
                         double rx_aperture_diameter_m);

} // namespace fsqkd::turbulence
