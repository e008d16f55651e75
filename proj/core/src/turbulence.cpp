#include "fsqkd/turbulence.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fsqkd/errors.hpp"

namespace fsqkd::turbulence {

namespace {

void check_beam(const BeamGeometry& b) {
    check_positive(b.w0_m, "w0_m");
    check_positive(b.wavelength_m, "wavelength_m");
    if (!b.collimated) throw std::domain_error("only collimated launches are modeled");
}

void check_params(const TurbulenceParams& t) { check_nonnegative(t.cn2, "cn2"); }

} // namespace

double BeamGeometry::wavenumber() const { return 2.0 * std::numbers::pi / wavelength_m; }

double BeamGeometry::rayleigh_range_m() const {
    return std::numbers::pi * w0_m * w0_m / wavelength_m;
}

double rytov_variance(const TurbulenceParams& t, const BeamGeometry& b, double range_m) {
    check_params(t);
    check_positive(b.wavelength_m, "wavelength_m");
    check_nonnegative(range_m, "range_m");
    if (t.cn2 == 0.0 || range_m == 0.0) return 0.0;
    const double k = b.wavenumber();
    return 1.23 * t.cn2 * std::pow(k, 7.0 / 6.0) * std::pow(range_m, 11.0 / 6.0);
}

double diffraction_radius(const BeamGeometry& b, double range_m) {
    check_beam(b);
    check_nonnegative(range_m, "range_m");
    const double q = range_m / b.rayleigh_range_m();
    return b.w0_m * std::sqrt(1.0 + q * q);
}

double fresnel_ratio(const BeamGeometry& b, double range_m) {
    check_beam(b);
    check_nonnegative(range_m, "range_m");
    const double w = diffraction_radius(b, range_m);
    return 2.0 * range_m / (b.wavenumber() * w * w);
}

double long_term_radius(const TurbulenceParams& t, const BeamGeometry& b, double range_m) {
    const double w = diffraction_radius(b, range_m);
    const double sigma2 = rytov_variance(t, b, range_m);
    if (sigma2 == 0.0) return w;
    const double lam = fresnel_ratio(b, range_m);
    return w * std::sqrt(1.0 + 1.33 * sigma2 * std::pow(lam, 5.0 / 6.0));
}

double beam_wander_variance(const TurbulenceParams& t, const BeamGeometry& b, double range_m) {
    check_params(t);
    check_beam(b);
    check_nonnegative(range_m, "range_m");
    // L*L*L (not pow) so that doubling the range scales the result by exactly 8.
    return 2.42 * t.cn2 * (range_m * range_m * range_m) / std::cbrt(b.w0_m);
}

double aoa_variance(const TurbulenceParams& t, double aperture_diameter_m, double range_m) {
    check_params(t);
    check_positive(aperture_diameter_m, "aperture_diameter_m");
    check_nonnegative(range_m, "range_m");
    return 2.91 * t.cn2 * range_m / std::cbrt(aperture_diameter_m);
}

double interruption_fraction(const TurbulenceParams& t, const BeamGeometry& b, double range_m,
                             double capture_radius_m) {
    check_positive(capture_radius_m, "capture_radius_m");
    const double rc2 = beam_wander_variance(t, b, range_m);
    if (rc2 == 0.0) return 0.0;
    return std::exp(-capture_radius_m * capture_radius_m / rc2);
}

double aperture_ratio(const TurbulenceParams& t, const BeamGeometry& b, double range_m,
                      double receiver_aperture_diameter_m) {
    check_positive(receiver_aperture_diameter_m, "receiver_aperture_diameter_m");
    return receiver_aperture_diameter_m / (2.0 * long_term_radius(t, b, range_m));
}

BoundaryResult boundary_distance(const TurbulenceParams& t, const BeamGeometry& b,
                                 double receiver_aperture_diameter_m, double max_range_m) {
    check_positive(max_range_m, "max_range_m");
    const double at_launch = aperture_ratio(t, b, 0.0, receiver_aperture_diameter_m);
    if (at_launch <= 1.0) {
        throw std::domain_error(
            "no receiver-compensation region: aperture ratio <= 1 at zero range");
    }
    if (aperture_ratio(t, b, max_range_m, receiver_aperture_diameter_m) > 1.0) {
        return {max_range_m, true};
    }
    double lo = 0.0;
    double hi = max_range_m;
    while (hi - lo > 1e-6 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (aperture_ratio(t, b, mid, receiver_aperture_diameter_m) > 1.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {0.5 * (lo + hi), false};
}

TurbulenceStats evaluate(const TurbulenceParams& t, const BeamGeometry& b, double range_m,
                         double rx_aperture_diameter_m) {
    TurbulenceStats s;
    s.rytov_var = rytov_variance(t, b, range_m);
    s.w_diff_m = diffraction_radius(b, range_m);
    s.w_lt_m = long_term_radius(t, b, range_m);
    s.wander_var_m2 = beam_wander_variance(t, b, range_m);
    s.aoa_var_rad2 = aoa_variance(t, rx_aperture_diameter_m, range_m);
    s.lambda_param = fresnel_ratio(b, range_m);
    return s;
}

} // namespace fsqkd::turbulence
