#pragma once

#include "oseen/geometry.hpp"
#include "oseen/types.hpp"

#include <array>
#include <cstdint>

namespace oseen {

/// Heat kernel (4 pi t)^{-3/2} exp(-|z|^2 / 4t) or one first derivative of it.
double heat_kernel(const Point3& z, double t, const MultiIndex& d);

/// Radial coefficients of Gamma(z,t) = delta (h + f) + g z z^T and of its
/// z-derivatives; w multiplies z_i z_j z_k in the gradient.
struct StokesCoefficients {
    double a;  ///< 1 / (2 sqrt t)
    double h;  ///< heat kernel value
    double f;
    double g;
    double w;
};
StokesCoefficients stokes_coefficients(double r, double t);

/// Value, spatial gradient and time derivative of Gamma at one point.
/// grad[i] holds d Gamma / d z_i.
struct StokesJet {
    Mat3 value;
    std::array<Mat3, 3> grad;
    Mat3 dt;
};
StokesJet stokes_jet(const Point3& z, double t);

/// Velocity part of the unsteady Stokes fundamental solution, or one first derivative.
/// Symmetric bitwise.
Mat3 stokes_kernel(const Point3& z, double t, const MultiIndex& d);

/// Oseen fundamental solution Lambda(z,t,tau) = Gamma(z - t tau e1, t); the time
/// derivative picks up -tau d1 Gamma from the chain rule.
Mat3 oseen_kernel(const Point3& z, double t, double tau, const MultiIndex& d);

/// Integral of Gamma(z,u) over u in (0, U), closed form; z must be nonzero.
/// Behaves like the steady Stokeslet for |z| << sqrt(U).
Mat3 stokes_time_integral(const Point3& z, double U);

/// Integral of Lambda(z,u,tau) (value) over u in (u0, u1). For u0 = 0 the
/// unshifted part uses the closed form and the drift correction is integrated on
/// panels graded toward u = 0; otherwise Gauss panels are graded toward u0.
Mat3 oseen_time_integral(const Point3& z, double u0, double u1, double tau);

/// Same for a spatial derivative d/dz_i or the value (axis = -1), by graded Gauss panels.
/// Requires z != 0 when u0 = 0.
Mat3 oseen_time_integral_numeric(const Point3& z, double u0, double u1, double tau, int axis);

/// Empirical suprema of |d Lambda| / [(gamma_K(z) + t)^{-3/2-|alpha|/2-l} + delta_l1 (gamma_K(z)+t)^{-2}],
/// split into |z| <= K and |z| > K, at n and 2n samples.
InequalityReport kernel_bound_report(double tau, double K, int sample_count, std::uint64_t seed = 1);

}  // namespace oseen
