#pragma once

#include "oseen/fields.hpp"
#include "oseen/geometry.hpp"
#include "oseen/surface_quadrature.hpp"
#include "oseen/types.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace oseen {

/// Nodal density on the boundary, piecewise constant on uniform time slabs
/// [k dt, (k+1) dt), P1 in space. values[k * N + i] is the value at node i in slab k.
struct SurfaceDensity {
    std::shared_ptr<const BoundaryMesh> mesh;
    double dt = 0.0;
    int slabs = 0;
    std::vector<Vec3> values;
    bool zero_flux = false;

    static SurfaceDensity zeros(std::shared_ptr<const BoundaryMesh> mesh, double dt, int slabs);

    std::size_t nodes() const { return mesh ? mesh->size() : 0; }
    double horizon() const { return dt * slabs; }
    Vec3& at(int slab, int node) { return values[static_cast<std::size_t>(slab) * nodes() + static_cast<std::size_t>(node)]; }
    const Vec3& at(int slab, int node) const {
        return values[static_cast<std::size_t>(slab) * nodes() + static_cast<std::size_t>(node)];
    }
    /// Net normal flux of slab k by node quadrature.
    double flux(int slab) const;
    double max_abs_flux() const;
    /// L2 norm over boundary x (t0, t1), slabs cut exactly at t0 and t1.
    double l2_norm(double t0, double t1) const;
    double l2_norm() const { return l2_norm(0.0, horizon()); }
    bool is_zero() const;

    SurfaceDensity& operator+=(const SurfaceDensity& o);
    SurfaceDensity& operator*=(double s);
};

/// Quadrature controls shared by all potential evaluations. level raises all point
/// counts; with check set, the value is recomputed at level + 1 and the relative
/// difference compared against tol.
struct QuadOptions {
    int level = 0;
    bool check = false;
    double tol = 0.01;
};

struct QuadDiagnostics {
    bool converged = true;
    double rel_diff = 0.0;
    bool near_boundary = false;
    int points = 0;
};

/// R(f)(x,t): space-time convolution of the Oseen kernel with the source.
/// The time derivative needs t past the source horizon.
Vec3 eval_volume_potential(const SourceField& f, const Point3& x, double t, double tau, const MultiIndex& d,
                           const QuadOptions& opts = {}, QuadDiagnostics* diag = nullptr);

/// I(a)(x,t): heat kernel centred at the drifted point x - tau t e1 applied to a.
Vec3 eval_initial_potential(const InitialField& a, const Point3& x, double t, double tau, const MultiIndex& d,
                            const QuadOptions& opts = {}, QuadDiagnostics* diag = nullptr);

/// V(phi)(x,t) at a point off the surface. Spatial derivatives and the time
/// derivative are supported; the time derivative telescopes over slab jumps.
Vec3 eval_single_layer(const SurfaceQuadrature& sq, const SurfaceDensity& phi, const Point3& x, double t, double tau,
                       const MultiIndex& d, QuadDiagnostics* diag = nullptr);
Vec3 eval_single_layer(const SurfaceDensity& phi, const Point3& x, double t, double tau, const MultiIndex& d,
                       QuadDiagnostics* diag = nullptr);

/// V(phi) at mesh node i (value only), with the polar rule on adjacent triangles.
Vec3 eval_single_layer_on_surface(const SurfaceQuadrature& sq, const SurfaceDensity& phi, int node, double t,
                                  double tau);

/// Windowed convolution of |d^alpha Lambda_jk| with |h|, maximised over targets.
struct ConvolutionProbe {
    double q = 1.0, s = 1.0, rho = 0.0;  ///< rho <= 0 means infinity
    int alpha_order = 0;
    bool window_upper = false;  ///< false: W = (0, M); true: W = (M, inf)
    double predicted_exponent = 0.0;
    double M0 = 0.0, M1 = 0.0;
    double value0 = 0.0, value1 = 0.0;
    double measured_exponent = 0.0;
    bool pass = false;
};

/// Exponent 1 - |alpha|/2 - 3/(2q) - 1/s + 1/rho of the convolution estimate.
double convolution_exponent(double q, double s, double rho, int alpha_order);

/// Measure the windowed norm at M and 2M (M_pair.second, when positive, overrides 2M).
/// The window is picked from the exponent sign; throws std::invalid_argument if
/// the hypotheses fail or if a requested window contradicts the sign.
ConvolutionProbe convolution_scaling_probe(double q, double s, double rho, int alpha_order,
                                           std::pair<double, double> M_pair, const SourceField& h, double tau = 1.0,
                                           int requested_window = -1, const QuadOptions& opts = {});

}  // namespace oseen
