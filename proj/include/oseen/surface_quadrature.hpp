#pragma once

#include "oseen/geometry.hpp"
#include "oseen/types.hpp"

#include <array>
#include <memory>
#include <vector>

namespace oseen {

/// Time treatment of the Oseen kernel inside a surface integral: either the
/// integral over u in (u0, u1) or the pointwise value at u.
struct TimeKernel {
    enum class Mode { Slab, Pointwise };
    Mode mode = Mode::Slab;
    double u0 = 0.0;
    double u1 = 0.0;
    double tau = 0.0;
    int axis = -1;  ///< -1 for the value, else d/dz_axis

    static TimeKernel slab(double u0, double u1, double tau, int axis = -1);
    static TimeKernel pointwise(double u, double tau, int axis = -1);

    Mat3 operator()(const Vec3& z) const;
    /// Length scale of the heat part: sqrt of the smallest (or only) time.
    double scale() const;
    /// Slab integrals starting at u = 0 behave like 1/|z| at the diagonal.
    bool singular() const { return mode == Mode::Slab && u0 == 0.0; }
};

/// Surface quadrature for P1 nodal densities on a BoundaryMesh: vertex rule in
/// the far field, subdivided degree-5 triangle rules nearby, and a polar (Duffy)
/// rule on triangles touching an on-surface target.
class SurfaceQuadrature {
public:
    explicit SurfaceQuadrature(std::shared_ptr<const BoundaryMesh> mesh);

    const BoundaryMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const BoundaryMesh> mesh_ptr() const { return mesh_; }

    /// row[j] += scale * int K(x_i - y) lambda_j(y) do_y for the mesh node x_i.
    void add_row_on_surface(int i, const TimeKernel& k, std::vector<Mat3>& row, double scale = 1.0) const;
    /// Same for a target off the surface.
    void add_row_off_surface(const Point3& x, const TimeKernel& k, std::vector<Mat3>& row,
                             double scale = 1.0) const;
    /// Lower estimate of the distance from x to the surface.
    double distance_to_surface(const Point3& x) const;

    struct Rule {
        std::vector<Vec3> y;
        std::vector<double> w;
        std::vector<std::array<double, 3>> bary;
    };
    /// Degree-5 rule on triangle k split into m^2 subtriangles.
    Rule triangle_rule(int k, int m) const;
    Rule duffy_rule(int k, int local_vertex, int n) const;

private:
    void add_row(const Point3& x, int node, const TimeKernel& k, std::vector<Mat3>& row, double scale,
                 double dsurf) const;
    const Rule& cached(int k, int m) const;

    std::shared_ptr<const BoundaryMesh> mesh_;
    std::vector<double> diam_;
    std::vector<Vec3> centroid_;
    std::vector<Rule> rule1_, rule2_, rule4_;
    std::vector<Rule> duffy_;  // 3 per triangle
};

}  // namespace oseen
