#pragma once

#include "oseen/types.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace oseen {

/// Wake weight nu(x) = 1 + |x| - x1.
double wake_weight(const Point3& x);

/// Test obstacle. The unit sphere is the ellipsoid with unit semi-axes.
struct Shape {
    enum class Kind { UnitSphere, Ellipsoid };
    Kind kind = Kind::UnitSphere;
    double a = 1.0, b = 1.0, c = 1.0;

    static Shape unit_sphere() { return {}; }
    static Shape ellipsoid(double a, double b, double c);

    /// sqrt(sum x_i^2 / a_i^2); equals 1 on the surface.
    double gauge(const Vec3& p) const;
    Vec3 outward_normal(const Vec3& p) const;
    /// Radial projection onto the surface.
    Vec3 project(const Vec3& p) const;
    double enclosing_radius() const;
    std::string name() const;
};

/// Point on a curved mesh triangle with its area density relative to the
/// barycentric parameters (l1, l2) on the reference triangle of area 1/2.
struct SurfaceSample {
    Vec3 y;
    double jac;
};

struct BoundaryMesh {
    Shape shape;
    int level = 0;
    std::vector<Vec3> nodes;
    std::vector<Vec3> normals;
    std::vector<double> weights;
    std::vector<std::array<int, 3>> triangles;
    std::vector<double> triangle_area;
    std::vector<std::vector<int>> node_triangles;
    std::vector<std::vector<int>> neighbors;
    double h = 0.0;
    double enclosing_radius = 1.0;

    std::size_t size() const { return nodes.size(); }
    double area() const;
    /// Largest edge of triangle k.
    double triangle_diameter(int k) const;
    Vec3 triangle_centroid(int k) const;
    /// Map barycentric (l1, l2) of triangle k onto the surface.
    SurfaceSample map(int k, double l1, double l2) const;
};

/// Icosahedral subdivision projected to the shape; weights are one third of the
/// curved areas of the adjacent triangles.
BoundaryMesh build_boundary_mesh(const Shape& shape, int refinement_level);

/// Rebuild node-to-triangle and neighbor tables plus h from nodes and triangles.
void finalize_topology(BoundaryMesh& mesh);

/// Plain text mesh format: header line, node lines "x1 x2 x3 n1 n2 n3 w",
/// then triangle lines "i j k" and a triangle-area line per triangle.
void write_mesh(std::ostream& os, const BoundaryMesh& mesh);
BoundaryMesh read_mesh(std::istream& is);

struct InequalityEntry {
    std::string name;
    std::string tag;
    double sup_n = 0.0;
    double sup_2n = 0.0;
    bool diverged = false;
    std::string note;
};

struct InequalityReport {
    std::vector<InequalityEntry> entries;
    bool any_diverged() const;
    const InequalityEntry& find(const std::string& tag) const;
};

/// Surface integral of nu^-beta over the sphere of radius r, by Gauss quadrature in the polar angle.
double sphere_nu_integral(double r, double beta);

/// Integral of (|x| nu(x))^-beta over |x| > R.
double exterior_nu_integral(double R, double beta);

/// Empirical suprema of the wake-weight inequalities at n and 2n samples.
InequalityReport probe_nu_inequalities(int sample_count, std::uint64_t rng_seed);

}  // namespace oseen
