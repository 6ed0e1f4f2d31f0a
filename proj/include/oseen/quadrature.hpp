#pragma once

#include <array>
#include <vector>

namespace oseen::quad {

struct Rule1D {
    std::vector<double> x;
    std::vector<double> w;
};

/// Gauss-Legendre rule with n points on [-1, 1]. Cached per n.
const Rule1D& gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
Rule1D gauss_on(double a, double b, int n);

/// Append an n-point Gauss rule on [a, b] to out.
void append_gauss(Rule1D& out, double a, double b, int n);

/// Composite rule on [a, b] with panels shrinking geometrically (ratio 1/2) toward a.
/// The innermost panel is [a, a + min_width]; every panel gets n points.
Rule1D graded_toward_left(double a, double b, double min_width, int n);

/// Symmetric triangle rule on the reference triangle, barycentric coordinates plus
/// weights summing to 1 (degree 5, 7 points).
struct TriPoint {
    double l0, l1, l2;
    double w;
};
const std::array<TriPoint, 7>& triangle_rule7();

}  // namespace oseen::quad
