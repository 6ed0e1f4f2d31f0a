#include "oseen/fields.hpp"

#include "oseen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oseen {

double SourceTerm::temporal(double sigma) const {
    if (!(sigma > 0.0) || !(sigma < horizon)) return 0.0;
    const double q = sigma * (horizon - sigma);
    return 30.0 * q * q / std::pow(horizon, 5);
}

double SourceTerm::spatial(const Point3& y) const {
    if (kind == Kind::CompactBump) {
        const double s2 = (y - center).squaredNorm() / (radius * radius);
        if (s2 >= 1.0) return 0.0;
        const double b = 1.0 - s2;
        return b * b * b;
    }
    const double r = y.norm();
    if (r <= inner_radius) return 0.0;
    return std::pow(1.0 + r * r, -0.5 * A) * std::pow(wake_weight(y), -B);
}

double SourceTerm::truncation_radius() const {
    if (kind == Kind::CompactBump) return center.norm() + radius;
    // downstream the envelope is (1+r^2)^{-A/2}
    return std::max(inner_radius * 2.0, std::pow(1e-10, -1.0 / A));
}

Vec3 SourceField::eval(const Point3& y, double sigma) const {
    Vec3 v = Vec3::Zero();
    for (const auto& t : terms) v += t.eval(y, sigma);
    return v;
}

double SourceField::horizon() const {
    double h = 0.0;
    for (const auto& t : terms) h = std::max(h, t.horizon);
    return h;
}

SourceField SourceField::compact_bump(const Vec3& center, double radius, double horizon, const Vec3& amplitude) {
    if (!(radius > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("compact_bump: radius and horizon must be positive");
    SourceTerm t;
    t.kind = SourceTerm::Kind::CompactBump;
    t.center = center;
    t.radius = radius;
    t.horizon = horizon;
    t.amplitude = amplitude;
    return SourceField{{t}};
}

SourceField SourceField::wake_decaying(double A, double B, double horizon, const Vec3& amplitude, double inner_radius) {
    if (!(horizon > 0.0) || !(inner_radius > 0.0)) throw std::invalid_argument("wake_decaying: bad horizon or radius");
    SourceTerm t;
    t.kind = SourceTerm::Kind::WakeDecaying;
    t.A = A;
    t.B = B;
    t.horizon = horizon;
    t.amplitude = amplitude;
    t.inner_radius = inner_radius;
    return SourceField{{t}};
}

bool SourceField::decay_metadata_consistent() const {
    for (const auto& t : terms) {
        if (t.kind != SourceTerm::Kind::WakeDecaying) continue;
        if (!(t.A + std::min(1.0, t.B) > 3.0) || !(t.A + t.B >= 3.5)) return false;
    }
    return true;
}

SourceField operator+(const SourceField& a, const SourceField& b) {
    SourceField s = a;
    s.terms.insert(s.terms.end(), b.terms.begin(), b.terms.end());
    return s;
}

Vec3 InitialTerm::eval(const Point3& y) const {
    switch (kind) {
        case Kind::CurlBump: {
            const Vec3 d = y - center;
            const double s2 = d.squaredNorm() / (radius * radius);
            if (s2 >= 1.0) return Vec3::Zero();
            const double b = 1.0 - s2;
            // grad psi = -8 (1-s^2)^3 d / R^2
            const Vec3 grad = (-8.0 * b * b * b / (radius * radius)) * d;
            return grad.cross(direction);
        }
        case Kind::VectorBump: {
            const double s2 = (y - center).squaredNorm() / (radius * radius);
            if (s2 >= 1.0) return Vec3::Zero();
            const double b = 1.0 - s2;
            return direction * (b * b * b);
        }
        case Kind::AlgebraicDecay: {
            const double r = y.norm();
            if (r <= inner_radius) return Vec3::Zero();
            const double m = 0.5 * (1.0 + 2.0 * kappa0);
            const Vec3 grad = (-2.0 * m * std::pow(1.0 + r * r, -m - 1.0)) * y;
            return grad.cross(direction);
        }
    }
    return Vec3::Zero();
}

double InitialTerm::truncation_radius() const {
    if (compact()) return center.norm() + radius;
    return std::pow(1e-10, -1.0 / (2.0 + 2.0 * kappa0));
}

Vec3 InitialField::eval(const Point3& y) const {
    Vec3 v = Vec3::Zero();
    for (const auto& t : terms) v += t.eval(y);
    return v;
}

Vec3 InitialField::mean() const {
    Vec3 m = Vec3::Zero();
    for (const auto& t : terms) {
        if (t.kind == InitialTerm::Kind::VectorBump)
            m += t.direction * (4.0 * std::numbers::pi * std::pow(t.radius, 3) * 16.0 / 315.0);
        // curl fields integrate to zero
    }
    return m;
}

InitialField InitialField::curl_bump(const Vec3& center, double radius, const Vec3& direction) {
    if (!(radius > 0.0)) throw std::invalid_argument("curl_bump: radius must be positive");
    InitialTerm t;
    t.kind = InitialTerm::Kind::CurlBump;
    t.center = center;
    t.radius = radius;
    t.direction = direction;
    return InitialField{{t}, 1.0};
}

InitialField InitialField::vector_bump(const Vec3& center, double radius, const Vec3& direction) {
    if (!(radius > 0.0)) throw std::invalid_argument("vector_bump: radius must be positive");
    InitialTerm t;
    t.kind = InitialTerm::Kind::VectorBump;
    t.center = center;
    t.radius = radius;
    t.direction = direction;
    return InitialField{{t}, 1.0};
}

InitialField InitialField::algebraic(double kappa0, const Vec3& direction, double inner_radius) {
    if (!(kappa0 > 0.0)) throw std::invalid_argument("algebraic: kappa0 must be positive");
    InitialTerm t;
    t.kind = InitialTerm::Kind::AlgebraicDecay;
    t.kappa0 = kappa0;
    t.direction = direction;
    t.inner_radius = inner_radius;
    InitialField f{{t}, 1.0};
    // |a| ~ |y|^{-2-2 kappa0} is in L^p for p > 3 / (2 + 2 kappa0)
    f.p = std::max(1.0, 3.0 / (2.0 + 2.0 * kappa0) + 0.01);
    return f;
}

InitialField operator+(const InitialField& a, const InitialField& b) {
    InitialField s = a;
    s.terms.insert(s.terms.end(), b.terms.begin(), b.terms.end());
    s.p = std::max(a.p, b.p);
    return s;
}

}  // namespace oseen
