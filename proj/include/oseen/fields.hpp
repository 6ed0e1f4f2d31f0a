#pragma once

#include "oseen/types.hpp"

#include <vector>

namespace oseen {

/// One term of a volume source f(y, sigma).
struct SourceTerm {
    enum class Kind { CompactBump, WakeDecaying };
    Kind kind = Kind::CompactBump;
    Vec3 amplitude{1.0, 0.0, 0.0};
    /// Compact bump: (1 - |y-c|^2/R0^2)^3 on B_R0(c).
    Vec3 center{0.0, 2.5, 0.0};
    double radius = 1.0;
    /// Temporal profile 30 s^2 (T0 - s)^2 / T0^5 on (0, T0), unit mass. Used by both kinds.
    double horizon = 1.0;
    /// Wake-decaying: (1+|y|^2)^{-A/2} nu(y)^{-B} for |y| > inner_radius.
    double A = 3.0;
    double B = 1.0;
    double inner_radius = 1.0;

    double temporal(double sigma) const;
    double spatial(const Point3& y) const;
    Vec3 eval(const Point3& y, double sigma) const { return amplitude * (spatial(y) * temporal(sigma)); }
    /// Radius beyond which the wake envelope drops below 1e-10 of the amplitude.
    double truncation_radius() const;
};

struct SourceField {
    std::vector<SourceTerm> terms;

    bool is_zero() const { return terms.empty(); }
    Vec3 eval(const Point3& y, double sigma) const;
    double horizon() const;
    static SourceField zero() { return {}; }
    static SourceField compact_bump(const Vec3& center, double radius, double horizon, const Vec3& amplitude);
    static SourceField wake_decaying(double A, double B, double horizon, const Vec3& amplitude,
                                     double inner_radius = 1.0);
    /// A + min(1,B) > 3 and A + B >= 7/2 for every wake term.
    bool decay_metadata_consistent() const;
    friend SourceField operator+(const SourceField& a, const SourceField& b);
};

/// One term of an initial velocity a(y).
struct InitialTerm {
    enum class Kind { CurlBump, AlgebraicDecay, VectorBump };
    Kind kind = Kind::CurlBump;
    /// CurlBump: curl(psi c) with psi = (1 - s^2)^4, s = |y - center| / radius; divergence free.
    /// VectorBump: c (1 - s^2)^3; nonzero mean, not divergence free.
    /// AlgebraicDecay: curl(psi c) with psi = (1 + |y|^2)^{-(1+2 kappa0)/2}, zero inside inner_radius.
    Vec3 direction{0.0, 0.0, 1.0};
    Vec3 center{0.0, 2.5, 0.0};
    double radius = 1.0;
    double kappa0 = 0.5;
    double inner_radius = 1.0;

    Vec3 eval(const Point3& y) const;
    bool compact() const { return kind != Kind::AlgebraicDecay; }
    double truncation_radius() const;
};

struct InitialField {
    std::vector<InitialTerm> terms;
    /// Integrability exponent declared for the data (1 for compact bumps).
    double p = 1.0;

    bool is_zero() const { return terms.empty(); }
    Vec3 eval(const Point3& y) const;
    /// Componentwise integral over R^3 (closed form for bump kinds).
    Vec3 mean() const;
    static InitialField zero() { return {}; }
    static InitialField curl_bump(const Vec3& center, double radius, const Vec3& direction);
    static InitialField vector_bump(const Vec3& center, double radius, const Vec3& direction);
    static InitialField algebraic(double kappa0, const Vec3& direction, double inner_radius = 1.0);
    friend InitialField operator+(const InitialField& a, const InitialField& b);
};

}  // namespace oseen
