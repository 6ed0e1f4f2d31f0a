#include "doctest.h"

#include "oseen/geometry.hpp"

#include <cmath>
#include <sstream>

using namespace oseen;

TEST_CASE("wake weight on the axis") {
    CHECK(wake_weight(Vec3(7, 0, 0)) == doctest::Approx(1.0));
    CHECK(wake_weight(Vec3(-7, 0, 0)) == doctest::Approx(15.0));
    CHECK(wake_weight(Vec3(0, 3, 4)) == doctest::Approx(6.0));
}

TEST_CASE("sphere mesh: weights, normals, node counts") {
    const int expected[] = {12, 42, 162, 642};
    for (int level = 0; level <= 3; ++level) {
        const auto m = build_boundary_mesh(Shape::unit_sphere(), level);
        CHECK(m.size() == static_cast<std::size_t>(expected[level]));
        double w = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            w += m.weights[i];
            CHECK(m.nodes[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(m.normals[i].dot(m.nodes[i]) == doctest::Approx(1.0).epsilon(1e-12));
        }
        if (level == 3) CHECK(std::abs(w / (4.0 * M_PI) - 1.0) < 1e-4);
        CHECK(m.area() == doctest::Approx(w).epsilon(1e-12));
    }
}

TEST_CASE("mesh size halves per level") {
    double prev = build_boundary_mesh(Shape::unit_sphere(), 1).h;
    for (int level = 2; level <= 3; ++level) {
        const double h = build_boundary_mesh(Shape::unit_sphere(), level).h;
        CHECK(h / prev == doctest::Approx(0.5).epsilon(0.1));
        prev = h;
    }
}

TEST_CASE("prolate spheroid area") {
    // a = b = 1, c = 2: A = 2 pi (1 + c asin(e) / e), e^2 = 1 - 1/c^2
    const double c = 2.0, e = std::sqrt(1.0 - 1.0 / (c * c));
    const double exact = 2.0 * M_PI * (1.0 + c * std::asin(e) / e);
    const auto m = build_boundary_mesh(Shape::ellipsoid(1.0, 1.0, c), 3);
    CHECK(m.area() == doctest::Approx(exact).epsilon(2e-3));
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(m.shape.gauge(m.nodes[i]) == doctest::Approx(1.0));
}

TEST_CASE("mesh text round trip") {
    const auto m = build_boundary_mesh(Shape::ellipsoid(1.0, 1.5, 0.8), 1);
    std::stringstream ss;
    write_mesh(ss, m);
    const auto r = read_mesh(ss);
    REQUIRE(r.size() == m.size());
    REQUIRE(r.triangles.size() == m.triangles.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK((r.nodes[i] - m.nodes[i]).norm() < 1e-14);
        CHECK(r.weights[i] == doctest::Approx(m.weights[i]).epsilon(1e-14));
    }
    CHECK(r.h == doctest::Approx(m.h));
}

TEST_CASE("bad shapes and levels are rejected") {
    CHECK_THROWS(Shape::ellipsoid(-1.0, 1.0, 1.0));
    CHECK_THROWS(build_boundary_mesh(Shape::unit_sphere(), -1));
}

TEST_CASE("surface integral of nu^-beta on a sphere") {
    // 2 pi r int_1^{1+2r} v^-beta dv
    for (double r : {1.0, 10.0, 20.0}) {
        const double exact2 = 2.0 * M_PI * r * (1.0 - 1.0 / (1.0 + 2.0 * r));
        CHECK(sphere_nu_integral(r, 2.0) == doctest::Approx(exact2).epsilon(1e-6));
        const double exact3 = M_PI * r * (1.0 - 1.0 / ((1.0 + 2.0 * r) * (1.0 + 2.0 * r)));
        CHECK(sphere_nu_integral(r, 3.0) == doctest::Approx(exact3).epsilon(1e-6));
    }
    // bounded ratio integral / r as r doubles
    CHECK(sphere_nu_integral(20.0, 2.0) / 20.0 < 1.05 * sphere_nu_integral(10.0, 2.0) / 10.0 + 1e-12);
}

TEST_CASE("exterior integral of (|x| nu)^-3 scales like R^-1") {
    const double r = exterior_nu_integral(20.0, 3.0) / exterior_nu_integral(10.0, 3.0);
    CHECK(r == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("wake-weight inequalities stay bounded under sample doubling") {
    const auto rep = probe_nu_inequalities(2000, 7);
    CHECK_FALSE(rep.entries.empty());
    CHECK_FALSE(rep.any_diverged());
}
