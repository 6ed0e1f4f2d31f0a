#include "doctest.h"

#include "oseen/boundary_space.hpp"

#include <cmath>

using namespace oseen;

namespace {
std::shared_ptr<const BoundaryMesh> sphere(int level) {
    return std::make_shared<BoundaryMesh>(build_boundary_mesh(Shape::unit_sphere(), level));
}
}  // namespace

TEST_CASE("Abel half derivative of 1 and of r") {
    std::vector<double> ts;
    for (double t = 0.0; t <= 100.0001; t += 0.05) ts.push_back(t);
    std::vector<double> one(ts.size(), 1.0), zero(ts.size(), 0.0), lin = ts;
    for (double t : {1.0, 7.3, 50.0, 100.0}) {
        // W(t) = 2 sqrt t and (4/3) t^(3/2)
        CHECK(abel_derivative(ts, one, zero, 0.5 * t, t) == doctest::Approx(1.0 / std::sqrt(t)).epsilon(1e-3));
        CHECK(abel_derivative(ts, lin, one, 0.5 * t, t) == doctest::Approx(2.0 * std::sqrt(t)).epsilon(1e-3));
        CHECK(abel_derivative(ts, lin, one, 0.9 * t, t) == doctest::Approx(2.0 * std::sqrt(t)).epsilon(1e-3));
    }
}

TEST_CASE("trace interpolation and validation") {
    const auto m = sphere(0);
    auto tr = BoundaryTrace::zeros(m, {0.0, 1.0, 2.0});
    tr.values[1][3] = Vec3(2, 0, 0);
    CHECK(tr.value_at(3, 0.5)(0) == doctest::Approx(1.0));
    CHECK(tr.value_at(3, 1.5)(0) == doctest::Approx(1.0));
    CHECK(tr.value_at(3, -1.0)(0) == doctest::Approx(0.0));
    tr.validate();
    CHECK_THROWS(BoundaryTrace::zeros(m, {0.0, 2.0, 1.0}));
    tr.values.pop_back();
    CHECK_THROWS(tr.validate());
}

TEST_CASE("H1 norm of x1 on the unit sphere") {
    const auto m = sphere(3);
    std::vector<double> v;
    std::vector<Vec3> g;
    for (const auto& x : m->nodes) {
        v.push_back(x(0));
        g.push_back(Vec3(1, 0, 0));
    }
    // 4 pi / 3 + 8 pi / 3
    CHECK(h1_boundary_norm(*m, v, &g) == doctest::Approx(std::sqrt(4.0 * M_PI)).epsilon(0.01));
    CHECK(h1_boundary_norm(*m, v) == doctest::Approx(std::sqrt(4.0 * M_PI)).epsilon(0.01));
}

TEST_CASE("tangential gradient of a linear field") {
    const auto m = sphere(3);
    std::vector<Vec3> v;
    for (const auto& x : m->nodes) v.push_back(Vec3(x(1), 0, 0));
    const auto g = fem_tangential_gradient(*m, v);
    double worst = 0.0;
    for (std::size_t i = 0; i < m->size(); ++i) {
        const Vec3 n = m->normals[i];
        const Vec3 exact = Vec3(0, 1, 0) - n(1) * n;
        worst = std::max(worst, (g[i].row(0).transpose() - exact).norm());
    }
    CHECK(worst < 0.05);
}

TEST_CASE("dual norm of a constant load") {
    const auto m = sphere(2);
    std::vector<Vec3> c(m->size(), Vec3(0, 0, 2.0));
    CHECK(h1_dual_norm(m, c) == doctest::Approx(2.0 * std::sqrt(4.0 * M_PI)).epsilon(0.01));
    const auto r = RieszMap::for_mesh(m);
    CHECK(r.get() == RieszMap::for_mesh(m).get());
    CHECK(r->condition_estimate() >= 1.0);
}

TEST_CASE("zero-flux projection") {
    const auto m = sphere(1);
    auto phi = SurfaceDensity::zeros(m, 0.5, 3);
    for (int k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < m->size(); ++i)
            phi.at(k, static_cast<int>(i)) = (k + 1.0) * m->normals[i] + Vec3(m->nodes[i](1), 0, 0);
    CHECK(phi.max_abs_flux() > 1.0);
    const double removed = project_zero_flux_inplace(phi);
    // c_k = k + 1 per slab of length 1/2
    CHECK(removed == doctest::Approx(std::sqrt(7.0 * m->area())).epsilon(1e-3));
    CHECK(phi.max_abs_flux() < 1e-12);
    CHECK(project_zero_flux_inplace(phi) < 1e-12);
    CHECK(phi.zero_flux);
}

TEST_CASE("density L2 norm cuts slabs exactly") {
    const auto m = sphere(1);
    auto phi = SurfaceDensity::zeros(m, 1.0, 4);
    for (auto& v : phi.values) v = Vec3(1, 0, 0);
    CHECK(phi.l2_norm() == doctest::Approx(std::sqrt(4.0 * m->area())));
    CHECK(phi.l2_norm(0.5, 2.0) == doctest::Approx(std::sqrt(1.5 * m->area())));
}

TEST_CASE("H-tail norm of zero data and of decaying data") {
    const auto m = sphere(1);
    std::vector<double> times;
    for (double t = 0.0; t <= 64.0; t += 0.25) times.push_back(t);
    auto zero = BoundaryTrace::zeros(m, times);
    zero.dvalues = zero.values;
    const auto hz = h_tail_norm(zero, 4.0);
    CHECK(hz.total == 0.0);

    // rotation field (x2, -x1, 0) times (1+t)^-2: tangential, zero flux
    auto tr = BoundaryTrace::zeros(m, times);
    tr.dvalues = tr.values;
    for (std::size_t k = 0; k < times.size(); ++k)
        for (std::size_t i = 0; i < m->size(); ++i) {
            const Vec3 w(m->nodes[i](1), -m->nodes[i](0), 0);
            tr.values[k][i] = std::pow(1.0 + times[k], -2.0) * w;
            tr.dvalues[k][i] = -2.0 * std::pow(1.0 + times[k], -3.0) * w;
        }
    TailOptions o;
    const auto a = h_tail_norm(tr, 4.0, o), b = h_tail_norm(tr, 8.0, o);
    CHECK(a.total > b.total);
    CHECK(b.total > 0.0);
    CHECK(std::isfinite(a.total));
}

TEST_CASE("nodal flux of the outward normal is the area") {
    const auto m = sphere(2);
    CHECK(nodal_flux(*m, m->normals) == doctest::Approx(m->area()));
}
