#include "doctest.h"

#include "oseen/integral_equation.hpp"

#include <cmath>
#include <sstream>

using namespace oseen;

namespace {

struct Fixture {
    std::shared_ptr<const BoundaryMesh> mesh =
        std::make_shared<BoundaryMesh>(build_boundary_mesh(Shape::unit_sphere(), 1));
    VolterraSystem sys = VolterraSystem::assemble(mesh, 0.25, 6, 1.0);

    // smooth zero-flux density W(x) t^2 exp(-t) at slab midpoints
    SurfaceDensity smooth() const {
        auto phi = SurfaceDensity::zeros(mesh, sys.dt(), sys.slabs());
        for (int k = 0; k < phi.slabs; ++k) {
            const double t = (k + 0.5) * phi.dt;
            for (std::size_t i = 0; i < mesh->size(); ++i) {
                const Vec3 x = mesh->nodes[i], n = mesh->normals[i];
                const Vec3 w = Vec3(x(1), -x(0), 0) + 0.5 * (Vec3(1, 0, 0) - n(0) * n) + 0.3 * x(2) * n;
                phi.at(k, static_cast<int>(i)) = t * t * std::exp(-t) * w;
            }
        }
        project_zero_flux_inplace(phi);
        return phi;
    }
};

const Fixture& fx() {
    static const Fixture f;
    return f;
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("assembled system is well conditioned") {
    CHECK_FALSE(fx().sys.ill_conditioned());
    CHECK(fx().sys.diagonal_condition() < 1e6);
    CHECK(fx().sys.unknowns() == 3 * fx().mesh->size());
}

TEST_CASE("causality: a density in late slabs leaves early values untouched") {
    const auto& f = fx();
    auto phi = f.smooth();
    for (int k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < f.mesh->size(); ++i) phi.at(k, static_cast<int>(i)) = Vec3::Zero();
    const Eigen::VectorXd v = f.sys.apply(phi);
    const Eigen::Index n3 = static_cast<Eigen::Index>(f.sys.unknowns());
    CHECK(v.head(3 * n3).norm() == 0.0);
    CHECK(v.tail(3 * n3).norm() > 0.0);
}

TEST_CASE("time-shift symmetry of the Toeplitz blocks") {
    const auto& f = fx();
    const auto phi = f.smooth();
    auto shifted = SurfaceDensity::zeros(f.mesh, phi.dt, phi.slabs);
    for (int k = 1; k < phi.slabs; ++k)
        for (std::size_t i = 0; i < f.mesh->size(); ++i) shifted.at(k, static_cast<int>(i)) = phi.at(k - 1, static_cast<int>(i));
    const Eigen::VectorXd a = f.sys.apply(phi), b = f.sys.apply(shifted);
    const Eigen::Index n3 = static_cast<Eigen::Index>(f.sys.unknowns());
    CHECK(rel(b.segment(n3, 5 * n3), a.head(5 * n3)) < 1e-6);
}

TEST_CASE("system agrees with the on-surface single layer") {
    const auto& f = fx();
    const auto phi = f.smooth();
    const Eigen::VectorXd v = f.sys.apply(phi);
    const int N = static_cast<int>(f.mesh->size());
    Eigen::VectorXd w(v.size());
    for (int m = 0; m < f.sys.slabs(); ++m)
        for (int i = 0; i < N; ++i)
            w.segment<3>(3 * (static_cast<Eigen::Index>(m) * N + i)) =
                eval_single_layer_on_surface(f.sys.quadrature(), phi, i, f.sys.collocation_time(m), f.sys.tau());
    CHECK(rel(v, w) < 0.02);
}

TEST_CASE("zero data gives zero density; the solve is linear") {
    const auto& f = fx();
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(f.sys.unknowns()) * f.sys.slabs());
    DensitySolveReport rep;
    const auto phi0 = solve_density(f.sys, zero, &rep);
    CHECK(phi0.is_zero());
    CHECK(rep.residual == 0.0);

    const Eigen::VectorXd b = f.sys.apply(f.smooth());
    const auto p1 = solve_density(f.sys, b);
    const auto p2 = solve_density(f.sys, Eigen::VectorXd(2.0 * b));
    auto d = p2;
    d *= 0.5;
    auto diff = d;
    auto neg = p1;
    neg *= -1.0;
    diff += neg;
    CHECK(diff.l2_norm() < 1e-9 * p1.l2_norm());
}

TEST_CASE("discrete round trip recovers the density") {
    const auto& f = fx();
    const auto phi = f.smooth();
    DensitySolveReport rep;
    const auto got = solve_density(f.sys, f.sys.apply(phi), &rep);
    auto diff = got;
    auto neg = phi;
    neg *= -1.0;
    diff += neg;
    CHECK(diff.l2_norm() / phi.l2_norm() < 1e-4);
    CHECK(rep.residual < 1e-4);  // later lags are single precision
    CHECK(got.max_abs_flux() < 1e-10);
}

TEST_CASE("flux-incompatible data is projected and reported") {
    const auto& f = fx();
    BoundaryTrace b = BoundaryTrace::zeros(f.mesh, {0.0, 10.0});
    for (auto& s : b.values)
        for (std::size_t i = 0; i < f.mesh->size(); ++i) s[i] = f.mesh->normals[i];
    DensitySolveReport rep;
    solve_density(f.sys, b, &rep);
    CHECK(rep.rhs_flux_removed == doctest::Approx(std::sqrt(f.mesh->area())).epsilon(1e-6));
}

TEST_CASE("fine-grid trace reproduces the system at collocation times") {
    const auto& f = fx();
    const auto phi = f.smooth();
    std::vector<double> times;
    for (int m = 0; m < f.sys.slabs(); ++m) times.push_back(f.sys.collocation_time(m));
    const Eigen::VectorXd a = single_layer_trace(f.sys.quadrature(), phi, times, f.sys.tau());
    CHECK(rel(a, f.sys.apply(phi)) < 1e-5);
}

TEST_CASE("trace consistency: zero density and argument checks") {
    const auto& f = fx();
    const auto zero = SurfaceDensity::zeros(f.mesh, 0.25, 6);
    const auto tc = trace_consistency(f.sys.quadrature(), zero, {0.8, 0.6, 0.4}, 1.0, 1.0);
    CHECK(tc.extrapolated_mismatch == 0.0);
    CHECK_THROWS(trace_consistency(f.sys.quadrature(), zero, {0.4, 0.6}, 1.0, 1.0));
    CHECK_THROWS(trace_consistency(f.sys.quadrature(), zero, {0.4, 0.01}, 1.0, 1.0));
}

TEST_CASE("trace consistency approaches the surface value") {
    const auto& f = fx();
    const auto phi = f.smooth();
    const auto tc = trace_consistency(f.sys.quadrature(), phi, {1.2, 0.9, 0.6}, 1.0, 1.0, {0, 5, 10, 20, 30});
    REQUIRE(tc.mismatch.size() == 3);
    CHECK(tc.mismatch[0] > tc.mismatch[2]);
    CHECK(tc.extrapolated_mismatch < tc.mismatch[0]);
}

TEST_CASE("density tail fit: zero case and a known power law") {
    const auto& f = fx();
    const auto zero = SurfaceDensity::zeros(f.mesh, 0.5, 100);
    const auto fz = density_tail_fit(zero, {1, 2, 4, 8}, 0.5);
    CHECK(fz.rejected);
    CHECK(fz.note == "zero density");

    // |phi| = (1+t)^-1.5 gives ||phi on (T, 40)||^2 ~ (1+T)^-2, slope -1
    auto phi = SurfaceDensity::zeros(f.mesh, 0.05, 1000);
    for (int k = 0; k < phi.slabs; ++k)
        for (std::size_t i = 0; i < f.mesh->size(); ++i)
            phi.at(k, static_cast<int>(i)) = std::pow(1.0 + (k + 0.5) * phi.dt, -1.5) * Vec3(0, 0, 1);
    std::vector<double> norms;
    const auto fit = density_tail_fit(phi, {1, 1.5, 2, 3, 4, 6}, 0.9, 0.2, 0.2, &norms);
    CHECK(norms.size() == 6);
    CHECK(fit.slope == doctest::Approx(-1.0).epsilon(0.1));
    CHECK(fit.pass);
}

TEST_CASE("density checkpoint round trip") {
    const auto& f = fx();
    const auto phi = f.smooth();
    std::stringstream ss;
    write_density(ss, phi);
    const auto r = read_density(ss, f.mesh);
    CHECK(r.slabs == phi.slabs);
    CHECK(r.dt == phi.dt);
    CHECK(r.zero_flux == phi.zero_flux);
    for (std::size_t k = 0; k < phi.values.size(); ++k) CHECK(r.values[k] == phi.values[k]);
    std::stringstream bad("oseen-density 1 0.25 6 999 1\n");
    CHECK_THROWS(read_density(bad, f.mesh));
}
