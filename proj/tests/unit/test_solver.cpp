#include "doctest.h"

#include "oseen/solver.hpp"

#include <cmath>
#include <filesystem>

using namespace oseen;

namespace {

ProblemSpec small_spec() {
    ProblemSpec s;
    s.tau = 1.0;
    s.mesh = std::make_shared<BoundaryMesh>(build_boundary_mesh(Shape::unit_sphere(), 1));
    s.dt = 0.25;
    s.slabs = 8;
    return s;
}

}  // namespace

TEST_CASE("spec checks") {
    auto s = small_spec();
    CHECK(s.check().empty());
    s.dt = -1.0;
    s.tau = 0.0;
    CHECK(s.check().size() == 2);
    CHECK_THROWS(solve_ibvp(s));
}

TEST_CASE("zero data gives the zero solution") {
    const auto h = solve_ibvp(small_spec());
    CHECK(h.phi.is_zero());
    CHECK(eval_velocity(h, Vec3(0, 3, 0), 1.0).norm() == 0.0);
}

TEST_CASE("b equal to the trace of I(a) cancels the density") {
    auto s = small_spec();
    s.a = InitialField::curl_bump(Vec3(0, 2.5, 0), 1.0, Vec3(0, 0, 1));
    std::vector<double> times;
    for (int k = 0; k <= 4 * s.slabs; ++k) times.push_back(0.25 * k * s.dt);
    auto tr = BoundaryTrace::zeros(s.mesh, times);
    for (std::size_t k = 0; k < times.size(); ++k)
        for (std::size_t i = 0; i < s.mesh->size(); ++i)
            tr.values[k][i] = k == 0 ? s.a.eval(s.mesh->nodes[i])
                                     : eval_initial_potential(s.a, s.mesh->nodes[i], times[k], s.tau, MultiIndex::value());
    s.b.trace = tr;
    const auto h = solve_ibvp(s);

    // density scale for comparison: the solve of the I(a) trace alone
    auto only = small_spec();
    only.b.trace = tr;
    const auto ref = solve_ibvp(only);
    CHECK(ref.phi.l2_norm() > 0.0);
    CHECK(h.phi.l2_norm() < 0.02 * ref.phi.l2_norm());

    const Vec3 x(1.0, 2.0, 0.5);
    const Vec3 u = eval_velocity(h, x, 1.0);
    const Vec3 i = eval_initial_potential(s.a, x, 1.0, s.tau, MultiIndex::value());
    CHECK((u - i).norm() < 0.05 * i.norm());
}

TEST_CASE("velocity evaluation guards") {
    auto s = small_spec();
    s.f = SourceField::compact_bump(Vec3(0, 2.5, 0), 1.0, 1.0, Vec3(1, 0, 0));
    const auto h = solve_ibvp(s);
    CHECK(h.report.residual < 1e-3);
    CHECK_THROWS(eval_velocity(h, Vec3(0.2, 0, 0), 1.0));
    CHECK_THROWS(eval_velocity(h, Vec3(0, 3, 0), h.t_max() + 0.1));
    CHECK_THROWS(eval_velocity(h, Vec3(0, 3, 0), 1.0, MultiIndex::dt()));
    CHECK(eval_velocity(h, Vec3(0, 3, 0), 1.0).norm() > 0.0);

    // the velocity is divergence free away from the obstacle
    const Vec3 x(2.0, 1.5, 0.4);
    double div = 0.0, scale = 0.0;
    for (int ax = 0; ax < 3; ++ax) {
        const Vec3 g = eval_velocity(h, x, 1.5, MultiIndex::dx(ax));
        div += g(ax);
        scale = std::max(scale, g.cwiseAbs().maxCoeff());
    }
    CHECK(std::abs(div) < 1e-2 * scale);
}

TEST_CASE("saved solutions reload") {
    auto s = small_spec();
    s.f = SourceField::compact_bump(Vec3(0, 2.5, 0), 1.0, 1.0, Vec3(1, 0, 0));
    const auto h = solve_ibvp(s);
    const auto dir = std::filesystem::temp_directory_path() / "oseen_unit_solution";
    std::filesystem::remove_all(dir);
    save_solution(dir, h);
    const auto r = load_solution(dir, s);
    CHECK(r.phi.values == h.phi.values);
    CHECK(r.report.residual == h.report.residual);
    const Vec3 x(0, 4, 0);
    CHECK(eval_velocity(r, x, 1.0) == eval_velocity(h, x, 1.0));
    auto other = s;
    other.slabs = 5;
    CHECK_THROWS(load_solution(dir, other));
    std::filesystem::remove_all(dir);
}
