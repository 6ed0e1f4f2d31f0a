#include "oseen/solver.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace oseen {

std::vector<std::string> ProblemSpec::check() const {
    std::vector<std::string> v;
    if (!(tau > 0.0)) v.push_back("tau must be positive");
    if (!mesh) v.push_back("mesh missing");
    if (!(dt > 0.0)) v.push_back("dt must be positive");
    if (slabs < 1) v.push_back("slabs must be at least 1");
    if (!f.decay_metadata_consistent()) v.push_back("wake source needs A + min(1,B) > 3 and A + B >= 7/2");
    if (!(a.p >= 1.0)) v.push_back("initial data exponent p must be at least 1");
    if (b.trace) {
        if (mesh && b.trace->mesh && b.trace->mesh->size() != mesh->size()) v.push_back("boundary data mesh mismatch");
        if (!b.trace->times.empty() && b.trace->times.back() < horizon() - 1e-12)
            v.push_back("boundary data ends before the horizon");
        if (!(b.zeta > 0.0)) v.push_back("boundary tail rate zeta must be positive");
        if (b.delta < 0.0) v.push_back("boundary tail amplitude must be non-negative");
    }
    return v;
}

Eigen::VectorXd potential_traces(const VolterraSystem& sys, const SourceField& f, const InitialField& a,
                                 const QuadOptions& quad, int threads_) {
    const auto& m = *sys.mesh();
    const auto n = static_cast<int>(m.size());
    const Eigen::Index n3 = 3 * n;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n3 * sys.slabs());
    if (f.is_zero() && a.is_zero()) return out;
    const int total = n * sys.slabs();
    auto work = [&](int job) {
        const int k = job / n, i = job % n;
        const double t = sys.collocation_time(k);
        const Vec3& x = m.nodes[static_cast<std::size_t>(i)];
        Vec3 v = Vec3::Zero();
        if (!f.is_zero()) v += eval_volume_potential(f, x, t, sys.tau(), MultiIndex::value(), quad);
        if (!a.is_zero()) v += eval_initial_potential(a, x, t, sys.tau(), MultiIndex::value(), quad);
        out.segment<3>(k * n3 + 3 * i) = v;
    };
    const int threads = std::max(1, threads_);
    if (threads == 1) {
        for (int j = 0; j < total; ++j) work(j);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (int j = t; j < total; j += threads) work(j);
            });
        for (auto& th : pool) th.join();
    }
    return out;
}

SolutionHandle solve_ibvp(const ProblemSpec& spec, const VolterraSystem* prebuilt) {
    const auto errs = spec.check();
    if (!errs.empty()) {
        std::string msg = "solve_ibvp: invalid problem:";
        for (const auto& e : errs) msg += " " + e + ";";
        throw std::invalid_argument(msg);
    }
    std::optional<VolterraSystem> own;
    if (prebuilt) {
        if (prebuilt->mesh()->size() != spec.mesh->size() || prebuilt->slabs() != spec.slabs ||
            std::abs(prebuilt->dt() - spec.dt) > 1e-12 * spec.dt || prebuilt->tau() != spec.tau)
            throw std::invalid_argument("solve_ibvp: prebuilt system does not match the spec");
    } else {
        own.emplace(VolterraSystem::assemble(spec.mesh, spec.dt, spec.slabs, spec.tau, spec.volterra));
        prebuilt = &*own;
    }
    const VolterraSystem& sys = *prebuilt;

    SolutionHandle h;
    h.f = spec.f;
    h.a = spec.a;
    h.tau = spec.tau;
    h.quad = spec.quad;
    h.sq = std::make_shared<SurfaceQuadrature>(spec.mesh);

    Eigen::VectorXd rhs = -potential_traces(sys, spec.f, spec.a, spec.quad, spec.volterra.threads);
    if (spec.b.trace) {
        rhs += collocation_rhs(sys, *spec.b.trace);
        const auto& tr = *spec.b.trace;
        for (const auto& row : tr.values) h.b_flux = std::max(h.b_flux, std::abs(nodal_flux(*spec.mesh, row)));
    }
    h.phi = solve_density(sys, rhs, &h.report);
    return h;
}

Vec3 eval_velocity(const SolutionHandle& h, const Point3& x, double t, const MultiIndex& d, QuadDiagnostics* diag) {
    if (d.l != 0) throw std::invalid_argument("eval_velocity: time derivatives are not supported");
    if (!(t > 0.0) || t > h.t_max() * (1.0 + 1e-12)) throw std::out_of_range("eval_velocity: t outside the guard band");
    const auto& shape = h.phi.mesh->shape;
    if (shape.gauge(x) < 1.0 - 1e-9) throw std::invalid_argument("eval_velocity: point inside the obstacle");
    QuadDiagnostics dr, di, dv;
    Vec3 u = eval_single_layer(*h.sq, h.phi, x, t, h.tau, d, &dv);
    if (!h.f.is_zero()) u += eval_volume_potential(h.f, x, t, h.tau, d, h.quad, &dr);
    if (!h.a.is_zero()) u += eval_initial_potential(h.a, x, t, h.tau, d, h.quad, &di);
    if (diag) {
        diag->converged = dr.converged && di.converged && dv.converged;
        diag->rel_diff = std::max({dr.rel_diff, di.rel_diff, dv.rel_diff});
        diag->near_boundary = dv.near_boundary;
        diag->points = dr.points + di.points + dv.points;
    }
    return u;
}

void save_solution(const std::filesystem::path& dir, const SolutionHandle& h) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "density.txt");
        if (!os) throw std::runtime_error("save_solution: cannot write " + (dir / "density.txt").string());
        write_density(os, h.phi);
    }
    nlohmann::json j;
    j["tau"] = h.tau;
    j["dt"] = h.phi.dt;
    j["slabs"] = h.phi.slabs;
    j["nodes"] = h.phi.nodes();
    j["mesh_level"] = h.phi.mesh->level;
    j["shape"] = h.phi.mesh->shape.name();
    j["b_flux"] = h.b_flux;
    j["report"] = nlohmann::json::parse(h.report.to_json());
    std::ofstream os(dir / "solution.json");
    os << j.dump(2) << "\n";
}

SolutionHandle load_solution(const std::filesystem::path& dir, const ProblemSpec& spec) {
    std::ifstream js(dir / "solution.json");
    if (!js) throw std::runtime_error("load_solution: missing " + (dir / "solution.json").string());
    const auto j = nlohmann::json::parse(js);
    if (j.at("slabs").get<int>() != spec.slabs || std::abs(j.at("dt").get<double>() - spec.dt) > 1e-12 * spec.dt ||
        j.at("tau").get<double>() != spec.tau)
        throw std::runtime_error("load_solution: saved solution does not match the spec");
    std::ifstream ds(dir / "density.txt");
    if (!ds) throw std::runtime_error("load_solution: missing density checkpoint");
    SolutionHandle h;
    h.phi = read_density(ds, spec.mesh);
    h.f = spec.f;
    h.a = spec.a;
    h.tau = spec.tau;
    h.quad = spec.quad;
    h.b_flux = j.value("b_flux", 0.0);
    const auto& r = j.at("report");
    h.report.residual = r.at("residual").get<double>();
    h.report.rhs_flux_removed = r.at("rhs_flux_removed").get<double>();
    h.report.flux_violation = r.at("flux_violation").get<std::vector<double>>();
    h.report.multipliers = r.at("multipliers").get<std::vector<double>>();
    h.report.diagonal_condition = r.at("diagonal_condition").get<double>();
    h.sq = std::make_shared<SurfaceQuadrature>(spec.mesh);
    return h;
}

}  // namespace oseen
