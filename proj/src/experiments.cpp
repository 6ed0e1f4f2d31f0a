#include "oseen/experiments.hpp"

#include "oseen/checks.hpp"
#include "oseen/decay_lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace oseen {

namespace fs = std::filesystem;
using nlohmann::json;

json to_json(const SummaryRow& r) {
    return json{{"experiment", r.experiment}, {"tag", r.tag},           {"quantity", r.quantity},
                {"predicted", r.predicted},   {"measured", r.measured}, {"tolerance", r.tolerance},
                {"pass", r.pass},             {"note", r.note}};
}

SummaryRow row_from_json(const json& j) {
    SummaryRow r;
    r.experiment = j.at("experiment").get<std::string>();
    r.tag = j.at("tag").get<std::string>();
    r.quantity = j.at("quantity").get<std::string>();
    // non-finite values are written as null
    r.predicted = j.at("predicted").is_number() ? j["predicted"].get<double>() : NAN;
    r.measured = j.at("measured").is_number() ? j["measured"].get<double>() : NAN;
    r.tolerance = j.at("tolerance").is_number() ? j["tolerance"].get<double>() : NAN;
    r.pass = j.at("pass").get<bool>();
    r.note = j.value("note", "");
    return r;
}

ProblemSpec make_problem(const RunConfig& cfg) {
    const auto& p = cfg.problem;
    ProblemSpec s;
    s.tau = p.tau;
    s.f = p.source;
    s.a = p.initial;
    s.mesh = std::make_shared<BoundaryMesh>(build_boundary_mesh(p.shape, p.mesh_level));
    s.dt = p.dt;
    s.slabs = p.slabs;
    s.quad.tol = cfg.tol.quadrature;
    s.volterra.threads = p.threads;
    if (p.boundary.kind != BoundarySpec::Kind::Zero) {
        std::vector<double> times;
        for (int k = 0; k <= 4 * p.slabs; ++k) times.push_back(0.25 * k * p.dt);
        auto tr = BoundaryTrace::zeros(s.mesh, times);
        tr.dvalues = tr.values;
        const bool sphere = p.shape.kind == Shape::Kind::UnitSphere;
        if (sphere) tr.grads.assign(times.size(), std::vector<Mat3>(s.mesh->size(), Mat3::Zero()));
        for (std::size_t k = 0; k < times.size(); ++k)
            for (std::size_t i = 0; i < s.mesh->size(); ++i) {
                const Vec3 w = BoundarySpec::pattern(s.mesh->nodes[i], s.mesh->normals[i]);
                tr.values[k][i] = p.boundary.profile(times[k]) * w;
                tr.dvalues[k][i] = p.boundary.dprofile(times[k]) * w;
                if (sphere) tr.grads[k][i] = p.boundary.profile(times[k]) * BoundarySpec::pattern_gradient(s.mesh->normals[i]);
            }
        tr.provenance = p.boundary.kind == BoundarySpec::Kind::Rotation ? "rotation" : "tail";
        s.b.trace = std::move(tr);
        s.b.zeta = p.boundary.kind == BoundarySpec::Kind::Tail ? p.boundary.zeta : 1.0;
        s.b.delta = p.boundary.delta;
    }
    return s;
}

namespace {

struct RunContext {
    const RunConfig& cfg;
    std::ostream& log;
    std::mutex log_mutex;
    std::mutex solve_mutex;
    std::optional<ProblemSpec> spec;
    std::optional<SolutionHandle> handle;

    void say(const std::string& s) {
        std::lock_guard<std::mutex> g(log_mutex);
        log << s << "\n";
        log.flush();
    }

    const ProblemSpec& problem() {
        std::lock_guard<std::mutex> g(solve_mutex);
        if (!spec) spec = make_problem(cfg);
        return *spec;
    }

    /// Solve once per run; reload a saved solution under dir when resume is set.
    const SolutionHandle& solution(const fs::path& dir, bool resume) {
        const ProblemSpec& sp = problem();
        std::lock_guard<std::mutex> g(solve_mutex);
        if (handle) return *handle;
        const fs::path sol = dir / "solution";
        if (resume && fs::exists(sol / "density.txt")) {
            try {
                handle = load_solution(sol, sp);
                say("  reloaded density from " + sol.string());
                return *handle;
            } catch (const std::exception& e) {
                say(std::string("  saved solution unusable (") + e.what() + "), solving");
            }
        }
        handle = solve_ibvp(sp);
        save_solution(sol, *handle);
        return *handle;
    }
};

SummaryRow row(const std::string& exp, const std::string& tag, const std::string& q, double pred, double meas,
               double tol, bool pass, std::string note = {}) {
    return {exp, tag, q, pred, meas, tol, pass, std::move(note)};
}

std::vector<SummaryRow> rows_from_checks(const std::string& exp, const std::vector<CheckRow>& checks) {
    std::vector<SummaryRow> out;
    for (const auto& c : checks)
        out.push_back(row(exp, c.tag, c.name, c.predicted, c.measured, c.tolerance, c.pass,
                          c.upper_bound ? "upper bound" : "equality"));
    return out;
}

void write_samples(const fs::path& dir, const DecayMeasurement& m) {
    std::ofstream os(dir / "samples.csv");
    os << m.x_label << ",value\n";
    char buf[96];
    for (std::size_t i = 0; i < m.x.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", m.x[i], m.y[i]);
        os << buf;
    }
    json f{{"slope", m.fit.slope},
           {"intercept", m.fit.intercept},
           {"r2", m.fit.r2},
           {"window", {m.fit.window_begin, m.fit.window_end}},
           {"x_range", {m.fit.x_min, m.fit.x_max}},
           {"predicted_exponent", m.fit.predicted_exponent},
           {"tolerance", m.fit.tolerance},
           {"direction", m.fit.direction == DecayFit::Direction::UpperBound ? "upper_bound" : "equality"},
           {"rejected", m.fit.rejected},
           {"note", m.fit.note},
           {"pass", m.fit.pass}};
    std::ofstream(dir / "fit.json") << f.dump(2) << "\n";
}

std::vector<double> geometric_times(const json& e, double start, double stop, int count) {
    if (e.contains("times")) {
        const auto& t = e["times"];
        start = t.value("start", start);
        stop = t.value("stop", stop);
        count = t.value("count", count);
    }
    if (!(stop > start) || count < 2) throw std::invalid_argument("times: need stop > start and count >= 2");
    std::vector<double> v;
    for (int i = 0; i < count; ++i) v.push_back(start * std::pow(stop / start, static_cast<double>(i) / (count - 1)));
    return v;
}

// sup over a small lattice around the drifted centre, spacing ~ sqrt(t)
double comoving_sup(const FieldEvaluator& f, const Vec3& center, double tau, double t, int order, double shift,
                    const Shape& shape) {
    const double s = 0.7 * std::sqrt(std::max(t - shift, 1e-3));
    const Vec3 c = center + tau * t * Vec3(1, 0, 0);
    double m = 0.0;
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
            for (int k = -1; k <= 1; ++k) {
                const Vec3 x = c + s * Vec3(i, j, k);
                if (shape.gauge(x) <= 1.0) continue;
                m = std::max(m, field_magnitude(f, x, t, order));
            }
    return m;
}

std::vector<SummaryRow> run_decay_fit(RunContext& ctx, const ExperimentConfig& ec, const std::string& id,
                                      const fs::path& dir) {
    const auto& cfg = ctx.cfg;
    const json& e = ec.params;
    const std::string target = e.at("target").get<std::string>();
    const std::string mode = e.value("mode", target == "density-tail" ? "temporal" : "spatial");
    const int order = e.value("order", 0);
    const double tau = cfg.problem.tau;
    const auto& shape = cfg.problem.shape;

    if (target == "density-tail") {
        const ProblemSpec& sp = ctx.problem();
        BoundarySpec b = cfg.problem.boundary;
        b.kind = BoundarySpec::Kind::Tail;
        b.zeta = e.value("zeta", b.zeta);
        std::vector<double> T_list{1.0, std::sqrt(2.0), 2.0, 2.0 * std::sqrt(2.0), 4.0, 4.0 * std::sqrt(2.0), 8.0};
        if (e.contains("T_list")) T_list = e["T_list"].get<std::vector<double>>();
        // own horizon: the tail window (T, 0.8 horizon) must clear the largest T
        const double maxT = *std::max_element(T_list.begin(), T_list.end());
        const double horizon = e.value("horizon", std::max(sp.horizon(), 5.0 * maxT));
        VolterraOptions vo;
        vo.threads = cfg.problem.threads;
        const auto sys = VolterraSystem::assemble(sp.mesh, sp.dt, static_cast<int>(std::lround(horizon / sp.dt)), sp.tau, vo);
        const auto rhs = collocation_rhs(sys, [&](int i, double t) {
            return b.eval(sp.mesh->nodes[static_cast<std::size_t>(i)], sp.mesh->normals[static_cast<std::size_t>(i)], t);
        });
        DensitySolveReport rep;
        const auto phi = solve_density(sys, rhs, &rep);
        std::vector<double> norms;
        DecayMeasurement m;
        m.fit = density_tail_fit(phi, T_list, b.zeta, 0.2, cfg.tol.tail, &norms);
        m.x_label = "1+T";
        for (double T : T_list) m.x.push_back(1.0 + T);
        m.y = norms;
        write_samples(dir, m);
        std::ofstream(dir / "solve_report.json") << rep.to_json() << "\n";
        return {row(id, "density-tail", "tail slope of ||phi|S_T||, zeta=" + std::to_string(b.zeta).substr(0, 4),
                    m.fit.predicted_exponent, m.fit.slope, m.fit.tolerance, m.fit.pass, m.fit.note)};
    }

    FieldEvaluator field;
    Vec3 center = Vec3::Zero();
    double shift = 0.0;
    double predicted = 0.0;
    std::string tag;
    const SolutionHandle* h = nullptr;
    SurfaceDensity truncated;
    if (target == "initial") {
        const InitialField a = cfg.problem.initial;
        if (a.is_zero()) throw std::invalid_argument("decay-fit initial: no initial data configured");
        field = [a, tau](const Point3& x, double t, const MultiIndex& d) { return eval_initial_potential(a, x, t, tau, d); };
        center = a.terms.front().center;
        predicted = initial_potential_exponent(e.value("p", a.p), order);
        tag = mode == "spatial" ? "spatial-wake" : "initial-temporal";
    } else if (target == "volume") {
        const SourceField f = cfg.problem.source;
        if (f.is_zero()) throw std::invalid_argument("decay-fit volume: no source configured");
        field = [f, tau](const Point3& x, double t, const MultiIndex& d) { return eval_volume_potential(f, x, t, tau, d); };
        center = f.terms.front().center;
        shift = mode == "temporal" ? f.horizon() : 0.0;
        predicted = volume_potential_exponent(e.value("q", 1.0), e.value("s", 1.0), order);
        tag = mode == "spatial" ? "spatial-wake" : "volume-temporal";
    } else if (target == "layer") {
        h = &ctx.solution(dir, e.value("resume", true));
        // density cut off after the support time, so the layer decays like a compact-in-time one
        const double Tc = e.value("t", 0.5 * h->t_max());
        truncated = h->phi;
        for (int k = 0; k < truncated.slabs; ++k)
            if ((k + 1) * truncated.dt > Tc + 1e-12)
                for (std::size_t i = 0; i < truncated.nodes(); ++i) truncated.at(k, static_cast<int>(i)) = Vec3::Zero();
        const auto sq = h->sq;
        const SurfaceDensity* phi = &truncated;
        field = [sq, phi, tau](const Point3& x, double t, const MultiIndex& d) {
            return eval_single_layer(*sq, *phi, x, t, tau, d);
        };
        shift = mode == "temporal" ? Tc : 0.0;
        predicted = single_layer_pointwise_exponent();
        tag = mode == "spatial" ? "spatial-wake" : "layer-temporal";
    } else {
        h = &ctx.solution(dir, e.value("resume", true));
        field = [h](const Point3& x, double t, const MultiIndex& d) { return eval_velocity(*h, x, t, d); };
        tag = mode == "spatial" ? "spatial-wake" : "velocity-temporal";
        predicted = -1.5;
    }
    if (e.contains("predicted")) predicted = e["predicted"].get<double>();

    DecayMeasurement m;
    if (mode == "spatial") {
        RaySpec ray;
        ray.direction = RaySpec::parse(e.value("ray", "transverse"));
        ray.r_min = e.value("r_min", 10.0);
        ray.r_max = e.value("r_max", 80.0);
        ray.count = e.value("count", 8);
        const double t = e.value("t", 1.0);
        m = fit_spatial_decay(field, order, ray, t, cfg.tol.spatial);
        predicted = m.fit.predicted_exponent;
        tag = "spatial-wake";
    } else {
        const auto times = geometric_times(e, std::max(2.0 * std::max(shift, 0.5), 1.0), 100.0 * std::max(shift, 1.0), 9);
        const bool comoving = !e.contains("point") || e["point"].is_string();
        if (comoving && target != "layer" && target != "velocity") {
            m = fit_temporal_decay(
                [&](double t) { return comoving_sup(field, center, tau, t, order, shift, shape); }, times, predicted,
                cfg.tol.temporal, shift);
        } else {
            Vec3 x(0.0, 3.0, 0.0);
            if (e.contains("point") && e["point"].is_array())
                x = Vec3(e["point"][0].get<double>(), e["point"][1].get<double>(), e["point"][2].get<double>());
            m = fit_temporal_decay(field, order, x, times, predicted, cfg.tol.temporal, shift);
        }
    }
    write_samples(dir, m);
    std::ostringstream q;
    q << target << " " << mode << " |alpha|=" << order;
    if (mode == "spatial") q << " ray=" << e.value("ray", "transverse") << " t=" << e.value("t", 1.0);
    return {row(id, tag, q.str(), m.fit.predicted_exponent, m.fit.slope, m.fit.tolerance, m.fit.pass, m.fit.note)};
}

std::vector<SummaryRow> run_solve(RunContext& ctx, const ExperimentConfig& ec, const std::string& id, const fs::path& dir) {
    const auto& h = ctx.solution(dir, ec.params.value("resume", true));
    const ProblemSpec& sp = ctx.problem();
    std::vector<SummaryRow> rows;
    rows.push_back(row(id, "density-solve", "relative collocation residual", 0.0, h.report.residual,
                       ctx.cfg.tol.residual, h.report.residual <= ctx.cfg.tol.residual));
    double flux = 0.0;
    for (double v : h.report.flux_violation) flux = std::max(flux, v);
    const double scale = std::max(h.phi.l2_norm(), 1e-300);
    rows.push_back(row(id, "density-solve", "largest slab flux / ||phi||", 0.0, flux / scale, 1e-8, flux / scale <= 1e-8));

    // boundary condition recovery at a few nodes and times
    double worst = 0.0, ref = 0.0;
    const auto& m = *sp.mesh;
    const int stride = std::max<int>(1, static_cast<int>(m.size()) / 6);
    for (double frac : {0.25, 0.5, 0.75}) {
        const double t = frac * h.t_max();
        for (int i = 0; i < static_cast<int>(m.size()); i += stride) {
            const Vec3 x = m.nodes[static_cast<std::size_t>(i)];
            const Vec3 b = sp.b.trace ? sp.b.trace->value_at(i, t) : Vec3::Zero();
            Vec3 ri = Vec3::Zero();
            if (!h.f.is_zero()) ri += eval_volume_potential(h.f, x, t, h.tau, MultiIndex::value(), h.quad);
            if (!h.a.is_zero()) ri += eval_initial_potential(h.a, x, t, h.tau, MultiIndex::value(), h.quad);
            const Vec3 u = ri + eval_single_layer_on_surface(*h.sq, h.phi, i, t, h.tau);
            worst = std::max(worst, (u - b).norm());
            ref = std::max({ref, b.norm(), ri.norm()});
        }
    }
    const double rel = ref > 0.0 ? worst / ref : worst;
    rows.push_back(row(id, "boundary-trace", "max |u - b| on nodes / data scale", 0.0, rel, 0.05, rel <= 0.05));
    std::ofstream(dir / "solve_report.json") << h.report.to_json() << "\n";
    return rows;
}

std::vector<SummaryRow> run_rates(const RunConfig& cfg, const std::string& id, const fs::path& dir) {
    const auto lin = predict_linear_rates(cfg.rates);
    const auto nl = predict_nonlinear_rates(cfg.rates);
    json j{{"rho1", lin.rho1},          {"rho2", lin.rho2},
           {"nonlinear_first", nl.first}, {"nonlinear_second", nl.second},
           {"limit_first", nl.limit_first}, {"limit_second", nl.limit_second}};
    std::ofstream(dir / "rates.json") << j.dump(2) << "\n";
    std::vector<SummaryRow> rows;
    for (auto [name, tag, v] : {std::tuple{"rho1", "linear-rates", lin.rho1}, std::tuple{"rho2", "linear-rates", lin.rho2},
                                std::tuple{"nonlinear first exponent", "nonlinear-rates", nl.first},
                                std::tuple{"nonlinear second exponent", "nonlinear-rates", nl.second},
                                std::tuple{"compact limit first", "nonlinear-rates", nl.limit_first},
                                std::tuple{"compact limit second", "nonlinear-rates", nl.limit_second}})
        rows.push_back(row(id, tag, name, v, v, 0.0, true, "calculator output"));
    return rows;
}

std::vector<SummaryRow> run_z_bound(const json& e, const std::string& id, const fs::path& dir) {
    const auto rep = verify_z_bound(uniform_epsilon_grid(e.value("grid", 1000)));
    std::ofstream os(dir / "z_bound.csv");
    os << "epsilon,k,phi,max_z,holds\n";
    char buf[128];
    for (const auto& r : rep.rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%d\n", r.epsilon, r.k, r.phi, r.max_z, r.holds ? 1 : 0);
        os << buf;
    }
    const double n = static_cast<double>(rep.counterexamples.size());
    return {row(id, "z-bound", "counterexamples over " + std::to_string(rep.rows.size()) + " epsilon values", 0.0, n,
                0.0, n == 0.0)};
}

std::string experiment_id(std::size_t index, const ExperimentConfig& ec) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02zu-", index);
    std::string name = ec.params.value("name", ec.kind);
    for (char& c : name)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    return buf + name;
}

void write_result(const fs::path& dir, const ExperimentResult& r) {
    json rows = json::array();
    for (const auto& x : r.rows) rows.push_back(to_json(x));
    json j{{"id", r.id}, {"kind", r.kind}, {"rows", rows}, {"error", r.error}};
    std::ofstream(dir / "result.json") << j.dump(2) << "\n";
}

std::string fmt(double v) {
    if (!std::isfinite(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

int write_summary(const fs::path& out, const std::vector<ExperimentResult>& results) {
    json rows = json::array(), exps = json::array();
    int failed = 0, total = 0;
    std::ofstream csv(out / "summary.csv");
    csv << "experiment,tag,quantity,predicted,measured,tolerance,pass,note\n";
    for (const auto& r : results) {
        exps.push_back({{"id", r.id}, {"kind", r.kind}, {"error", r.error}});
        for (const auto& x : r.rows) {
            rows.push_back(to_json(x));
            ++total;
            if (!x.pass) ++failed;
            char buf[96];
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,", x.predicted, x.measured, x.tolerance);
            csv << x.experiment << "," << x.tag << ",\"" << x.quantity << "\"" << buf << (x.pass ? "true" : "false")
                << ",\"" << x.note << "\"\n";
        }
    }
    json s{{"schema_version", kSchemaVersion}, {"experiments", exps}, {"rows", rows}, {"total", total}, {"failed", failed}};
    std::ofstream(out / "summary.json") << s.dump(2) << "\n";
    return failed;
}

std::string table(const std::vector<ExperimentResult>& results) {
    std::ostringstream os;
    os << std::left << std::setw(26) << "experiment" << std::setw(22) << "tag" << std::setw(11) << "predicted"
       << std::setw(11) << "measured" << std::setw(6) << "pass"
       << "quantity\n";
    for (const auto& r : results)
        for (const auto& x : r.rows)
            os << std::left << std::setw(26) << x.experiment << std::setw(22) << x.tag << std::setw(11) << fmt(x.predicted)
               << std::setw(11) << fmt(x.measured) << std::setw(6) << (x.pass ? "yes" : "NO") << x.quantity << "\n";
    return os.str();
}

}  // namespace

int run_experiments(const RunConfig& cfg, std::ostream& log) {
    fs::create_directories(cfg.output_dir);
    std::ofstream(cfg.output_dir / "config.json") << cfg.raw.dump(2) << "\n";
    RunContext ctx{cfg, log, {}, {}, {}, {}};
    std::vector<ExperimentResult> results(cfg.experiments.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cfg.experiments.size(); i = next++) {
            const auto& ec = cfg.experiments[i];
            ExperimentResult& r = results[i];
            r.id = experiment_id(i, ec);
            r.kind = ec.kind;
            const fs::path dir = cfg.output_dir / r.id;
            fs::create_directories(dir);
            ctx.say("[" + r.id + "] start");
            try {
                if (ec.kind == "kernel-check") r.rows = rows_from_checks(r.id, kernel_checks(cfg.seed));
                else if (ec.kind == "potentials-check") {
                    r.rows = rows_from_checks(r.id, fractional_checks());
                    for (auto& x : rows_from_checks(r.id, convolution_checks())) r.rows.push_back(x);
                    for (auto& x : rows_from_checks(r.id, potential_checks(cfg.problem.tau))) r.rows.push_back(x);
                } else if (ec.kind == "solve") r.rows = run_solve(ctx, ec, r.id, dir);
                else if (ec.kind == "decay-fit") r.rows = run_decay_fit(ctx, ec, r.id, dir);
                else if (ec.kind == "rates") r.rows = run_rates(cfg, r.id, dir);
                else if (ec.kind == "z-bound") r.rows = run_z_bound(ec.params, r.id, dir);
                else throw std::invalid_argument("unknown experiment kind " + ec.kind);
            } catch (const std::exception& e) {
                r.error = e.what();
                r.rows.push_back(row(r.id, "error", "experiment failed", NAN, NAN, NAN, false, e.what()));
            }
            write_result(dir, r);
            int bad = 0;
            for (const auto& x : r.rows) bad += x.pass ? 0 : 1;
            ctx.say("[" + r.id + "] done, " + std::to_string(r.rows.size() - static_cast<std::size_t>(bad)) + "/" +
                    std::to_string(r.rows.size()) + " rows pass" + (r.error.empty() ? "" : " (error: " + r.error + ")"));
        }
    };
    const int n = std::max(1, std::min<int>(cfg.workers, static_cast<int>(cfg.experiments.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    const int failed = write_summary(cfg.output_dir, results);
    log << table(results);
    return failed == 0 ? 0 : 1;
}

std::string render_report(const fs::path& dir, int* failed) {
    if (!fs::is_directory(dir)) throw std::runtime_error("report: '" + dir.string() + "' is not a directory");
    std::vector<fs::path> subdirs;
    for (const auto& d : fs::directory_iterator(dir))
        if (d.is_directory() && fs::exists(d.path() / "result.json")) subdirs.push_back(d.path());
    std::sort(subdirs.begin(), subdirs.end());
    std::vector<ExperimentResult> results;
    for (const auto& d : subdirs) {
        std::ifstream is(d / "result.json");
        const json j = json::parse(is);
        ExperimentResult r;
        r.id = j.at("id").get<std::string>();
        r.kind = j.at("kind").get<std::string>();
        r.error = j.value("error", "");
        for (const auto& x : j.at("rows")) r.rows.push_back(row_from_json(x));
        results.push_back(std::move(r));
    }
    const int f = write_summary(dir, results);
    if (failed) *failed = f;
    return table(results);
}

}  // namespace oseen
