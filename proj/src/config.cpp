#include "oseen/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace oseen {

using nlohmann::json;

std::string ConfigIssue::str() const {
    const char* k = kind == Kind::Schema ? "schema" : kind == Kind::Domain ? "domain" : "path";
    return std::string(k) + " error at " + (path.empty() ? "/" : path) + ": " + message;
}

namespace {

std::string join_issues(const std::vector<ConfigIssue>& v) {
    std::string s;
    for (const auto& i : v) s += (s.empty() ? "" : "\n") + i.str();
    return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> v) : std::runtime_error(join_issues(v)), issues(std::move(v)) {}

// ---------------------------------------------------------------- boundary family

double BoundarySpec::profile(double t) const {
    if (t <= 0.0) return 0.0;
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::Rotation: return amplitude * t * t * std::exp(-2.0 * t);
        case Kind::Tail: {
            const double ramp = t < 1.0 ? t * t * (3.0 - 2.0 * t) : 1.0;
            return amplitude * ramp * std::pow(1.0 + t, -(zeta + 0.5));
        }
    }
    return 0.0;
}

double BoundarySpec::dprofile(double t) const {
    if (t <= 0.0) return 0.0;
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::Rotation: return amplitude * (2.0 * t - 2.0 * t * t) * std::exp(-2.0 * t);
        case Kind::Tail: {
            const double e = zeta + 0.5;
            const double ramp = t < 1.0 ? t * t * (3.0 - 2.0 * t) : 1.0;
            const double dramp = t < 1.0 ? 6.0 * t * (1.0 - t) : 0.0;
            return amplitude * (dramp * std::pow(1.0 + t, -e) - e * ramp * std::pow(1.0 + t, -e - 1.0));
        }
    }
    return 0.0;
}

Vec3 BoundarySpec::pattern(const Vec3& x, const Vec3& n) {
    return Vec3(x(1), -x(0), 0.0) + 0.5 * (Vec3(1.0, 0.0, 0.0) - n(0) * n);
}

Mat3 BoundarySpec::pattern_gradient(const Vec3& n) {
    // unit sphere, n = x/|x|
    Mat3 g;
    g << 0, 1, 0, -1, 0, 0, 0, 0, 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            g(i, j) -= 0.5 * (((j == 0) - n(0) * n(j)) * n(i) + n(0) * ((i == j) - n(i) * n(j)));
    return g;
}

// ---------------------------------------------------------------- validation

namespace {

struct Checker {
    std::vector<ConfigIssue> issues;

    void schema(const std::string& p, const std::string& m) { issues.push_back({ConfigIssue::Kind::Schema, p, m}); }
    void domain(const std::string& p, const std::string& m) { issues.push_back({ConfigIssue::Kind::Domain, p, m}); }
    void path(const std::string& p, const std::string& m) { issues.push_back({ConfigIssue::Kind::Path, p, m}); }

    void keys(const json& obj, const std::string& p, const std::set<std::string>& allowed) {
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!allowed.count(it.key())) schema(p + "/" + it.key(), "unknown field");
    }

    bool object(const json& parent, const std::string& key, const std::string& p, bool required) {
        if (!parent.contains(key)) {
            if (required) schema(p + "/" + key, "required object missing");
            return false;
        }
        if (!parent.at(key).is_object()) {
            schema(p + "/" + key, "must be an object");
            return false;
        }
        return true;
    }

    // optional number with an open/closed range check; returns false on type errors
    void number(const json& obj, const std::string& key, const std::string& p, double lo, double hi,
                bool lo_open = false, bool hi_open = false, bool integer = false) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        const std::string q = p + "/" + key;
        if (integer ? !v.is_number_integer() : !v.is_number()) {
            schema(q, integer ? "must be an integer" : "must be a number");
            return;
        }
        const double x = v.get<double>();
        const bool ok = std::isfinite(x) && (lo_open ? x > lo : x >= lo) && (hi_open ? x < hi : x <= hi);
        if (!ok) {
            std::ostringstream os;
            os << "value " << x << " outside " << (lo_open ? "(" : "[") << lo << ", " << hi << (hi_open ? ")" : "]");
            schema(q, os.str());
        }
    }

    void vec3(const json& obj, const std::string& key, const std::string& p) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number())
            schema(p + "/" + key, "must be an array of three numbers");
    }

    void string_in(const json& obj, const std::string& key, const std::string& p, const std::set<std::string>& values,
                   bool required) {
        if (!obj.contains(key)) {
            if (required) schema(p + "/" + key, "required string missing");
            return;
        }
        const auto& v = obj.at(key);
        if (!v.is_string() || !values.count(v.get<std::string>())) {
            std::string list;
            for (const auto& s : values) list += (list.empty() ? "" : ", ") + s;
            schema(p + "/" + key, "must be one of: " + list);
        }
    }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_problem(Checker& c, const json& pr) {
    const std::string p = "/problem";
    c.keys(pr, p, {"tau", "shape", "mesh_level", "dt", "slabs", "source", "initial", "boundary", "threads"});
    c.number(pr, "tau", p, 0.0, 100.0, true);
    c.number(pr, "mesh_level", p, 0, 4, false, false, true);
    c.number(pr, "dt", p, 0.0, 10.0, true);
    c.number(pr, "slabs", p, 1, 2000, false, false, true);
    c.number(pr, "threads", p, 1, 256, false, false, true);
    if (c.object(pr, "shape", p, false)) {
        const auto& s = pr.at("shape");
        c.keys(s, p + "/shape", {"kind", "axes"});
        c.string_in(s, "kind", p + "/shape", {"sphere", "ellipsoid"}, true);
        if (s.value("kind", "") == "ellipsoid") {
            c.vec3(s, "axes", p + "/shape");
            if (!s.contains("axes")) c.schema(p + "/shape/axes", "ellipsoid needs axes");
        }
    }
    if (pr.contains("source")) {
        const auto& src = pr.at("source");
        if (!src.is_array()) {
            c.schema(p + "/source", "must be an array of source terms");
        } else {
            for (std::size_t i = 0; i < src.size(); ++i) {
                const std::string q = p + "/source/" + std::to_string(i);
                const auto& t = src[i];
                if (!t.is_object()) {
                    c.schema(q, "must be an object");
                    continue;
                }
                c.keys(t, q, {"kind", "center", "radius", "horizon", "amplitude", "A", "B", "inner_radius"});
                c.string_in(t, "kind", q, {"compact_bump", "wake_decaying"}, true);
                c.vec3(t, "center", q);
                c.vec3(t, "amplitude", q);
                c.number(t, "radius", q, 0.0, kInf, true);
                c.number(t, "horizon", q, 0.0, kInf, true);
                c.number(t, "inner_radius", q, 0.0, kInf, true);
                c.number(t, "A", q, 0.0, kInf, true);
                c.number(t, "B", q, 0.0, kInf);
                if (t.value("kind", "") == "wake_decaying" && t.contains("A") && t.contains("B") && t["A"].is_number() &&
                    t["B"].is_number()) {
                    const double A = t["A"].get<double>(), B = t["B"].get<double>();
                    if (!(A + std::min(1.0, B) > 3.0)) c.domain(q, "wake source needs A + min(1, B) > 3");
                    if (!(A + B >= 3.5)) c.domain(q, "wake source needs A + B >= 7/2");
                }
            }
        }
    }
    if (c.object(pr, "initial", p, false)) {
        const auto& in = pr.at("initial");
        const std::string q0 = p + "/initial";
        c.keys(in, q0, {"p", "terms"});
        c.number(in, "p", q0, 1.0, kInf);
        if (in.contains("terms")) {
            if (!in["terms"].is_array()) {
                c.schema(q0 + "/terms", "must be an array");
            } else {
                for (std::size_t i = 0; i < in["terms"].size(); ++i) {
                    const auto& t = in["terms"][i];
                    const std::string q = q0 + "/terms/" + std::to_string(i);
                    if (!t.is_object()) {
                        c.schema(q, "must be an object");
                        continue;
                    }
                    c.keys(t, q, {"kind", "center", "radius", "direction", "kappa0", "inner_radius"});
                    c.string_in(t, "kind", q, {"curl_bump", "vector_bump", "algebraic"}, true);
                    c.vec3(t, "center", q);
                    c.vec3(t, "direction", q);
                    c.number(t, "radius", q, 0.0, kInf, true);
                    c.number(t, "kappa0", q, 0.0, 1.0, true);
                    c.number(t, "inner_radius", q, 0.0, kInf, true);
                }
            }
        }
    }
    if (c.object(pr, "boundary", p, false)) {
        const auto& b = pr.at("boundary");
        const std::string q = p + "/boundary";
        c.keys(b, q, {"kind", "amplitude", "zeta", "delta"});
        c.string_in(b, "kind", q, {"zero", "rotation", "tail"}, true);
        c.number(b, "amplitude", q, -kInf, kInf);
        c.number(b, "zeta", q, 0.0, 1.0, true, true);
        c.number(b, "delta", q, 0.0, kInf);
    }
}

const std::set<std::string> kExperimentKeys{"kind",  "name",  "target", "mode",  "order", "ray",   "r_min",
                                            "r_max", "count", "t",      "times", "point", "T_list", "zeta",
                                            "grid",  "resume", "predicted", "q", "s", "p", "horizon"};

void check_experiment(Checker& c, const json& e, const std::string& q) {
    if (!e.is_object()) {
        c.schema(q, "must be an object");
        return;
    }
    c.keys(e, q, kExperimentKeys);
    std::set<std::string> kinds(experiment_kinds().begin(), experiment_kinds().end());
    c.string_in(e, "kind", q, kinds, true);
    const std::string kind = e.value("kind", "");
    if (kind == "decay-fit") {
        c.string_in(e, "target", q, {"initial", "volume", "layer", "velocity", "density-tail"}, true);
        c.string_in(e, "mode", q, {"spatial", "temporal"}, false);
        c.number(e, "order", q, 0, 1, false, false, true);
        c.string_in(e, "ray", q, {"downstream", "upstream", "transverse"}, false);
        c.number(e, "r_min", q, 1.0, kInf, true);
        c.number(e, "r_max", q, 1.0, kInf, true);
        c.number(e, "count", q, 2, 200, false, false, true);
        c.number(e, "t", q, 0.0, kInf, true);
        c.number(e, "zeta", q, 0.0, 1.0, true, true);
        c.number(e, "q", q, 1.0, kInf);
        c.number(e, "s", q, 1.0, kInf);
        c.number(e, "p", q, 1.0, kInf);
        c.number(e, "horizon", q, 0.0, 1e4, true);
        c.number(e, "predicted", q, -kInf, kInf);
        if (e.contains("times")) {
            const auto& t = e["times"];
            if (!t.is_object()) {
                c.schema(q + "/times", "must be an object {start, stop, count}");
            } else {
                c.keys(t, q + "/times", {"start", "stop", "count"});
                c.number(t, "start", q + "/times", 0.0, kInf, true);
                c.number(t, "stop", q + "/times", 0.0, kInf, true);
                c.number(t, "count", q + "/times", 2, 500, false, false, true);
            }
        }
        if (e.contains("point")) {
            const auto& pt = e["point"];
            if (!(pt.is_string() && pt.get<std::string>() == "co-moving")) c.vec3(e, "point", q);
        }
        if (e.contains("T_list")) {
            const auto& t = e["T_list"];
            if (!t.is_array() || t.empty()) c.schema(q + "/T_list", "must be a non-empty array of numbers");
            else
                for (const auto& v : t)
                    if (!v.is_number() || !(v.get<double>() > 0.0)) c.schema(q + "/T_list", "entries must be positive numbers");
        }
    }
    if (kind == "z-bound") c.number(e, "grid", q, 1, 1e7, false, false, true);
    if (kind == "solve" && e.contains("resume") && !e["resume"].is_boolean()) c.schema(q + "/resume", "must be a boolean");
}

void check_rates(Checker& c, const json& r, bool enforce_domain) {
    const std::string p = "/rates";
    c.keys(r, p, {"zeta1", "zeta2", "q0", "s0", "p0", "kappa1", "q1", "q1_hat", "q1_bar", "alpha"});
    for (const char* k : {"zeta1", "zeta2", "q0", "s0", "p0", "kappa1", "q1", "q1_hat", "q1_bar"})
        if (r.contains(k) && !r[k].is_number()) c.schema(p + "/" + k, "must be a number");
    c.number(r, "alpha", p, 0, 1, false, false, true);
    if (!enforce_domain) return;
    RateInputs in;
    auto get = [&](const char* k, double& v) {
        if (r.contains(k) && r[k].is_number()) v = r[k].get<double>();
    };
    get("zeta1", in.zeta1);
    get("zeta2", in.zeta2);
    get("q0", in.q0);
    get("s0", in.s0);
    get("p0", in.p0);
    get("kappa1", in.kappa1);
    get("q1", in.q1);
    get("q1_hat", in.q1_hat);
    get("q1_bar", in.q1_bar);
    if (r.contains("alpha") && r["alpha"].is_number_integer()) in.alpha = r["alpha"].get<int>();
    for (const auto& v : in.violations(true)) {
        // name the field whose constraint failed; combined constraints point at the block
        std::string field;
        for (const char* k : {"zeta1", "zeta2", "q0", "s0", "p0", "kappa1", "q1_hat", "q1_bar", "q1"})
            if (v.rfind(k, 0) == 0) {
                field = k;
                break;
            }
        c.domain(field.empty() ? p : p + "/" + field, "violates " + v);
    }
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> k{"kernel-check", "potentials-check", "solve", "decay-fit", "rates", "z-bound"};
    return k;
}

std::filesystem::path resolve_output_dir(const std::string& configured) {
    std::filesystem::path p(configured);
    if (const char* root = std::getenv("OSEEN_OUTPUT_ROOT"); root && *root && p.is_relative())
        return std::filesystem::path(root) / p;
    return p;
}

std::vector<ConfigIssue> validate_config(const json& doc) {
    Checker c;
    if (!doc.is_object()) {
        c.schema("", "document must be a JSON object");
        return c.issues;
    }
    c.keys(doc, "", {"schema_version", "output_dir", "seed", "workers", "problem", "rates", "tolerances", "experiments"});
    if (!doc.contains("schema_version")) c.schema("/schema_version", "required field missing");
    else if (!doc["schema_version"].is_number_integer() || doc["schema_version"].get<int>() != kSchemaVersion)
        c.schema("/schema_version", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
    c.number(doc, "seed", "", 0, 1.8e19, false, false, true);
    c.number(doc, "workers", "", 1, 256, false, false, true);
    if (c.object(doc, "problem", "", false)) check_problem(c, doc["problem"]);
    if (c.object(doc, "tolerances", "", false)) {
        const auto& t = doc["tolerances"];
        c.keys(t, "/tolerances", {"spatial", "temporal", "tail", "quadrature", "residual"});
        for (const char* k : {"spatial", "temporal", "tail", "quadrature", "residual"})
            c.number(t, k, "/tolerances", 0.0, 10.0, true);
    }
    bool rates_enabled = false;
    if (doc.contains("experiments")) {
        const auto& ex = doc["experiments"];
        if (!ex.is_array()) {
            c.schema("/experiments", "must be an array");
        } else {
            for (std::size_t i = 0; i < ex.size(); ++i) {
                check_experiment(c, ex[i], "/experiments/" + std::to_string(i));
                if (ex[i].is_object() && ex[i].value("kind", "") == "rates") rates_enabled = true;
            }
        }
    } else {
        c.schema("/experiments", "required array missing");
    }
    if (doc.contains("rates")) {
        if (!doc["rates"].is_object()) c.schema("/rates", "must be an object");
        else check_rates(c, doc["rates"], rates_enabled);
    } else if (rates_enabled) {
        check_rates(c, json::object(), true);
    }

    // output location
    if (!doc.contains("output_dir")) {
        c.path("/output_dir", "output directory not set");
    } else if (!doc["output_dir"].is_string() || doc["output_dir"].get<std::string>().empty()) {
        c.path("/output_dir", "output directory must be a non-empty string");
    } else {
        namespace fs = std::filesystem;
        const fs::path out = resolve_output_dir(doc["output_dir"].get<std::string>());
        std::error_code ec;
        if (fs::exists(out, ec) && !fs::is_directory(out, ec)) {
            c.path("/output_dir", "'" + out.string() + "' exists and is not a directory");
        } else {
            fs::path probe = out.has_parent_path() ? out.parent_path() : fs::path(".");
            while (!probe.empty() && !fs::exists(probe, ec) && probe.has_parent_path() && probe != probe.parent_path())
                probe = probe.parent_path();
            if (!probe.empty() && fs::exists(probe, ec) && !fs::is_directory(probe, ec))
                c.path("/output_dir", "'" + probe.string() + "' is not a directory");
        }
    }
    return c.issues;
}

namespace {

Vec3 vec3_of(const json& j, const char* key, const Vec3& def) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

}  // namespace

RunConfig parse_config(const json& doc) {
    auto issues = validate_config(doc);
    if (!issues.empty()) throw ConfigError(std::move(issues));
    RunConfig rc;
    rc.raw = doc;
    rc.schema_version = doc["schema_version"].get<int>();
    rc.output_dir = resolve_output_dir(doc["output_dir"].get<std::string>());
    rc.seed = doc.value("seed", std::uint64_t{1});
    rc.workers = doc.value("workers", 1);

    const json pr = doc.value("problem", json::object());
    auto& p = rc.problem;
    p.tau = pr.value("tau", p.tau);
    p.mesh_level = pr.value("mesh_level", p.mesh_level);
    p.dt = pr.value("dt", p.dt);
    p.slabs = pr.value("slabs", p.slabs);
    p.threads = pr.value("threads", p.threads);
    if (pr.contains("shape") && pr["shape"].value("kind", "sphere") == "ellipsoid") {
        const Vec3 ax = vec3_of(pr["shape"], "axes", Vec3(1, 1, 1));
        p.shape = Shape::ellipsoid(ax(0), ax(1), ax(2));
    }
    for (const auto& t : pr.value("source", json::array())) {
        SourceTerm s;
        if (t.value("kind", "") == "wake_decaying") {
            s.kind = SourceTerm::Kind::WakeDecaying;
            s.A = t.value("A", s.A);
            s.B = t.value("B", s.B);
            s.inner_radius = t.value("inner_radius", s.inner_radius);
        }
        s.center = vec3_of(t, "center", s.center);
        s.radius = t.value("radius", s.radius);
        s.horizon = t.value("horizon", s.horizon);
        s.amplitude = vec3_of(t, "amplitude", s.amplitude);
        p.source.terms.push_back(s);
    }
    if (pr.contains("initial")) {
        const auto& in = pr["initial"];
        p.initial.p = in.value("p", 1.0);
        for (const auto& t : in.value("terms", json::array())) {
            InitialTerm a;
            const std::string k = t.value("kind", "curl_bump");
            a.kind = k == "vector_bump" ? InitialTerm::Kind::VectorBump
                     : k == "algebraic" ? InitialTerm::Kind::AlgebraicDecay
                                        : InitialTerm::Kind::CurlBump;
            a.center = vec3_of(t, "center", a.center);
            a.radius = t.value("radius", a.radius);
            a.direction = vec3_of(t, "direction", a.direction);
            a.kappa0 = t.value("kappa0", a.kappa0);
            a.inner_radius = t.value("inner_radius", a.inner_radius);
            p.initial.terms.push_back(a);
        }
    }
    if (pr.contains("boundary")) {
        const auto& b = pr["boundary"];
        const std::string k = b.value("kind", "zero");
        p.boundary.kind = k == "rotation" ? BoundarySpec::Kind::Rotation
                          : k == "tail"   ? BoundarySpec::Kind::Tail
                                          : BoundarySpec::Kind::Zero;
        p.boundary.amplitude = b.value("amplitude", 1.0);
        p.boundary.zeta = b.value("zeta", p.boundary.zeta);
        p.boundary.delta = b.value("delta", p.boundary.delta);
    }

    if (doc.contains("rates")) {
        const auto& r = doc["rates"];
        auto& in = rc.rates;
        in.zeta1 = r.value("zeta1", in.zeta1);
        in.zeta2 = r.value("zeta2", in.zeta2);
        in.q0 = r.value("q0", in.q0);
        in.s0 = r.value("s0", in.s0);
        in.p0 = r.value("p0", in.p0);
        in.kappa1 = r.value("kappa1", in.kappa1);
        in.q1 = r.value("q1", in.q1);
        in.q1_hat = r.value("q1_hat", in.q1_hat);
        in.q1_bar = r.value("q1_bar", in.q1_bar);
        in.alpha = r.value("alpha", in.alpha);
    }
    if (doc.contains("tolerances")) {
        const auto& t = doc["tolerances"];
        rc.tol.spatial = t.value("spatial", rc.tol.spatial);
        rc.tol.temporal = t.value("temporal", rc.tol.temporal);
        rc.tol.tail = t.value("tail", rc.tol.tail);
        rc.tol.quadrature = t.value("quadrature", rc.tol.quadrature);
        rc.tol.residual = t.value("residual", rc.tol.residual);
    }
    for (const auto& e : doc["experiments"]) rc.experiments.push_back({e["kind"].get<std::string>(), e});
    return rc;
}

json read_config_json(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw ConfigError({{ConfigIssue::Kind::Path, "", "cannot read config file '" + file.string() + "'"}});
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError({{ConfigIssue::Kind::Schema, "", std::string("invalid JSON: ") + e.what()}});
    }
}

RunConfig load_config(const std::filesystem::path& file) { return parse_config(read_config_json(file)); }

json default_config() {
    return json::parse(R"({
  "schema_version": 1,
  "output_dir": "oseen_runs/default",
  "seed": 1,
  "workers": 1,
  "problem": {
    "tau": 1.0,
    "shape": {"kind": "sphere"},
    "mesh_level": 1,
    "dt": 0.25,
    "slabs": 25,
    "source": [{"kind": "compact_bump", "center": [0, 2.5, 0], "radius": 1.0, "horizon": 1.0, "amplitude": [1, 0, 0]}],
    "initial": {"p": 1, "terms": [{"kind": "curl_bump", "center": [0, -2.5, 0], "radius": 1.0, "direction": [0, 0, 1]}]},
    "boundary": {"kind": "rotation", "amplitude": 1.0}
  },
  "rates": {"zeta1": 2.0, "zeta2": 0.5, "q0": 1.1, "s0": 1.1, "p0": 1.1,
            "kappa1": 1.0, "q1": 1.2, "q1_hat": 1.2, "q1_bar": 4.0, "alpha": 0},
  "tolerances": {"spatial": 0.15, "temporal": 0.1, "tail": 0.2, "quadrature": 0.01, "residual": 0.001},
  "experiments": [
    {"kind": "kernel-check"},
    {"kind": "potentials-check"},
    {"kind": "rates"},
    {"kind": "z-bound", "grid": 1000},
    {"kind": "solve"},
    {"kind": "decay-fit", "name": "velocity-transverse", "target": "velocity", "mode": "spatial", "order": 0,
     "ray": "transverse", "r_min": 10, "r_max": 80, "count": 8, "t": 1.0},
    {"kind": "decay-fit", "name": "initial-temporal", "target": "initial", "mode": "temporal", "order": 0,
     "point": "co-moving", "times": {"start": 10, "stop": 1000, "count": 9}}
  ]
})");
}

}  // namespace oseen
