#include "oseen/geometry.hpp"

#include "oseen/quadrature.hpp"
#include "oseen/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace oseen {

double wake_weight(const Point3& x) { return 1.0 + x.norm() - x[0]; }

Shape Shape::ellipsoid(double a, double b, double c) {
    if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0) || !std::isfinite(a) || !std::isfinite(b) ||
        !std::isfinite(c))
        throw std::invalid_argument("ellipsoid: semi-axes must be positive and finite");
    Shape s;
    s.kind = Kind::Ellipsoid;
    s.a = a;
    s.b = b;
    s.c = c;
    return s;
}

double Shape::gauge(const Vec3& p) const {
    return std::sqrt(p[0] * p[0] / (a * a) + p[1] * p[1] / (b * b) + p[2] * p[2] / (c * c));
}

Vec3 Shape::outward_normal(const Vec3& p) const {
    Vec3 g(p[0] / (a * a), p[1] / (b * b), p[2] / (c * c));
    return g / g.norm();
}

Vec3 Shape::project(const Vec3& p) const { return p / gauge(p); }

double Shape::enclosing_radius() const { return std::max({a, b, c}); }

std::string Shape::name() const {
    if (kind == Kind::UnitSphere) return "unit-sphere";
    std::ostringstream os;
    os << "ellipsoid(" << a << "," << b << "," << c << ")";
    return os.str();
}

double BoundaryMesh::area() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

double BoundaryMesh::triangle_diameter(int k) const {
    const auto& t = triangles[static_cast<std::size_t>(k)];
    const Vec3& p0 = nodes[static_cast<std::size_t>(t[0])];
    const Vec3& p1 = nodes[static_cast<std::size_t>(t[1])];
    const Vec3& p2 = nodes[static_cast<std::size_t>(t[2])];
    return std::max({(p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm()});
}

Vec3 BoundaryMesh::triangle_centroid(int k) const {
    const auto& t = triangles[static_cast<std::size_t>(k)];
    return (nodes[static_cast<std::size_t>(t[0])] + nodes[static_cast<std::size_t>(t[1])] +
            nodes[static_cast<std::size_t>(t[2])]) /
           3.0;
}

SurfaceSample BoundaryMesh::map(int k, double l1, double l2) const {
    const auto& t = triangles[static_cast<std::size_t>(k)];
    const Vec3& p0 = nodes[static_cast<std::size_t>(t[0])];
    const Vec3 e1v = nodes[static_cast<std::size_t>(t[1])] - p0;
    const Vec3 e2v = nodes[static_cast<std::size_t>(t[2])] - p0;
    const Vec3 p = p0 + l1 * e1v + l2 * e2v;
    const Vec3 q(p[0] / (shape.a * shape.a), p[1] / (shape.b * shape.b),
                 p[2] / (shape.c * shape.c));
    const double rho = shape.gauge(p);
    const Vec3 grad = q / rho;
    auto dmap = [&](const Vec3& v) -> Vec3 { return v / rho - p * (grad.dot(v)) / (rho * rho); };
    const Vec3 d1 = dmap(e1v), d2 = dmap(e2v);
    return {p / rho, d1.cross(d2).norm()};
}

namespace {

double curved_triangle_area(const BoundaryMesh& m, int k) {
    // Two levels of subdivision keep the degree-5 rule far below the O(h^2) node error.
    double area = 0.0;
    const auto& rule = quad::triangle_rule7();
    const int sub = 4;
    const double hs = 1.0 / sub;
    for (int i = 0; i < sub; ++i) {
        for (int j = 0; j < sub - i; ++j) {
            for (int up = 0; up < 2; ++up) {
                if (up == 1 && i + j == sub - 1) continue;
                std::array<std::array<double, 2>, 3> v;
                if (up == 0)
                    v = {{{i * hs, j * hs}, {(i + 1) * hs, j * hs}, {i * hs, (j + 1) * hs}}};
                else
                    v = {{{(i + 1) * hs, (j + 1) * hs}, {i * hs, (j + 1) * hs}, {(i + 1) * hs, j * hs}}};
                for (const auto& qp : rule) {
                    double l1 = qp.l0 * v[0][0] + qp.l1 * v[1][0] + qp.l2 * v[2][0];
                    double l2 = qp.l0 * v[0][1] + qp.l1 * v[1][1] + qp.l2 * v[2][1];
                    area += qp.w * 0.5 * hs * hs * m.map(k, l1, l2).jac;
                }
            }
        }
    }
    return area;
}

}  // namespace

void finalize_topology(BoundaryMesh& mesh) {
    const std::size_t n = mesh.nodes.size();
    mesh.node_triangles.assign(n, {});
    std::vector<std::set<int>> nb(n);
    mesh.h = 0.0;
    for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
        const auto& t = mesh.triangles[k];
        for (int a = 0; a < 3; ++a) {
            auto ia = static_cast<std::size_t>(t[static_cast<std::size_t>(a)]);
            mesh.node_triangles[ia].push_back(static_cast<int>(k));
            for (int b = 0; b < 3; ++b)
                if (a != b) nb[ia].insert(t[static_cast<std::size_t>(b)]);
        }
        mesh.h = std::max(mesh.h, mesh.triangle_diameter(static_cast<int>(k)));
    }
    mesh.neighbors.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) mesh.neighbors[i].assign(nb[i].begin(), nb[i].end());
}

BoundaryMesh build_boundary_mesh(const Shape& shape, int refinement_level) {
    if (refinement_level < 0) throw std::invalid_argument("build_boundary_mesh: level must be >= 0");
    if (refinement_level > 7) throw std::invalid_argument("build_boundary_mesh: level above 7 not supported");
    if (shape.kind == Shape::Kind::Ellipsoid) (void)Shape::ellipsoid(shape.a, shape.b, shape.c);

    const double g = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, g, 0}, {1, g, 0},  {-1, -g, 0}, {1, -g, 0}, {0, -1, g},  {0, 1, g},
                           {0, -1, -g}, {0, 1, -g}, {g, 0, -1},  {g, 0, 1},  {-g, 0, -1}, {-g, 0, 1}};
    for (auto& p : v) p.normalize();
    std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                         {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                         {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                         {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int lev = 0; lev < refinement_level; ++lev) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            Vec3 m = (v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized();
            v.push_back(m);
            int id = static_cast<int>(v.size()) - 1;
            mid.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> nf;
        nf.reserve(f.size() * 4);
        for (const auto& t : f) {
            int a = midpoint(t[0], t[1]), b = midpoint(t[1], t[2]), c = midpoint(t[2], t[0]);
            nf.push_back({t[0], a, c});
            nf.push_back({t[1], b, a});
            nf.push_back({t[2], c, b});
            nf.push_back({a, b, c});
        }
        f.swap(nf);
    }

    BoundaryMesh m;
    m.shape = shape;
    m.level = refinement_level;
    m.enclosing_radius = shape.enclosing_radius();
    m.nodes.reserve(v.size());
    for (const auto& p : v) m.nodes.push_back(shape.project(p));
    for (const auto& p : m.nodes) m.normals.push_back(shape.outward_normal(p));
    m.triangles = f;
    finalize_topology(m);
    m.triangle_area.resize(f.size());
    m.weights.assign(m.nodes.size(), 0.0);
    for (std::size_t k = 0; k < f.size(); ++k) {
        double a = curved_triangle_area(m, static_cast<int>(k));
        m.triangle_area[k] = a;
        for (int id : f[k]) m.weights[static_cast<std::size_t>(id)] += a / 3.0;
    }
    return m;
}

void write_mesh(std::ostream& os, const BoundaryMesh& m) {
    os << "oseen-mesh 1 " << m.shape.a << ' ' << m.shape.b << ' ' << m.shape.c << ' '
       << (m.shape.kind == Shape::Kind::UnitSphere ? "unit-sphere" : "ellipsoid") << ' ' << m.level
       << ' ' << m.nodes.size() << ' ' << m.triangles.size() << '\n';
    os << std::setprecision(17);
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
        const Vec3& p = m.nodes[i];
        const Vec3& n = m.normals[i];
        os << p[0] << ' ' << p[1] << ' ' << p[2] << ' ' << n[0] << ' ' << n[1] << ' ' << n[2] << ' '
           << m.weights[i] << '\n';
    }
    for (std::size_t k = 0; k < m.triangles.size(); ++k) {
        const auto& t = m.triangles[k];
        os << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << m.triangle_area[k] << '\n';
    }
}

BoundaryMesh read_mesh(std::istream& is) {
    std::string magic, kind;
    int version = 0;
    std::size_t nn = 0, nt = 0;
    BoundaryMesh m;
    if (!(is >> magic >> version) || magic != "oseen-mesh" || version != 1)
        throw std::runtime_error("read_mesh: bad header");
    if (!(is >> m.shape.a >> m.shape.b >> m.shape.c >> kind >> m.level >> nn >> nt))
        throw std::runtime_error("read_mesh: bad header fields");
    m.shape.kind = kind == "unit-sphere" ? Shape::Kind::UnitSphere : Shape::Kind::Ellipsoid;
    m.enclosing_radius = m.shape.enclosing_radius();
    m.nodes.resize(nn);
    m.normals.resize(nn);
    m.weights.resize(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        Vec3& p = m.nodes[i];
        Vec3& n = m.normals[i];
        if (!(is >> p[0] >> p[1] >> p[2] >> n[0] >> n[1] >> n[2] >> m.weights[i]))
            throw std::runtime_error("read_mesh: truncated node table");
    }
    m.triangles.resize(nt);
    m.triangle_area.resize(nt);
    for (std::size_t k = 0; k < nt; ++k) {
        auto& t = m.triangles[k];
        if (!(is >> t[0] >> t[1] >> t[2] >> m.triangle_area[k]))
            throw std::runtime_error("read_mesh: truncated triangle table");
        for (int id : t)
            if (id < 0 || static_cast<std::size_t>(id) >= nn)
                throw std::runtime_error("read_mesh: triangle index out of range");
    }
    finalize_topology(m);
    return m;
}

bool InequalityReport::any_diverged() const {
    return std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.diverged; });
}

const InequalityEntry& InequalityReport::find(const std::string& tag) const {
    for (const auto& e : entries)
        if (e.tag == tag) return e;
    throw std::out_of_range("InequalityReport: no entry " + tag);
}

double sphere_nu_integral(double r, double beta) {
    // nu on the sphere depends on the polar angle only; the integrand peaks at theta ~ r^-1/2.
    const double min_w = std::min(std::numbers::pi, 1e-3 / std::sqrt(std::max(r, 1e-12)));
    auto rule = quad::graded_toward_left(0.0, std::numbers::pi, min_w, 8);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
        double th = rule.x[i];
        double nu = 1.0 + r * (1.0 - std::cos(th));
        s += rule.w[i] * std::sin(th) * std::pow(nu, -beta);
    }
    return 2.0 * std::numbers::pi * r * r * s;
}

double exterior_nu_integral(double R, double beta) {
    if (!(beta > 2.0)) throw std::invalid_argument("exterior_nu_integral: beta must exceed 2");
    // r = R e^s; the integrand in s decays like e^{(2-beta) s}.
    const double s_max = std::min(400.0, 45.0 / (beta - 2.0));
    double total = 0.0;
    for (double a = 0.0; a < s_max; a += 1.0) {
        auto g = quad::gauss_on(a, std::min(a + 1.0, s_max), 8);
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            double r = R * std::exp(g.x[i]);
            total += g.w[i] * r * std::pow(r, -beta) * sphere_nu_integral(r, beta);
        }
    }
    return total;
}

namespace {

Vec3 random_direction(Rng& rng) {
    double z = 2.0 * rng.uniform() - 1.0;
    double ph = 2.0 * std::numbers::pi * rng.uniform();
    double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(ph), s * std::sin(ph), z};
}

double log_uniform(Rng& rng, double lo, double hi) {
    return lo * std::pow(hi / lo, rng.uniform());
}

struct Probe {
    std::string name, tag, note;
    std::function<double(Rng&)> sample;
};

}  // namespace

InequalityReport probe_nu_inequalities(int sample_count, std::uint64_t rng_seed) {
    if (sample_count < 100) throw std::invalid_argument("probe_nu_inequalities: sample_count must be >= 100");
    const double tau = 1.0, K = 1.0;
    std::vector<Probe> probes;
    probes.push_back({"nu(x)/(|y| nu(x-y))", "nu-shift", "|y| in [1,10]; x = y + z with |z| log-uniform",
                      [](Rng& rng) {
                          Vec3 y = random_direction(rng) * log_uniform(rng, 1.0, 10.0);
                          Vec3 z = random_direction(rng) * log_uniform(rng, 1e-3, 1e4);
                          Vec3 x = y + z;
                          return wake_weight(x) / (y.norm() * wake_weight(x - y));
                      }});
    probes.push_back({"int_{dB_r} nu^-beta / r", "nu-sphere", "beta in [1.5,4], r log-uniform in [0.1,1e4]",
                      [](Rng& rng) {
                          double beta = 1.5 + 2.5 * rng.uniform();
                          double r = log_uniform(rng, 0.1, 1e4);
                          return sphere_nu_integral(r, beta) / r;
                      }});
    probes.push_back({"(chi_K(|x|^2+t) + chi_K^c(|x|nu+t)) / (|x-tau t e1|^2+t)", "nu-drift",
                      "K = R1 = 1, tau = 1; reports the reciprocal of C(K,tau)",
                      [tau, K](Rng& rng) {
                          Vec3 x = random_direction(rng) * log_uniform(rng, 1e-3, 1e4);
                          double t = log_uniform(rng, 1e-4, 1e4);
                          if (rng.uniform() < 0.5) {
                              // co-moving samples stress the wake
                              x = tau * t * e1 + random_direction(rng) * log_uniform(rng, 1e-3, 1e2);
                          }
                          double r = x.norm();
                          double rhs = r <= K ? r * r + t : r * wake_weight(x) + t;
                          double lhs = (x - tau * t * e1).squaredNorm() + t;
                          return rhs / lhs;
                      }});
    probes.push_back({"int_{B_R^c} (|x|nu)^-beta / R^{2-beta}", "nu-exterior", "beta in [2.5,4], R log-uniform in [1,1e3]",
                      [](Rng& rng) {
                          double beta = 2.5 + 1.5 * rng.uniform();
                          double R = log_uniform(rng, 1.0, 1e3);
                          return exterior_nu_integral(R, beta) / std::pow(R, 2.0 - beta);
                      }});

    InequalityReport rep;
    for (std::size_t p = 0; p < probes.size(); ++p) {
        Rng rng(rng_seed + 7919 * p);
        double sup_n = 0.0, sup_2n = 0.0;
        const int n = probes[p].tag == "nu-exterior" ? std::max(10, sample_count / 20) : sample_count;
        for (int i = 0; i < 2 * n; ++i) {
            double v = probes[p].sample(rng);
            if (i < n) sup_n = std::max(sup_n, v);
            sup_2n = std::max(sup_2n, v);
        }
        InequalityEntry e;
        e.name = probes[p].name;
        e.tag = probes[p].tag;
        e.note = probes[p].note;
        e.sup_n = sup_n;
        e.sup_2n = sup_2n;
        e.diverged = !std::isfinite(sup_2n) || sup_2n > 1.1 * sup_n;
        rep.entries.push_back(e);
    }
    return rep;
}

}  // namespace oseen
