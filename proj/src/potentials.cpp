#include "oseen/potentials.hpp"

#include "oseen/kernels.hpp"
#include "oseen/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace oseen {

// ---------------------------------------------------------------- SurfaceDensity

SurfaceDensity SurfaceDensity::zeros(std::shared_ptr<const BoundaryMesh> mesh, double dt, int slabs) {
    if (!mesh) throw std::invalid_argument("SurfaceDensity: null mesh");
    if (!(dt > 0.0) || slabs < 0) throw std::invalid_argument("SurfaceDensity: need dt > 0 and slabs >= 0");
    SurfaceDensity d;
    d.mesh = std::move(mesh);
    d.dt = dt;
    d.slabs = slabs;
    d.values.assign(static_cast<std::size_t>(slabs) * d.mesh->size(), Vec3::Zero());
    d.zero_flux = true;
    return d;
}

double SurfaceDensity::flux(int slab) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes(); ++i)
        s += mesh->weights[i] * mesh->normals[i].dot(at(slab, static_cast<int>(i)));
    return s;
}

double SurfaceDensity::max_abs_flux() const {
    double m = 0.0;
    for (int k = 0; k < slabs; ++k) m = std::max(m, std::abs(flux(k)));
    return m;
}

double SurfaceDensity::l2_norm(double t0, double t1) const {
    double s = 0.0;
    for (int k = 0; k < slabs; ++k) {
        const double a = std::max(t0, k * dt), b = std::min(t1, (k + 1) * dt);
        if (b <= a) continue;
        double sk = 0.0;
        for (std::size_t i = 0; i < nodes(); ++i) sk += mesh->weights[i] * at(k, static_cast<int>(i)).squaredNorm();
        s += (b - a) * sk;
    }
    return std::sqrt(s);
}

bool SurfaceDensity::is_zero() const {
    return std::all_of(values.begin(), values.end(), [](const Vec3& v) { return v.isZero(0.0); });
}

SurfaceDensity& SurfaceDensity::operator+=(const SurfaceDensity& o) {
    if (o.mesh != mesh || o.slabs != slabs || o.dt != dt)
        throw std::invalid_argument("SurfaceDensity: incompatible operands");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    zero_flux = zero_flux && o.zero_flux;
    return *this;
}

SurfaceDensity& SurfaceDensity::operator*=(double s) {
    for (auto& v : values) v *= s;
    return *this;
}

// ---------------------------------------------------------------- volume rules

namespace {

constexpr double kPi = std::numbers::pi;

struct Support {
    Vec3 center = Vec3::Zero();
    double radius = 1.0;
    std::vector<double> shells;  // radii about center where the density has a jump or kink
    bool compact = true;
};

int scaled(int base, int level) { return base + (base * level) / 2; }

bool ray_sphere(const Vec3& p, const Vec3& w, const Vec3& c, double R, double& r0, double& r1) {
    const Vec3 d = p - c;
    const double b = d.dot(w);
    const double disc = b * b - (d.squaredNorm() - R * R);
    if (disc <= 0.0) return false;
    const double sq = std::sqrt(disc);
    r0 = -b - sq;
    r1 = -b + sq;
    if (r1 <= 0.0) return false;
    r0 = std::max(r0, 0.0);
    return true;
}

struct Direction {
    Vec3 w;
    double weight;
};

const std::vector<Direction>& directions(int n_theta) {
    thread_local std::vector<std::pair<int, std::vector<Direction>>> cache;
    for (const auto& c : cache)
        if (c.first == n_theta) return c.second;
    std::vector<Direction> dirs;
    const auto& g = quad::gauss_legendre(n_theta);
    const int n_phi = 2 * n_theta;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        const double mu = g.x[i], sn = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        for (int j = 0; j < n_phi; ++j) {
            const double ph = 2.0 * kPi * (j + 0.5) / n_phi;
            dirs.push_back({Vec3(sn * std::cos(ph), sn * std::sin(ph), mu), g.w[i] * 2.0 * kPi / n_phi});
        }
    }
    cache.emplace_back(n_theta, std::move(dirs));
    return cache.back().second;
}

/// Calls acc(y, weight) for a volume rule over the support. The kernel is
/// assumed to peak at xp with width ell.
template <class Acc>
int space_rule(const Support& s, const Vec3& xp, double ell, int level, Acc&& acc) {
    int count = 0;
    const double dist = (xp - s.center).norm() - s.radius;
    if (s.compact && std::max(dist, ell) >= 0.5 * s.radius) {
        // centred on the support
        std::vector<double> br{0.0};
        for (double r : s.shells)
            if (r > 0.0 && r < s.radius) br.push_back(r);
        br.push_back(s.radius);
        std::sort(br.begin(), br.end());
        quad::Rule1D radial;
        for (std::size_t p = 0; p + 1 < br.size(); ++p) quad::append_gauss(radial, br[p], br[p + 1], scaled(8, level));
        for (const auto& dir : directions(scaled(12, level))) {
            for (std::size_t q = 0; q < radial.x.size(); ++q) {
                const double r = radial.x[q];
                acc(Vec3(s.center + r * dir.w), dir.weight * radial.w[q] * r * r);
                ++count;
            }
        }
        return count;
    }
    // centred on the kernel peak
    const int nr = scaled(4, level);
    std::vector<double> br;
    br.reserve(8);
    for (const auto& dir : directions(scaled(16, level))) {
        double r0 = 0.0, r1 = 0.0;
        if (!ray_sphere(xp, dir.w, s.center, s.radius, r0, r1)) continue;
        br.assign({r0, r1});
        for (double rs : s.shells) {
            double a = 0.0, b = 0.0;
            if (!ray_sphere(xp, dir.w, s.center, rs, a, b)) continue;
            if (a > r0 && a < r1) br.push_back(a);
            if (b > r0 && b < r1) br.push_back(b);
        }
        std::sort(br.begin(), br.end());
        for (std::size_t p = 0; p + 1 < br.size(); ++p) {
            const double a = br[p], b = br[p + 1];
            if (b - a <= 0.0) continue;
            const double min_w = a == 0.0 ? std::max(0.25 * ell, 1e-9 * b) : std::max(0.5 * std::max(a, ell), 1e-9 * b);
            const auto rule = quad::graded_toward_left(a, b, min_w, nr);
            for (std::size_t q = 0; q < rule.x.size(); ++q) {
                const double r = rule.x[q];
                acc(Vec3(xp + r * dir.w), dir.weight * rule.w[q] * r * r);
                ++count;
            }
        }
    }
    return count;
}

Support support_of(const SourceTerm& t) {
    Support s;
    if (t.kind == SourceTerm::Kind::CompactBump) {
        s.center = t.center;
        s.radius = t.radius;
        return s;
    }
    s.center = Vec3::Zero();
    s.radius = t.truncation_radius();
    s.shells = {t.inner_radius};
    s.compact = false;
    return s;
}

Support support_of(const InitialTerm& t) {
    Support s;
    if (t.compact()) {
        s.center = t.center;
        s.radius = t.radius;
        return s;
    }
    s.center = Vec3::Zero();
    s.radius = t.truncation_radius();
    s.shells = {t.inner_radius};
    s.compact = false;
    return s;
}

/// Gauss panels on (ua, ub): graded toward 0 when ua = 0, no panel wider than max_w.
quad::Rule1D time_rule(double ua, double ub, double max_w, int n) {
    std::vector<double> br;
    if (ua == 0.0) {
        double hi = ub;
        const double min_w = 1e-3 * ub;
        while (hi > 2.0 * min_w) {
            br.push_back(hi);
            hi *= 0.5;
        }
        br.push_back(hi);
        br.push_back(0.0);
        std::reverse(br.begin(), br.end());
    } else {
        br = {ua, ub};
    }
    quad::Rule1D r;
    for (std::size_t p = 0; p + 1 < br.size(); ++p) {
        const double a = br[p], b = br[p + 1];
        const int m = std::max(1, static_cast<int>(std::ceil((b - a) / max_w)));
        for (int i = 0; i < m; ++i) quad::append_gauss(r, a + (b - a) * i / m, a + (b - a) * (i + 1) / m, n);
    }
    return r;
}

/// Sum over u in the window and y of w * spatial(y) * temporal(t - u) * K(x - y, u).
template <class KFn>
Mat3 volume_matrix(const SourceTerm& term, const Vec3& x, double t, double tau, double wlo, double whi, int level,
                   KFn&& kf, int& pts) {
    Mat3 m = Mat3::Zero();
    const double ua = std::max({0.0, t - term.horizon, wlo});
    const double ub = std::min(t, whi);
    if (!(ub > ua)) return m;
    const Support sup = support_of(term);
    double max_w = 0.25 * term.horizon;
    if (tau > 0.0 && sup.compact) max_w = std::min(max_w, 0.5 * sup.radius / tau);
    const auto ur = time_rule(ua, ub, max_w, scaled(4, level));
    for (std::size_t q = 0; q < ur.x.size(); ++q) {
        const double u = ur.x[q];
        const double tw = term.temporal(t - u) * ur.w[q];
        if (tw == 0.0) continue;
        const Vec3 xp = x - u * tau * e1;
        pts += space_rule(sup, xp, std::sqrt(u), level, [&](const Vec3& y, double w) {
            const double sp = term.spatial(y);
            if (sp != 0.0) m += (w * sp * tw) * kf(Vec3(x - y), u);
        });
    }
    return m;
}

Vec3 volume_once(const SourceField& f, const Point3& x, double t, double tau, const MultiIndex& d, int level,
                 int& pts) {
    Vec3 acc = Vec3::Zero();
    for (const auto& term : f.terms) {
        const Mat3 m = volume_matrix(term, x, t, tau, 0.0, std::numeric_limits<double>::infinity(), level,
                                     [&](const Vec3& z, double u) { return oseen_kernel(z, u, tau, d); }, pts);
        acc += m * term.amplitude;
    }
    return acc;
}

Vec3 initial_once(const InitialField& a, const Point3& x, double t, double tau, const MultiIndex& d, int level,
                  int& pts) {
    Vec3 acc = Vec3::Zero();
    const Vec3 shift = tau * t * e1;
    const double ell = std::sqrt(t);
    for (const auto& term : a.terms) {
        const Support sup = support_of(term);
        pts += space_rule(sup, Vec3(x - shift), ell, level, [&](const Vec3& y, double w) {
            const Vec3 z = x - y - shift;
            double hk;
            if (d.l == 1)
                hk = heat_kernel(z, t, MultiIndex::dt()) - tau * heat_kernel(z, t, MultiIndex::dx(0));
            else
                hk = heat_kernel(z, t, d);
            if (hk != 0.0) acc += (w * hk) * term.eval(y);
        });
    }
    return acc;
}

template <class Eval>
Vec3 with_check(Eval&& ev, const QuadOptions& opts, QuadDiagnostics* diag) {
    int pts = 0;
    Vec3 v = ev(opts.level, pts);
    QuadDiagnostics dg;
    if (opts.check) {
        int p2 = 0;
        const Vec3 fine = ev(opts.level + 1, p2);
        const double scale = fine.norm();
        dg.rel_diff = scale > 0.0 ? (fine - v).norm() / scale : (fine - v).norm();
        dg.converged = dg.rel_diff <= opts.tol;
        pts += p2;
        v = fine;
    }
    dg.points = pts;
    if (diag) *diag = dg;
    return v;
}

}  // namespace

Vec3 eval_volume_potential(const SourceField& f, const Point3& x, double t, double tau, const MultiIndex& d,
                           const QuadOptions& opts, QuadDiagnostics* diag) {
    d.validate();
    if (!(t > 0.0)) throw std::invalid_argument("eval_volume_potential: t must be positive");
    if (d.l == 1 && !(t > f.horizon()))
        throw std::invalid_argument("eval_volume_potential: time derivative needs t past the source horizon");
    if (diag) *diag = QuadDiagnostics{};
    if (f.is_zero()) return Vec3::Zero();
    return with_check([&](int level, int& pts) { return volume_once(f, x, t, tau, d, level, pts); }, opts, diag);
}

Vec3 eval_initial_potential(const InitialField& a, const Point3& x, double t, double tau, const MultiIndex& d,
                            const QuadOptions& opts, QuadDiagnostics* diag) {
    d.validate();
    if (!(t > 0.0)) throw std::invalid_argument("eval_initial_potential: t must be positive");
    if (diag) *diag = QuadDiagnostics{};
    if (a.is_zero()) return Vec3::Zero();
    return with_check([&](int level, int& pts) { return initial_once(a, x, t, tau, d, level, pts); }, opts, diag);
}

// ---------------------------------------------------------------- single layer

Vec3 eval_single_layer(const SurfaceQuadrature& sq, const SurfaceDensity& phi, const Point3& x, double t, double tau,
                       const MultiIndex& d, QuadDiagnostics* diag) {
    d.validate();
    if (!(t > 0.0)) throw std::invalid_argument("eval_single_layer: t must be positive");
    if (phi.mesh.get() != &sq.mesh() && phi.mesh && phi.mesh->size() != sq.mesh().size())
        throw std::invalid_argument("eval_single_layer: density and quadrature use different meshes");
    if (diag) {
        *diag = QuadDiagnostics{};
        diag->near_boundary = sq.distance_to_surface(x) < 2.0 * sq.mesh().h;
    }
    Vec3 acc = Vec3::Zero();
    if (phi.is_zero()) return acc;
    const int n = static_cast<int>(phi.nodes());
    std::vector<Mat3> row;
    if (d.l == 0) {
        const int axis = d.axis();
        for (int k = 0; k < phi.slabs; ++k) {
            const double tk = k * phi.dt;
            if (tk >= t) break;
            const double u0 = std::max(0.0, t - (k + 1) * phi.dt), u1 = t - tk;
            row.assign(static_cast<std::size_t>(n), Mat3::Zero());
            sq.add_row_off_surface(x, TimeKernel::slab(u0, u1, tau, axis), row);
            for (int j = 0; j < n; ++j) acc += row[static_cast<std::size_t>(j)] * phi.at(k, j);
        }
        return acc;
    }
    // d/dt telescopes into the jumps of phi at slab starts
    for (int k = 0; k <= phi.slabs; ++k) {
        const double tk = k * phi.dt;
        if (tk >= t) break;
        row.assign(static_cast<std::size_t>(n), Mat3::Zero());
        sq.add_row_off_surface(x, TimeKernel::pointwise(t - tk, tau), row);
        for (int j = 0; j < n; ++j) {
            Vec3 jump = k < phi.slabs ? phi.at(k, j) : Vec3::Zero();
            if (k > 0) jump -= phi.at(k - 1, j);
            acc += row[static_cast<std::size_t>(j)] * jump;
        }
    }
    return acc;
}

Vec3 eval_single_layer(const SurfaceDensity& phi, const Point3& x, double t, double tau, const MultiIndex& d,
                       QuadDiagnostics* diag) {
    if (!phi.mesh) throw std::invalid_argument("eval_single_layer: density without mesh");
    SurfaceQuadrature sq(phi.mesh);
    return eval_single_layer(sq, phi, x, t, tau, d, diag);
}

Vec3 eval_single_layer_on_surface(const SurfaceQuadrature& sq, const SurfaceDensity& phi, int node, double t,
                                  double tau) {
    if (!(t > 0.0)) throw std::invalid_argument("eval_single_layer_on_surface: t must be positive");
    Vec3 acc = Vec3::Zero();
    if (phi.is_zero()) return acc;
    const int n = static_cast<int>(phi.nodes());
    std::vector<Mat3> row;
    for (int k = 0; k < phi.slabs; ++k) {
        const double tk = k * phi.dt;
        if (tk >= t) break;
        const double u0 = std::max(0.0, t - (k + 1) * phi.dt), u1 = t - tk;
        row.assign(static_cast<std::size_t>(n), Mat3::Zero());
        sq.add_row_on_surface(node, TimeKernel::slab(u0, u1, tau), row);
        for (int j = 0; j < n; ++j) acc += row[static_cast<std::size_t>(j)] * phi.at(k, j);
    }
    return acc;
}

// ---------------------------------------------------------------- convolution probe

double convolution_exponent(double q, double s, double rho, int alpha_order) {
    const double inv_s = std::isinf(s) ? 0.0 : 1.0 / s;
    const double inv_rho = (rho <= 0.0 || std::isinf(rho)) ? 0.0 : 1.0 / rho;
    return 1.0 - 0.5 * alpha_order - 1.5 / q - inv_s + inv_rho;
}

namespace {

double windowed_value(const SourceField& h, const Vec3& x, double t, double tau, int alpha_order, double wlo,
                      double whi, int level) {
    double best = 0.0;
    const int n_axes = alpha_order == 0 ? 1 : 3;
    for (int ax = 0; ax < n_axes; ++ax) {
        const MultiIndex d = alpha_order == 0 ? MultiIndex::value() : MultiIndex::dx(ax);
        Mat3 m = Mat3::Zero();
        int pts = 0;
        for (const auto& term : h.terms)
            m += volume_matrix(term, x, t, tau, wlo, whi, level,
                               [&](const Vec3& z, double u) { return Mat3(oseen_kernel(z, u, tau, d).cwiseAbs()); },
                               pts) *
                 term.amplitude.norm();
        best = std::max(best, m.maxCoeff());
    }
    return best;
}

double windowed_norm(const SourceField& h, double M, bool upper, double rho, double tau, int alpha_order,
                     int level) {
    const double wlo = upper ? M : 0.0;
    const double whi = upper ? std::numeric_limits<double>::infinity() : M;
    const double T0 = h.horizon();
    Vec3 c = Vec3::Zero();
    if (!h.terms.empty() && h.terms.front().kind == SourceTerm::Kind::CompactBump) c = h.terms.front().center;
    if (rho <= 0.0 || std::isinf(rho)) {
        // grid search: the drifted source centre plus offsets on the heat scale
        double best = 0.0;
        const std::vector<double> drifts = upper ? std::vector<double>{M, M + 0.5 * T0}
                                                 : std::vector<double>{0.0, 0.5 * T0, 0.5 * M, M};
        const std::vector<double> times = upper ? std::vector<double>{M + 0.5 * T0, M + T0}
                                                : std::vector<double>{T0, M, M + 0.5 * T0};
        const std::array<Vec3, 3> dirs{e1, Vec3(0.0, 1.0, 0.0), Vec3(-e1)};
        for (double su : drifts)
            for (double t : times)
                for (double r : {0.0, 0.5, 1.0, 1.5, 2.5})
                    for (const Vec3& dir : dirs) {
                        if (r == 0.0 && dir != e1) continue;
                        const Vec3 x = c + tau * su * e1 + r * std::sqrt(M) * dir;
                        best = std::max(best, windowed_value(h, x, t, tau, alpha_order, wlo, whi, level));
                    }
        return best;
    }
    // finite rho: L^rho in t at the source centre, truncated at T0 + 40 M
    const auto tr = time_rule(0.0, T0 + 40.0 * M, 0.25 * std::min(T0, M), scaled(4, level));
    double s = 0.0;
    for (std::size_t q = 0; q < tr.x.size(); ++q)
        s += tr.w[q] * std::pow(windowed_value(h, c, tr.x[q], tau, alpha_order, wlo, whi, level), rho);
    return std::pow(s, 1.0 / rho);
}

}  // namespace

ConvolutionProbe convolution_scaling_probe(double q, double s, double rho, int alpha_order,
                                           std::pair<double, double> M_pair, const SourceField& h, double tau,
                                           int requested_window, const QuadOptions& opts) {
    const bool rho_inf = rho <= 0.0 || std::isinf(rho);
    if (!(q >= 1.0) || std::isinf(q)) throw std::invalid_argument("convolution probe: need q in [1, inf)");
    if (!rho_inf && !(rho > 1.0)) throw std::invalid_argument("convolution probe: need rho in (1, inf]");
    if (!(s >= 1.0)) throw std::invalid_argument("convolution probe: need s in [1, inf]");
    if (!rho_inf && s > rho) throw std::invalid_argument("convolution probe: need s <= rho");
    if (alpha_order < 0 || alpha_order > 1) throw std::invalid_argument("convolution probe: need |alpha| <= 1");
    if (!(M_pair.first > 0.0)) throw std::invalid_argument("convolution probe: M must be positive");
    if (h.is_zero()) throw std::invalid_argument("convolution probe: zero source");
    ConvolutionProbe p;
    p.q = q;
    p.s = s;
    p.rho = rho_inf ? 0.0 : rho;
    p.alpha_order = alpha_order;
    p.predicted_exponent = convolution_exponent(q, s, rho, alpha_order);
    if (p.predicted_exponent == 0.0) throw std::invalid_argument("convolution probe: exponent is zero, no window applies");
    p.window_upper = p.predicted_exponent < 0.0;
    if (requested_window >= 0 && (requested_window == 1) != p.window_upper)
        throw std::invalid_argument(p.window_upper ? "convolution probe: exponent < 0 requires W = (M, inf)"
                                                   : "convolution probe: exponent > 0 requires W = (0, M)");
    p.M0 = M_pair.first;
    p.M1 = M_pair.second > 0.0 ? M_pair.second : 2.0 * M_pair.first;
    p.value0 = windowed_norm(h, p.M0, p.window_upper, rho, tau, alpha_order, opts.level);
    p.value1 = windowed_norm(h, p.M1, p.window_upper, rho, tau, alpha_order, opts.level);
    p.measured_exponent = std::log(p.value1 / p.value0) / std::log(p.M1 / p.M0);
    p.pass = p.measured_exponent <= p.predicted_exponent + 0.1;
    return p;
}

}  // namespace oseen
