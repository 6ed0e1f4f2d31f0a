#include "oseen/surface_quadrature.hpp"

#include "oseen/kernels.hpp"
#include "oseen/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oseen {

namespace {
constexpr int kDuffyPoints = 8;
constexpr int kMaxSubOnSurface = 4;
constexpr int kMaxSubOffSurface = 16;
}  // namespace

TimeKernel TimeKernel::slab(double u0, double u1, double tau, int axis) {
    if (!(u0 >= 0.0) || !(u1 > u0)) throw std::invalid_argument("TimeKernel::slab: need 0 <= u0 < u1");
    TimeKernel k;
    k.mode = Mode::Slab;
    k.u0 = u0;
    k.u1 = u1;
    k.tau = tau;
    k.axis = axis;
    return k;
}

TimeKernel TimeKernel::pointwise(double u, double tau, int axis) {
    if (!(u > 0.0)) throw std::invalid_argument("TimeKernel::pointwise: u must be positive");
    TimeKernel k;
    k.mode = Mode::Pointwise;
    k.u0 = k.u1 = u;
    k.tau = tau;
    k.axis = axis;
    return k;
}

Mat3 TimeKernel::operator()(const Vec3& z) const {
    if (mode == Mode::Pointwise)
        return oseen_kernel(z, u0, tau, axis < 0 ? MultiIndex::value() : MultiIndex::dx(axis));
    if (axis < 0) return oseen_time_integral(z, u0, u1, tau);
    return oseen_time_integral_numeric(z, u0, u1, tau, axis);
}

double TimeKernel::scale() const { return std::sqrt(singular() ? u1 : u0); }

SurfaceQuadrature::SurfaceQuadrature(std::shared_ptr<const BoundaryMesh> mesh) : mesh_(std::move(mesh)) {
    if (!mesh_) throw std::invalid_argument("SurfaceQuadrature: null mesh");
    const int nt = static_cast<int>(mesh_->triangles.size());
    diam_.resize(static_cast<std::size_t>(nt));
    centroid_.resize(static_cast<std::size_t>(nt));
    rule1_.resize(static_cast<std::size_t>(nt));
    rule2_.resize(static_cast<std::size_t>(nt));
    rule4_.resize(static_cast<std::size_t>(nt));
    duffy_.resize(static_cast<std::size_t>(3 * nt));
    for (int k = 0; k < nt; ++k) {
        auto ks = static_cast<std::size_t>(k);
        diam_[ks] = mesh_->triangle_diameter(k);
        centroid_[ks] = mesh_->triangle_centroid(k);
        rule1_[ks] = triangle_rule(k, 1);
        rule2_[ks] = triangle_rule(k, 2);
        rule4_[ks] = triangle_rule(k, 4);
        for (int a = 0; a < 3; ++a) duffy_[3 * ks + static_cast<std::size_t>(a)] = duffy_rule(k, a, kDuffyPoints);
    }
}

SurfaceQuadrature::Rule SurfaceQuadrature::triangle_rule(int k, int m) const {
    Rule r;
    const auto& tri = quad::triangle_rule7();
    const double hs = 1.0 / m;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m - i; ++j) {
            for (int up = 0; up < 2; ++up) {
                if (up == 1 && i + j == m - 1) continue;
                std::array<std::array<double, 2>, 3> v;
                if (up == 0)
                    v = {{{i * hs, j * hs}, {(i + 1) * hs, j * hs}, {i * hs, (j + 1) * hs}}};
                else
                    v = {{{(i + 1) * hs, (j + 1) * hs}, {i * hs, (j + 1) * hs}, {(i + 1) * hs, j * hs}}};
                for (const auto& qp : tri) {
                    double l1 = qp.l0 * v[0][0] + qp.l1 * v[1][0] + qp.l2 * v[2][0];
                    double l2 = qp.l0 * v[0][1] + qp.l1 * v[1][1] + qp.l2 * v[2][1];
                    SurfaceSample s = mesh_->map(k, l1, l2);
                    r.y.push_back(s.y);
                    r.w.push_back(qp.w * 0.5 * hs * hs * s.jac);
                    r.bary.push_back({1.0 - l1 - l2, l1, l2});
                }
            }
        }
    }
    return r;
}

SurfaceQuadrature::Rule SurfaceQuadrature::duffy_rule(int k, int a, int n) const {
    Rule r;
    const auto& g = quad::gauss_legendre(n);
    for (std::size_t p = 0; p < g.x.size(); ++p) {
        const double s = 0.5 * (g.x[p] + 1.0), ws = 0.5 * g.w[p];
        for (std::size_t q = 0; q < g.x.size(); ++q) {
            const double v = 0.5 * (g.x[q] + 1.0), wv = 0.5 * g.w[q];
            std::array<double, 3> lam{};
            lam[static_cast<std::size_t>(a)] = 1.0 - s;
            lam[static_cast<std::size_t>((a + 1) % 3)] = s * (1.0 - v);
            lam[static_cast<std::size_t>((a + 2) % 3)] = s * v;
            SurfaceSample smp = mesh_->map(k, lam[1], lam[2]);
            r.y.push_back(smp.y);
            r.w.push_back(ws * wv * s * smp.jac);
            r.bary.push_back(lam);
        }
    }
    return r;
}

const SurfaceQuadrature::Rule& SurfaceQuadrature::cached(int k, int m) const {
    auto ks = static_cast<std::size_t>(k);
    if (m <= 1) return rule1_[ks];
    if (m == 2) return rule2_[ks];
    return rule4_[ks];
}

double SurfaceQuadrature::distance_to_surface(const Point3& x) const {
    const Shape& s = mesh_->shape;
    const double g = s.gauge(x);
    const double amin = std::min({s.a, s.b, s.c});
    return std::abs(g - 1.0) * amin / std::max(1.0, g);
}

void SurfaceQuadrature::add_row_on_surface(int i, const TimeKernel& k, std::vector<Mat3>& row, double scale) const {
    if (i < 0 || static_cast<std::size_t>(i) >= mesh_->size())
        throw std::out_of_range("add_row_on_surface: node index");
    add_row(mesh_->nodes[static_cast<std::size_t>(i)], i, k, row, scale, 0.0);
}

void SurfaceQuadrature::add_row_off_surface(const Point3& x, const TimeKernel& k, std::vector<Mat3>& row,
                                            double scale) const {
    add_row(x, -1, k, row, scale, distance_to_surface(x));
}

void SurfaceQuadrature::add_row(const Point3& x, int node, const TimeKernel& k, std::vector<Mat3>& row,
                                double scale, double dsurf) const {
    const BoundaryMesh& m = *mesh_;
    const std::size_t n = m.size();
    if (row.size() != n) row.assign(n, Mat3::Zero());
    std::vector<double> wfar(n, 0.0);
    const double ell = k.scale();
    const bool sing = k.singular();
    const int max_sub = node >= 0 ? kMaxSubOnSurface : kMaxSubOffSurface;

    auto apply_rule = [&](const Rule& r, const std::array<int, 3>& tri) {
        for (std::size_t q = 0; q < r.y.size(); ++q) {
            const Mat3 kv = k(x - r.y[q]) * (r.w[q] * scale);
            for (int a = 0; a < 3; ++a) {
                const double l = r.bary[q][static_cast<std::size_t>(a)];
                if (l != 0.0) row[static_cast<std::size_t>(tri[static_cast<std::size_t>(a)])] += l * kv;
            }
        }
    };

    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        const auto& tri = m.triangles[t];
        const double diam = diam_[t];
        int local = -1;
        if (node >= 0)
            for (int a = 0; a < 3; ++a)
                if (tri[static_cast<std::size_t>(a)] == node) local = a;
        if (local >= 0) {
            if (sing || ell < diam)
                apply_rule(duffy_[3 * t + static_cast<std::size_t>(local)], tri);
            else
                apply_rule(cached(static_cast<int>(t), 2), tri);
            continue;
        }
        const double dc = (x - centroid_[t]).norm();
        const double dT = std::max(dc - 0.6 * diam, dsurf);
        const bool far = dT >= 2.0 * diam && (ell >= 3.0 * diam || dT >= 6.0 * ell);
        if (far) {
            const double a3 = m.triangle_area[t] / 3.0;
            for (int v : tri) wfar[static_cast<std::size_t>(v)] += a3;
            continue;
        }
        const double len = std::max(dT, sing ? 0.0 : ell);
        int sub = len > 0.0 ? static_cast<int>(std::ceil(diam / (0.5 * len))) : max_sub;
        sub = std::clamp(sub, 1, max_sub);
        if (sub == 1 || sub == 2 || sub == 4) {
            apply_rule(cached(static_cast<int>(t), sub == 3 ? 4 : sub), tri);
        } else if (sub == 3) {
            apply_rule(cached(static_cast<int>(t), 4), tri);
        } else {
            apply_rule(triangle_rule(static_cast<int>(t), sub), tri);
        }
    }
    for (std::size_t j = 0; j < n; ++j)
        if (wfar[j] > 0.0) row[j] += k(x - m.nodes[j]) * (wfar[j] * scale);
}

}  // namespace oseen
