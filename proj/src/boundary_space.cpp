#include "oseen/boundary_space.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace oseen {

// ---------------------------------------------------------------- BoundaryTrace

BoundaryTrace BoundaryTrace::zeros(std::shared_ptr<const BoundaryMesh> mesh, std::vector<double> times) {
    if (!mesh) throw std::invalid_argument("BoundaryTrace: null mesh");
    BoundaryTrace tr;
    tr.mesh = std::move(mesh);
    tr.times = std::move(times);
    tr.values.assign(tr.times.size(), std::vector<Vec3>(tr.mesh->size(), Vec3::Zero()));
    tr.validate();
    return tr;
}

void BoundaryTrace::validate() const {
    if (!mesh) throw std::invalid_argument("BoundaryTrace: null mesh");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw std::invalid_argument("BoundaryTrace: times must increase strictly");
    auto check = [&](std::size_t outer, std::size_t inner_of_first, const char* what) {
        if (outer != times.size() || inner_of_first != mesh->size())
            throw std::invalid_argument(std::string("BoundaryTrace: bad shape of ") + what);
    };
    check(values.size(), values.empty() ? mesh->size() : values.front().size(), "values");
    for (const auto& v : values)
        if (v.size() != mesh->size()) throw std::invalid_argument("BoundaryTrace: bad shape of values");
    if (has_dt()) {
        check(dvalues.size(), dvalues.front().size(), "dvalues");
        for (const auto& v : dvalues)
            if (v.size() != mesh->size()) throw std::invalid_argument("BoundaryTrace: bad shape of dvalues");
    }
    if (has_grad()) {
        check(grads.size(), grads.front().size(), "grads");
        for (const auto& v : grads)
            if (v.size() != mesh->size()) throw std::invalid_argument("BoundaryTrace: bad shape of grads");
    }
}

namespace {

/// Segment index k with times[k] <= t < times[k+1] and the linear weight of k+1.
/// Below the first sample returns (0, 0); above the last returns (n-2, 1).
std::pair<std::size_t, double> locate(const std::vector<double>& times, double t) {
    if (times.size() < 2 || t <= times.front()) return {0, 0.0};
    if (t >= times.back()) return {times.size() - 2, 1.0};
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
    return {k, (t - times[k]) / (times[k + 1] - times[k])};
}

template <class T>
std::vector<T> interp_slice(const std::vector<double>& times, const std::vector<std::vector<T>>& data, double t) {
    if (data.empty()) return {};
    if (data.size() == 1) return data.front();
    auto [k, s] = locate(times, t);
    std::vector<T> out(data[k].size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - s) * data[k][i] + s * data[k + 1][i];
    return out;
}

}  // namespace

Vec3 BoundaryTrace::value_at(int node, double t) const {
    if (values.empty()) return Vec3::Zero();
    if (values.size() == 1) return values.front()[static_cast<std::size_t>(node)];
    auto [k, s] = locate(times, t);
    return (1.0 - s) * values[k][static_cast<std::size_t>(node)] + s * values[k + 1][static_cast<std::size_t>(node)];
}

std::vector<Vec3> BoundaryTrace::slice(double t) const { return interp_slice(times, values, t); }
std::vector<Vec3> BoundaryTrace::dslice(double t) const { return interp_slice(times, dvalues, t); }
std::vector<Mat3> BoundaryTrace::grad_slice(double t) const { return interp_slice(times, grads, t); }

// ---------------------------------------------------------------- half derivative

namespace {

template <class Phi, class DPhi>
double abel_impl(const std::vector<double>& times, Phi&& phi, DPhi&& dphi, bool have_dphi, double T, double t) {
    if (!(t > T)) throw std::invalid_argument("half derivative: need t > T");
    if (times.empty()) throw std::invalid_argument("half derivative: empty time grid");
    if (t > times.back() * (1.0 + 1e-12)) throw std::invalid_argument("half derivative: trace ends before t");
    const double m = 0.5 * (t + T);
    auto value = [&](auto&& f, double r) {
        if (times.size() == 1) return f(0);
        auto [k, s] = locate(times, r);
        return (1.0 - s) * f(k) + s * f(k + 1);
    };
    const double A = std::sqrt(2.0 / (t - T)) * value(phi, m);

    // -(1/2) int_0^m (t-r)^{-3/2} phi(r) dr
    double B = 0.0;
    auto seg_b = [&](double a, double b, double fa, double fb) {
        const double ra = t - a, rb = t - b;
        const double I0 = 2.0 * (1.0 / std::sqrt(rb) - 1.0 / std::sqrt(ra));
        const double I1 = ra * I0 - 2.0 * (std::sqrt(ra) - std::sqrt(rb));
        B += fa * I0 + (fb - fa) / (b - a) * I1;
    };
    if (times.front() > 0.0) {
        const double b = std::min(times.front(), m);
        seg_b(0.0, b, phi(0), phi(0));
    }
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double a = times[k];
        if (a >= m) break;
        const double b = std::min(times[k + 1], m);
        seg_b(a, b, phi(k), value(phi, b));
    }
    B *= -0.5;

    // int_m^t (t-r)^{-1/2} phi'(r) dr
    double C = 0.0;
    if (!have_dphi) throw std::invalid_argument("half derivative: missing time-derivative samples on (T, t)");
    auto seg_c = [&](double a, double b, double fa, double fb) {
        const double ra = t - a, rb = t - b;
        const double J0 = 2.0 * (std::sqrt(ra) - std::sqrt(rb));
        const double J1 = ra * J0 - (2.0 / 3.0) * (ra * std::sqrt(ra) - rb * std::sqrt(rb));
        C += fa * J0 + (fb - fa) / (b - a) * J1;
    };
    std::vector<double> br{m};
    for (double tk : times)
        if (tk > m && tk < t) br.push_back(tk);
    br.push_back(t);
    for (std::size_t p = 0; p + 1 < br.size(); ++p) {
        const double a = br[p], b = br[p + 1];
        if (b > a) seg_c(a, b, value(dphi, a), value(dphi, b));
    }
    return A + B + C;
}

}  // namespace

double abel_derivative(const std::vector<double>& times, const std::vector<double>& phi,
                       const std::vector<double>& dphi, double T, double t) {
    if (phi.size() != times.size()) throw std::invalid_argument("abel_derivative: phi size mismatch");
    const bool have = dphi.size() == times.size();
    if (!dphi.empty() && !have) throw std::invalid_argument("abel_derivative: dphi size mismatch");
    return abel_impl(
        times, [&](std::size_t k) { return phi[k]; }, [&](std::size_t k) { return have ? dphi[k] : 0.0; }, have, T,
        t);
}

std::vector<Vec3> half_derivative(const BoundaryTrace& trace, double T, double t) {
    trace.validate();
    const std::size_t n = trace.nodes();
    std::vector<Vec3> out(n, Vec3::Zero());
    const double inv_gamma = 1.0 / std::sqrt(std::numbers::pi);
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) {
            out[i](c) = inv_gamma * abel_impl(
                                        trace.times, [&](std::size_t k) { return trace.values[k][i](c); },
                                        [&](std::size_t k) { return trace.has_dt() ? trace.dvalues[k][i](c) : 0.0; },
                                        trace.has_dt(), T, t);
        }
    return out;
}

// ---------------------------------------------------------------- H1 pieces

namespace {

/// Gradients of the three barycentric functions of flat triangle k, and its area.
std::array<Vec3, 3> p1_gradients(const BoundaryMesh& m, std::size_t k, double& area) {
    const auto& tri = m.triangles[k];
    const Vec3& p0 = m.nodes[static_cast<std::size_t>(tri[0])];
    const Vec3& p1 = m.nodes[static_cast<std::size_t>(tri[1])];
    const Vec3& p2 = m.nodes[static_cast<std::size_t>(tri[2])];
    const Vec3 cr = (p1 - p0).cross(p2 - p0);
    const double a2 = cr.norm();
    area = 0.5 * a2;
    const Vec3 nrm = cr / a2;
    return {nrm.cross(p2 - p1) / a2, nrm.cross(p0 - p2) / a2, nrm.cross(p1 - p0) / a2};
}

Mat3 tangential(const Mat3& G, const Vec3& n) { return G * (Mat3::Identity() - n * n.transpose()); }

}  // namespace

std::vector<Mat3> fem_tangential_gradient(const BoundaryMesh& mesh, const std::vector<Vec3>& values) {
    const std::size_t n = mesh.size();
    if (values.size() != n) throw std::invalid_argument("fem_tangential_gradient: size mismatch");
    std::vector<Mat3> g(n, Mat3::Zero());
    std::vector<double> acc(n, 0.0);
    for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
        double area = 0.0;
        const auto grad = p1_gradients(mesh, k, area);
        Mat3 G = Mat3::Zero();
        for (int a = 0; a < 3; ++a)
            G += values[static_cast<std::size_t>(mesh.triangles[k][static_cast<std::size_t>(a)])] *
                 grad[static_cast<std::size_t>(a)].transpose();
        for (int v : mesh.triangles[k]) {
            g[static_cast<std::size_t>(v)] += area * G;
            acc[static_cast<std::size_t>(v)] += area;
        }
    }
    for (std::size_t i = 0; i < n; ++i) g[i] = tangential(g[i] / acc[i], mesh.normals[i]);
    return g;
}

double h1_boundary_norm(const BoundaryMesh& mesh, const std::vector<Vec3>& values,
                        const std::vector<Mat3>* ambient_grads) {
    const std::size_t n = mesh.size();
    if (values.size() != n) throw std::invalid_argument("h1_boundary_norm: size mismatch");
    std::vector<Mat3> fem;
    if (!ambient_grads) fem = fem_tangential_gradient(mesh, values);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Mat3 G = ambient_grads ? tangential((*ambient_grads)[i], mesh.normals[i]) : fem[i];
        s += mesh.weights[i] * (values[i].squaredNorm() + G.squaredNorm());
    }
    return std::sqrt(s);
}

double h1_boundary_norm(const BoundaryMesh& mesh, const std::vector<double>& values,
                        const std::vector<Vec3>* ambient_grads) {
    std::vector<Vec3> v(values.size(), Vec3::Zero());
    for (std::size_t i = 0; i < v.size(); ++i) v[i](0) = values[i];
    if (!ambient_grads) return h1_boundary_norm(mesh, v, nullptr);
    std::vector<Mat3> g(values.size(), Mat3::Zero());
    for (std::size_t i = 0; i < v.size(); ++i) g[i].row(0) = (*ambient_grads)[i].transpose();
    return h1_boundary_norm(mesh, v, &g);
}

RieszMap::RieszMap(std::shared_ptr<const BoundaryMesh> mesh) : mesh_(std::move(mesh)) {
    if (!mesh_) throw std::invalid_argument("RieszMap: null mesh");
    const auto n = static_cast<Eigen::Index>(mesh_->size());
    std::vector<Eigen::Triplet<double>> trips;
    for (Eigen::Index i = 0; i < n; ++i) trips.emplace_back(i, i, mesh_->weights[static_cast<std::size_t>(i)]);
    for (std::size_t k = 0; k < mesh_->triangles.size(); ++k) {
        double area = 0.0;
        const auto g = p1_gradients(*mesh_, k, area);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                trips.emplace_back(mesh_->triangles[k][static_cast<std::size_t>(a)],
                                   mesh_->triangles[k][static_cast<std::size_t>(b)],
                                   area * g[static_cast<std::size_t>(a)].dot(g[static_cast<std::size_t>(b)]));
    }
    A_.resize(n, n);
    A_.setFromTriplets(trips.begin(), trips.end());
    ldlt_.compute(A_);
    if (ldlt_.info() != Eigen::Success) throw std::runtime_error("RieszMap: factorization failed");
    double lmax = 0.0;
    for (Eigen::Index c = 0; c < A_.outerSize(); ++c) {
        double row = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(A_, c); it; ++it) row += std::abs(it.value());
        lmax = std::max(lmax, row);
    }
    const double wmin = *std::min_element(mesh_->weights.begin(), mesh_->weights.end());
    cond_ = lmax / wmin;
}

Eigen::VectorXd RieszMap::apply(const Eigen::VectorXd& g) const {
    if (g.size() != A_.rows()) throw std::invalid_argument("RieszMap: load size mismatch");
    return ldlt_.solve(g);
}

double RieszMap::dual_norm(const Eigen::VectorXd& g) const { return std::sqrt(std::max(0.0, g.dot(apply(g)))); }

double RieszMap::dual_norm(const std::vector<Vec3>& g) const {
    double s = 0.0;
    Eigen::VectorXd gc(A_.rows());
    for (int c = 0; c < 3; ++c) {
        for (Eigen::Index i = 0; i < gc.size(); ++i) gc(i) = g[static_cast<std::size_t>(i)](c);
        s += gc.dot(apply(gc));
    }
    return std::sqrt(std::max(0.0, s));
}

double RieszMap::discrete_h1_norm(const Eigen::VectorXd& v) const { return std::sqrt(v.dot(A_ * v)); }

std::shared_ptr<const RieszMap> RieszMap::for_mesh(std::shared_ptr<const BoundaryMesh> mesh) {
    static std::mutex mu;
    static std::map<const BoundaryMesh*, std::pair<std::weak_ptr<const BoundaryMesh>, std::shared_ptr<const RieszMap>>>
        cache;
    std::lock_guard<std::mutex> lock(mu);
    for (auto it = cache.begin(); it != cache.end();) {
        if (it->second.first.expired())
            it = cache.erase(it);
        else
            ++it;
    }
    auto it = cache.find(mesh.get());
    if (it != cache.end()) return it->second.second;
    auto r = std::make_shared<const RieszMap>(mesh);
    cache[mesh.get()] = {mesh, r};
    return r;
}

double h1_dual_norm(std::shared_ptr<const BoundaryMesh> mesh, const std::vector<Vec3>& density) {
    if (density.size() != mesh->size()) throw std::invalid_argument("h1_dual_norm: size mismatch");
    std::vector<Vec3> g(density.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = mesh->weights[i] * density[i];
    return RieszMap::for_mesh(mesh)->dual_norm(g);
}

double h1_dual_norm(std::shared_ptr<const BoundaryMesh> mesh, const Eigen::VectorXd& load) {
    return RieszMap::for_mesh(mesh)->dual_norm(load);
}

// ---------------------------------------------------------------- tail norm

namespace {

/// Least-squares slope and intercept of log y against log x over positive samples.
bool loglog_fit(const std::vector<double>& x, const std::vector<double>& y, double& slope, double& icpt) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(y[i] > 0.0) || !(x[i] > 0.0)) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 3) return false;
    const double den = n * sxx - sx * sx;
    if (den <= 0.0) return false;
    slope = (n * sxy - sx * sy) / den;
    icpt = (sy - slope * sx) / n;
    return true;
}

}  // namespace

HTailNorm h_tail_norm(const BoundaryTrace& trace, double T, const TailOptions& opts) {
    trace.validate();
    if (!trace.has_dt()) throw std::invalid_argument("h_tail_norm: trace needs time-derivative samples");
    if (trace.times.empty() || !(T < trace.times.back())) throw std::invalid_argument("h_tail_norm: T beyond trace");
    if (!(T > opts.smooth_after)) throw std::invalid_argument("h_tail_norm: T must exceed smooth_after");
    const BoundaryMesh& mesh = *trace.mesh;
    const std::size_t n = mesh.size();
    auto riesz = RieszMap::for_mesh(trace.mesh);

    std::vector<double> ts{T};
    for (double tk : trace.times)
        if (tk > T * (1.0 + 1e-12)) ts.push_back(tk);
    const std::size_t ns = ts.size();
    std::array<std::vector<double>, 3> part;
    for (auto& p : part) p.assign(ns, 0.0);

    Eigen::VectorXd load(static_cast<Eigen::Index>(n));
    for (std::size_t s = 0; s < ns; ++s) {
        const double t = ts[s];
        const auto v = trace.slice(t);
        const auto dv = trace.dslice(t);
        std::vector<Mat3> g;
        if (trace.has_grad()) g = trace.grad_slice(t);
        const double h1 = h1_boundary_norm(mesh, v, trace.has_grad() ? &g : nullptr);
        part[0][s] = h1 * h1;
        const double Ts = std::max(opts.smooth_after, 0.5 * t);
        double hd = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Vec3 w;
            for (int c = 0; c < 3; ++c)
                w(c) = abel_impl(
                    trace.times, [&](std::size_t k) { return trace.values[k][i](c); },
                    [&](std::size_t k) { return trace.dvalues[k][i](c); }, true, Ts, t);
            hd += mesh.weights[i] * w.squaredNorm();
        }
        part[1][s] = hd;
        for (std::size_t i = 0; i < n; ++i)
            load(static_cast<Eigen::Index>(i)) = mesh.weights[i] * mesh.normals[i].dot(dv[i]);
        const double dn = riesz->dual_norm(load);
        part[2][s] = dn * dn;
    }

    HTailNorm out;
    out.T = T;
    out.T_max = ts.back();
    std::array<double, 3> integral{0.0, 0.0, 0.0}, tail{0.0, 0.0, 0.0};
    for (int p = 0; p < 3; ++p)
        for (std::size_t s = 0; s + 1 < ns; ++s)
            integral[static_cast<std::size_t>(p)] += 0.5 * (ts[s + 1] - ts[s]) * (part[static_cast<std::size_t>(p)][s] + part[static_cast<std::size_t>(p)][s + 1]);

    // power-law tail beyond the last sample, fitted on the trailing samples
    const std::size_t nfit = std::max<std::size_t>(4, static_cast<std::size_t>(opts.fit_fraction * static_cast<double>(ns)));
    double worst_power = std::numeric_limits<double>::infinity();
    if (ns >= nfit) {
        const std::vector<double> xf(ts.end() - static_cast<std::ptrdiff_t>(nfit), ts.end());
        for (int p = 0; p < 3; ++p) {
            const auto& y = part[static_cast<std::size_t>(p)];
            if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) continue;
            const std::vector<double> yf(y.end() - static_cast<std::ptrdiff_t>(nfit), y.end());
            double slope = 0.0, icpt = 0.0;
            if (!loglog_fit(xf, yf, slope, icpt) || -slope <= 1.0) {
                out.decaying = false;
                worst_power = std::min(worst_power, -slope);
                continue;
            }
            const double pw = -slope;
            worst_power = std::min(worst_power, pw);
            tail[static_cast<std::size_t>(p)] = std::exp(icpt) * std::pow(ts.back(), 1.0 - pw) / (pw - 1.0);
        }
    } else {
        out.decaying = false;
    }
    out.fit_power = std::isinf(worst_power) ? 0.0 : worst_power;
    double total2 = 0.0, tail2 = 0.0;
    for (int p = 0; p < 3; ++p) {
        total2 += integral[static_cast<std::size_t>(p)] + tail[static_cast<std::size_t>(p)];
        tail2 += tail[static_cast<std::size_t>(p)];
    }
    out.h1_part = std::sqrt(integral[0] + tail[0]);
    out.half_derivative_part = std::sqrt(integral[1] + tail[1]);
    out.normal_dt_dual_part = std::sqrt(integral[2] + tail[2]);
    out.total = std::sqrt(total2);
    out.tail_fraction = total2 > 0.0 ? tail2 / total2 : 0.0;
    if (total2 == 0.0) out.decaying = true;
    return out;
}

// ---------------------------------------------------------------- zero flux

double nodal_flux(const BoundaryMesh& mesh, const std::vector<Vec3>& values) {
    double s = 0.0;
    for (std::size_t i = 0; i < mesh.size(); ++i) s += mesh.weights[i] * mesh.normals[i].dot(values[i]);
    return s;
}

double project_zero_flux_inplace(SurfaceDensity& density) {
    const BoundaryMesh& m = *density.mesh;
    const double area = m.area();
    double removed = 0.0;
    for (int k = 0; k < density.slabs; ++k) {
        const double c = density.flux(k) / area;
        for (std::size_t i = 0; i < m.size(); ++i) density.at(k, static_cast<int>(i)) -= c * m.normals[i];
        removed += density.dt * c * c * area;
    }
    density.zero_flux = true;
    return std::sqrt(removed);
}

SurfaceDensity project_zero_flux(const SurfaceDensity& density) {
    SurfaceDensity out = density;
    project_zero_flux_inplace(out);
    return out;
}

double project_zero_flux_inplace(BoundaryTrace& trace) {
    const BoundaryMesh& m = *trace.mesh;
    const double area = m.area();
    double removed = 0.0;
    for (auto& slice : trace.values) {
        const double c = nodal_flux(m, slice) / area;
        for (std::size_t i = 0; i < m.size(); ++i) slice[i] -= c * m.normals[i];
        removed = std::max(removed, std::abs(c) * std::sqrt(area));
    }
    return removed;
}

}  // namespace oseen
