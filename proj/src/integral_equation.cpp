#include "oseen/integral_equation.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace oseen {

namespace {

TimeKernel lag_kernel(int lag, double dt, double c, double tau) {
    if (lag == 0) return TimeKernel::slab(0.0, c * dt, tau);
    return TimeKernel::slab((lag - 1 + c) * dt, (lag + c) * dt, tau);
}

template <class Fn>
void parallel_rows(int n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 2 * threads) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int i = t; i < n; i += threads) fn(i);
        });
    for (auto& th : pool) th.join();
}

template <class M>
void fill_block(const SurfaceQuadrature& sq, const TimeKernel& k, int threads, M& block) {
    const int n = static_cast<int>(sq.mesh().size());
    parallel_rows(n, threads, [&](int i) {
        std::vector<Mat3> row(static_cast<std::size_t>(n), Mat3::Zero());
        sq.add_row_on_surface(i, k, row);
        for (int j = 0; j < n; ++j)
            block.template block<3, 3>(3 * i, 3 * j) = row[static_cast<std::size_t>(j)].cast<typename M::Scalar>();
    });
}

}  // namespace

VolterraSystem VolterraSystem::assemble(std::shared_ptr<const BoundaryMesh> mesh, double dt, int slabs, double tau,
                                        const VolterraOptions& opts) {
    if (!mesh) throw std::invalid_argument("assemble: null mesh");
    if (!(dt > 0.0) || slabs < 1) throw std::invalid_argument("assemble: need dt > 0 and at least one slab");
    if (!(opts.collocation > 0.0) || opts.collocation > 1.0)
        throw std::invalid_argument("assemble: collocation must lie in (0, 1]");
    VolterraSystem sys;
    sys.sq_ = std::make_shared<SurfaceQuadrature>(mesh);
    sys.dt_ = dt;
    sys.slabs_ = slabs;
    sys.tau_ = tau;
    sys.opts_ = opts;
    const auto n3 = static_cast<Eigen::Index>(3 * mesh->size());

    sys.b0_ = Eigen::MatrixXd::Zero(n3, n3);
    fill_block(*sys.sq_, lag_kernel(0, dt, opts.collocation, tau), opts.threads, sys.b0_);
    if (opts.progress) opts.progress(0, slabs);
    sys.blocks_.resize(static_cast<std::size_t>(slabs - 1));
    for (int lag = 1; lag < slabs; ++lag) {
        auto& b = sys.blocks_[static_cast<std::size_t>(lag - 1)];
        b = Eigen::MatrixXf::Zero(n3, n3);
        fill_block(*sys.sq_, lag_kernel(lag, dt, opts.collocation, tau), opts.threads, b);
        if (opts.progress) opts.progress(lag, slabs);
    }

    // bordered instantaneous block: normal column for the multiplier, flux row
    const double s = sys.b0_.diagonal().cwiseAbs().mean();
    double wmean = 0.0;
    for (double w : mesh->weights) wmean += w;
    wmean /= static_cast<double>(mesh->size());
    sys.border_scale_ = s;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n3 + 1, n3 + 1);
    A.topLeftCorner(n3, n3) = sys.b0_;
    if (opts.tikhonov > 0.0) A.topLeftCorner(n3, n3).diagonal().array() += opts.tikhonov * s;
    for (std::size_t i = 0; i < mesh->size(); ++i)
        for (int a = 0; a < 3; ++a) {
            const auto r = static_cast<Eigen::Index>(3 * i) + a;
            A(r, n3) = s * mesh->normals[i](a);
            A(n3, r) = s * mesh->weights[i] / wmean * mesh->normals[i](a);
        }
    sys.lu_.compute(A);
    const double rc = sys.lu_.rcond();
    sys.cond_ = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    return sys;
}

Eigen::MatrixXd VolterraSystem::block(int lag) const {
    if (lag < 0 || lag >= slabs_) throw std::out_of_range("VolterraSystem::block: lag");
    if (lag == 0) return b0_;
    return blocks_[static_cast<std::size_t>(lag - 1)].cast<double>();
}

Eigen::VectorXd VolterraSystem::apply(const SurfaceDensity& phi) const {
    if (phi.slabs != slabs_ || phi.nodes() != mesh()->size() || std::abs(phi.dt - dt_) > 1e-12 * dt_)
        throw std::invalid_argument("VolterraSystem::apply: density does not match the system");
    const auto n3 = static_cast<Eigen::Index>(unknowns());
    std::vector<Eigen::VectorXd> ph(static_cast<std::size_t>(slabs_), Eigen::VectorXd(n3));
    std::vector<Eigen::VectorXf> phf(static_cast<std::size_t>(slabs_));
    for (int k = 0; k < slabs_; ++k) {
        auto& v = ph[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < mesh()->size(); ++i) v.segment<3>(static_cast<Eigen::Index>(3 * i)) = phi.at(k, static_cast<int>(i));
        phf[static_cast<std::size_t>(k)] = v.cast<float>();
    }
    Eigen::VectorXd out(n3 * slabs_);
    for (int m = 0; m < slabs_; ++m) {
        Eigen::VectorXf acc = Eigen::VectorXf::Zero(n3);
        for (int k = 0; k < m; ++k) acc.noalias() += blocks_[static_cast<std::size_t>(m - k - 1)] * phf[static_cast<std::size_t>(k)];
        out.segment(m * n3, n3) = b0_ * ph[static_cast<std::size_t>(m)] + acc.cast<double>();
    }
    return out;
}

Eigen::VectorXd VolterraSystem::solve_stacked(const Eigen::VectorXd& rhs, std::vector<double>* multipliers) const {
    const auto n3 = static_cast<Eigen::Index>(unknowns());
    if (rhs.size() != n3 * slabs_) throw std::invalid_argument("solve_stacked: rhs size mismatch");
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(n3 * slabs_);
    std::vector<Eigen::VectorXf> phf(static_cast<std::size_t>(slabs_));
    if (multipliers) multipliers->assign(static_cast<std::size_t>(slabs_), 0.0);
    Eigen::VectorXd r(n3 + 1);
    for (int m = 0; m < slabs_; ++m) {
        Eigen::VectorXf acc = Eigen::VectorXf::Zero(n3);
        for (int k = 0; k < m; ++k) acc.noalias() += blocks_[static_cast<std::size_t>(m - k - 1)] * phf[static_cast<std::size_t>(k)];
        r.head(n3) = rhs.segment(m * n3, n3) - acc.cast<double>();
        r(n3) = 0.0;
        const Eigen::VectorXd x = lu_.solve(r);
        if (!x.allFinite()) throw std::runtime_error("solve_stacked: diagonal solve failed");
        phi.segment(m * n3, n3) = x.head(n3);
        phf[static_cast<std::size_t>(m)] = x.head(n3).cast<float>();
        if (multipliers) (*multipliers)[static_cast<std::size_t>(m)] = x(n3) * border_scale_;
    }
    return phi;
}

// ---------------------------------------------------------------- solve

std::string DensitySolveReport::to_json() const {
    nlohmann::json j;
    j["residual"] = residual;
    j["rhs_flux_removed"] = rhs_flux_removed;
    j["flux_violation_max"] = flux_violation.empty() ? 0.0 : *std::max_element(flux_violation.begin(), flux_violation.end());
    j["flux_violation"] = flux_violation;
    j["multipliers"] = multipliers;
    j["diagonal_condition"] = diagonal_condition;
    return j.dump(2);
}

Eigen::VectorXd collocation_rhs(const VolterraSystem& sys, const std::function<Vec3(int, double)>& b) {
    const auto n = static_cast<int>(sys.mesh()->size());
    const Eigen::Index n3 = 3 * n;
    Eigen::VectorXd rhs(n3 * sys.slabs());
    for (int m = 0; m < sys.slabs(); ++m) {
        const double t = sys.collocation_time(m);
        for (int i = 0; i < n; ++i) rhs.segment<3>(m * n3 + 3 * i) = b(i, t);
    }
    return rhs;
}

Eigen::VectorXd collocation_rhs(const VolterraSystem& sys, const BoundaryTrace& b) {
    b.validate();
    if (b.mesh->size() != sys.mesh()->size()) throw std::invalid_argument("collocation_rhs: mesh mismatch");
    return collocation_rhs(sys, [&](int i, double t) { return b.value_at(i, t); });
}

SurfaceDensity solve_density(const VolterraSystem& sys, Eigen::VectorXd rhs, DensitySolveReport* rep) {
    const BoundaryMesh& m = *sys.mesh();
    const auto n = static_cast<Eigen::Index>(m.size());
    const Eigen::Index n3 = 3 * n;
    if (rhs.size() != n3 * sys.slabs()) throw std::invalid_argument("solve_density: rhs size mismatch");
    const double area = m.area();
    double removed = 0.0;
    for (int k = 0; k < sys.slabs(); ++k) {
        double flux = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            flux += m.weights[static_cast<std::size_t>(i)] * m.normals[static_cast<std::size_t>(i)].dot(Vec3(rhs.segment<3>(k * n3 + 3 * i)));
        const double c = flux / area;
        for (Eigen::Index i = 0; i < n; ++i) rhs.segment<3>(k * n3 + 3 * i) -= c * m.normals[static_cast<std::size_t>(i)];
        removed = std::max(removed, std::abs(c) * std::sqrt(area));
    }
    std::vector<double> mult;
    const Eigen::VectorXd x = sys.solve_stacked(rhs, &mult);
    SurfaceDensity phi = SurfaceDensity::zeros(sys.mesh(), sys.dt(), sys.slabs());
    for (int k = 0; k < sys.slabs(); ++k)
        for (Eigen::Index i = 0; i < n; ++i) phi.at(k, static_cast<int>(i)) = x.segment<3>(k * n3 + 3 * i);
    phi.zero_flux = true;
    if (rep) {
        rep->rhs_flux_removed = removed;
        rep->multipliers = mult;
        rep->diagonal_condition = sys.diagonal_condition();
        rep->flux_violation.clear();
        for (int k = 0; k < sys.slabs(); ++k) rep->flux_violation.push_back(std::abs(phi.flux(k)));
        const Eigen::VectorXd res = sys.apply(phi) - rhs;
        double num = 0.0, den = 0.0;
        for (int k = 0; k < sys.slabs(); ++k)
            for (Eigen::Index i = 0; i < n; ++i) {
                const double w = m.weights[static_cast<std::size_t>(i)];
                num += w * res.segment<3>(k * n3 + 3 * i).squaredNorm();
                den += w * rhs.segment<3>(k * n3 + 3 * i).squaredNorm();
            }
        rep->residual = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    }
    return phi;
}

SurfaceDensity solve_density(const VolterraSystem& sys, const BoundaryTrace& b, DensitySolveReport* rep) {
    return solve_density(sys, collocation_rhs(sys, b), rep);
}

Eigen::VectorXd single_layer_trace(const SurfaceQuadrature& sq, const SurfaceDensity& phi,
                                   const std::vector<double>& times, double tau, int threads) {
    const auto n = static_cast<Eigen::Index>(sq.mesh().size());
    if (static_cast<std::size_t>(n) != phi.nodes()) throw std::invalid_argument("single_layer_trace: mesh mismatch");
    const Eigen::Index n3 = 3 * n;
    const double dt = phi.dt;
    struct Pair {
        std::size_t m;
        int k;
    };
    std::map<std::pair<long long, long long>, std::vector<Pair>> groups;
    for (std::size_t m = 0; m < times.size(); ++m)
        for (int k = 0; k < phi.slabs; ++k) {
            const double u1 = times[m] - k * dt;
            if (u1 <= 0.0) break;
            const double u0 = std::max(0.0, u1 - dt);
            groups[{std::llround(u0 / dt * 1e6), std::llround(u1 / dt * 1e6)}].push_back({m, k});
        }
    std::vector<Eigen::VectorXd> src(static_cast<std::size_t>(phi.slabs), Eigen::VectorXd(n3));
    for (int k = 0; k < phi.slabs; ++k)
        for (Eigen::Index i = 0; i < n; ++i) src[static_cast<std::size_t>(k)].segment<3>(3 * i) = phi.at(k, static_cast<int>(i));
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n3 * static_cast<Eigen::Index>(times.size()));
    Eigen::MatrixXd b(n3, n3);
    for (const auto& [key, pairs] : groups) {
        const double u0 = static_cast<double>(key.first) * 1e-6 * dt, u1 = static_cast<double>(key.second) * 1e-6 * dt;
        b.setZero();
        fill_block(sq, TimeKernel::slab(u0, u1, tau), threads, b);
        for (const auto& p : pairs)
            out.segment(static_cast<Eigen::Index>(p.m) * n3, n3).noalias() += b * src[static_cast<std::size_t>(p.k)];
    }
    return out;
}

// ---------------------------------------------------------------- trace consistency

TraceConsistency trace_consistency(const SurfaceQuadrature& sq, const SurfaceDensity& phi,
                                   const std::vector<double>& offsets, double t, double tau,
                                   const std::vector<int>& nodes) {
    if (offsets.size() < 2) throw std::invalid_argument("trace_consistency: need at least two offsets");
    for (std::size_t k = 1; k < offsets.size(); ++k)
        if (!(offsets[k] < offsets[k - 1])) throw std::invalid_argument("trace_consistency: offsets must decrease");
    if (offsets.back() < 0.5 * sq.mesh().h) throw std::invalid_argument("trace_consistency: smallest offset below h/2");
    TraceConsistency out;
    out.offsets = offsets;
    out.nodes = nodes;
    if (out.nodes.empty())
        for (int i = 0; i < static_cast<int>(sq.mesh().size()); ++i) out.nodes.push_back(i);
    const std::size_t no = offsets.size();
    std::vector<double> num(no, 0.0);
    double den = 0.0, num_x = 0.0;
    for (int i : out.nodes) {
        const Vec3 on = eval_single_layer_on_surface(sq, phi, i, t, tau);
        const Vec3& x = sq.mesh().nodes[static_cast<std::size_t>(i)];
        const Vec3& nrm = sq.mesh().normals[static_cast<std::size_t>(i)];
        std::vector<Vec3> v(no);
        for (std::size_t k = 0; k < no; ++k) {
            v[k] = eval_single_layer(sq, phi, Vec3(x + offsets[k] * nrm), t, tau, MultiIndex::value());
            num[k] += (v[k] - on).squaredNorm();
        }
        // Lagrange extrapolation to offset 0
        Vec3 ex = Vec3::Zero();
        for (std::size_t a = 0; a < no; ++a) {
            double l = 1.0;
            for (std::size_t b = 0; b < no; ++b)
                if (b != a) l *= (0.0 - offsets[b]) / (offsets[a] - offsets[b]);
            ex += l * v[a];
        }
        num_x += (ex - on).squaredNorm();
        den += on.squaredNorm();
    }
    const double scale = den > 0.0 ? std::sqrt(den) : 1.0;
    for (double s : num) out.mismatch.push_back(std::sqrt(s) / scale);
    out.extrapolated_mismatch = std::sqrt(num_x) / scale;
    return out;
}

// ---------------------------------------------------------------- tail fit

DecayFit density_tail_fit(const SurfaceDensity& phi, const std::vector<double>& T_list, double zeta, double guard,
                          double tolerance, std::vector<double>* norms) {
    const double t_end = (1.0 - guard) * phi.horizon();
    std::vector<double> x, y;
    for (double T : T_list) {
        if (!(T < t_end)) throw std::invalid_argument("density_tail_fit: T inside the guard band");
        x.push_back(1.0 + T);
        y.push_back(phi.l2_norm(T, t_end));
    }
    if (norms) *norms = y;
    FitOptions fo;
    fo.tolerance = tolerance;
    fo.min_points = 4;
    fo.knee = false;
    if (phi.is_zero()) {
        DecayFit f;
        f.predicted_exponent = -zeta;
        f.tolerance = tolerance;
        f.rejected = true;
        f.note = "zero density";
        return f;
    }
    DecayFit f = fit_decay(x, y, -zeta, fo);
    if (T_list.size() < 4) f.note = "fewer than 4 sample points";
    return f;
}

// ---------------------------------------------------------------- checkpoints

void write_density(std::ostream& os, const SurfaceDensity& phi) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "oseen-density 1 %.17g %d %zu %d\n", phi.dt, phi.slabs, phi.nodes(),
                  phi.zero_flux ? 1 : 0);
    os << buf;
    for (int k = 0; k < phi.slabs; ++k)
        for (std::size_t i = 0; i < phi.nodes(); ++i) {
            const Vec3& v = phi.at(k, static_cast<int>(i));
            std::snprintf(buf, sizeof buf, "%d %zu %.17g %.17g %.17g\n", k, i, v(0), v(1), v(2));
            os << buf;
        }
}

SurfaceDensity read_density(std::istream& is, std::shared_ptr<const BoundaryMesh> mesh) {
    std::string magic;
    int version = 0, slabs = 0, zf = 0;
    double dt = 0.0;
    std::size_t nodes = 0;
    if (!(is >> magic >> version >> dt >> slabs >> nodes >> zf) || magic != "oseen-density" || version != 1)
        throw std::runtime_error("read_density: bad header");
    if (!mesh || mesh->size() != nodes) throw std::runtime_error("read_density: mesh does not match checkpoint");
    SurfaceDensity phi = SurfaceDensity::zeros(std::move(mesh), dt, slabs);
    const std::size_t total = static_cast<std::size_t>(slabs) * nodes;
    for (std::size_t r = 0; r < total; ++r) {
        int k = 0;
        std::size_t i = 0;
        Vec3 v;
        if (!(is >> k >> i >> v(0) >> v(1) >> v(2))) throw std::runtime_error("read_density: truncated file");
        if (k < 0 || k >= slabs || i >= nodes) throw std::runtime_error("read_density: index out of range");
        phi.at(k, static_cast<int>(i)) = v;
    }
    phi.zero_flux = zf != 0;
    return phi;
}

}  // namespace oseen
