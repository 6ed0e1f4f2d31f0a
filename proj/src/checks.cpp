#include "oseen/checks.hpp"

#include "oseen/boundary_space.hpp"
#include "oseen/kernels.hpp"
#include "oseen/potentials.hpp"
#include "oseen/quadrature.hpp"
#include "oseen/random.hpp"

#include <cmath>
#include <tuple>
#include <stdexcept>

namespace oseen {

void CheckRow::evaluate() {
    pass = std::isfinite(measured) &&
           (upper_bound ? measured <= predicted + tolerance : std::abs(measured - predicted) <= tolerance);
}

namespace {

CheckRow make_row(std::string name, std::string tag, double predicted, double measured, double tol, bool upper) {
    CheckRow r{std::move(name), std::move(tag), predicted, measured, tol, upper, false};
    r.evaluate();
    return r;
}

Vec3 random_point(Rng& rng, double rmin, double rmax) {
    Vec3 d(rng.normal(), rng.normal(), rng.normal());
    d.normalize();
    return d * rng.uniform(rmin, rmax);
}

// int_0^U Gamma(z,u) du with u = s^2 on uniform Gauss panels in s
Mat3 panel_time_integral(const Point3& z, double U) {
    const double S = std::sqrt(U);
    const int panels = 400;
    Mat3 acc = Mat3::Zero();
    for (int p = 0; p < panels; ++p) {
        const auto rule = quad::gauss_on(S * p / panels, S * (p + 1) / panels, 8);
        for (std::size_t k = 0; k < rule.x.size(); ++k) {
            const double s = rule.x[k];
            if (s <= 0.0) continue;
            acc += rule.w[k] * 2.0 * s * stokes_kernel(z, s * s, MultiIndex::value());
        }
    }
    return acc;
}

}  // namespace

std::vector<CheckRow> kernel_checks(std::uint64_t seed, int div_points, int integral_points) {
    std::vector<CheckRow> rows;
    for (double t : {0.1, 1.0, 10.0}) {
        const double R = 14.0 * std::sqrt(t);
        double m = 0.0;
        for (int p = 0; p < 40; ++p) {
            const auto rule = quad::gauss_on(R * p / 40, R * (p + 1) / 40, 10);
            for (std::size_t k = 0; k < rule.x.size(); ++k) {
                const double r = rule.x[k];
                m += rule.w[k] * 4.0 * M_PI * r * r * heat_kernel(Vec3(r, 0, 0), t, MultiIndex::value());
            }
        }
        rows.push_back(make_row("heat mass t=" + std::to_string(t).substr(0, 4), "kernel-mass", 1.0, m, 1e-6, false));
    }

    Rng rng(seed);
    double div_g = 0.0, div_l = 0.0;
    for (int n = 0; n < div_points; ++n) {
        const Vec3 z = random_point(rng, 0.05, 3.0);
        const double t = rng.uniform(0.05, 3.0);
        const double tau = rng.uniform(0.1, 2.0);
        std::array<Mat3, 3> g, l;
        double scale_g = 0.0, scale_l = 0.0;
        for (int j = 0; j < 3; ++j) {
            g[static_cast<std::size_t>(j)] = stokes_kernel(z, t, MultiIndex::dx(j));
            l[static_cast<std::size_t>(j)] = oseen_kernel(z, t, tau, MultiIndex::dx(j));
            scale_g = std::max(scale_g, g[static_cast<std::size_t>(j)].cwiseAbs().maxCoeff());
            scale_l = std::max(scale_l, l[static_cast<std::size_t>(j)].cwiseAbs().maxCoeff());
        }
        for (int k = 0; k < 3; ++k) {
            double sg = 0.0, sl = 0.0;
            for (int j = 0; j < 3; ++j) {
                sg += g[static_cast<std::size_t>(j)](j, k);
                sl += l[static_cast<std::size_t>(j)](j, k);
            }
            div_g = std::max(div_g, std::abs(sg) / scale_g);
            div_l = std::max(div_l, std::abs(sl) / scale_l);
        }
    }
    rows.push_back(make_row("div Gamma (relative, max)", "kernel-divergence", 0.0, div_g, 1e-6, true));
    rows.push_back(make_row("div Lambda (relative, max)", "kernel-divergence", 0.0, div_l, 1e-6, true));

    double worst = 0.0;
    for (int n = 0; n < integral_points; ++n) {
        const Vec3 z = random_point(rng, 0.05, 3.0);
        const double U = rng.uniform(0.05, 5.0);
        const Mat3 a = stokes_time_integral(z, U);
        const Mat3 b = panel_time_integral(z, U);
        worst = std::max(worst, (a - b).norm() / b.norm());
    }
    rows.push_back(make_row("closed-form time integral vs panels (relative, max)", "kernel-time-integral", 0.0, worst,
                            1e-6, true));
    return rows;
}

std::vector<CheckRow> fractional_checks() {
    std::vector<CheckRow> rows;
    std::vector<double> ts;
    for (double t = 0.01; t <= 100.0001; t *= 1.01) ts.push_back(t);
    std::vector<double> one(ts.size(), 1.0), zero(ts.size(), 0.0);
    double worst = 0.0;
    for (double t = 1.0; t <= 100.0; t *= 1.2) {
        const double v = abel_derivative(ts, one, zero, 0.5 * t, t) / std::sqrt(M_PI);
        worst = std::max(worst, std::abs(v * std::sqrt(M_PI * t) - 1.0));
    }
    rows.push_back(make_row("half derivative of 1 vs (pi t)^-1/2 on [1,100]", "half-derivative", 0.0, worst, 1e-3, true));

    std::vector<double> g2;
    for (double t = 0.0; t <= 4.0001; t += 0.002) g2.push_back(t);
    std::vector<double> p2, dp2;
    for (double t : g2) {
        p2.push_back(t * t);
        dp2.push_back(2.0 * t);
    }
    std::vector<double> h(g2.size(), 0.0), dh(g2.size(), 0.0);
    for (std::size_t k = 1; k < g2.size(); ++k) h[k] = abel_derivative(g2, p2, dp2, 0.5 * g2[k], g2[k]) / std::sqrt(M_PI);
    for (std::size_t k = 0; k < g2.size(); ++k) {
        const std::size_t a = k ? k - 1 : 0, b = k + 1 < g2.size() ? k + 1 : k;
        dh[k] = (h[b] - h[a]) / (g2[b] - g2[a]);
    }
    worst = 0.0;
    for (double t : {1.0, 2.0, 3.0}) {
        const double v = abel_derivative(g2, h, dh, 0.5 * t, t) / std::sqrt(M_PI);
        worst = std::max(worst, std::abs(v / (2.0 * t) - 1.0));
    }
    rows.push_back(make_row("half of half of t^2 vs 2t", "half-derivative", 0.0, worst, 0.01, true));
    return rows;
}

std::vector<CheckRow> convolution_checks() {
    std::vector<CheckRow> rows;
    const auto h = SourceField::compact_bump(Vec3::Zero(), 0.25, 0.1, Vec3(1, 0, 0));
    bool rejected = false;
    try {
        convolution_scaling_probe(1, 1, 0, 0, {1, 2}, h, 1.0, 0);
    } catch (const std::invalid_argument&) {
        rejected = true;
    }
    rows.push_back(make_row("q=1 s=1 rho=inf alpha=0 on (0,M) rejected", "convolution", 1.0, rejected ? 1.0 : 0.0,
                            0.0, false));
    for (auto [q, s, a] : {std::tuple{4.0, 4.0, 0}, std::tuple{1.0, 1.0, 1}}) {
        const auto p = convolution_scaling_probe(q, s, 0, a, {1, 2}, h);
        rows.push_back(make_row("q=" + std::to_string(static_cast<int>(q)) + " s=" + std::to_string(static_cast<int>(s)) +
                                    " rho=inf |alpha|=" + std::to_string(a) + " log2 ratio",
                                "convolution", p.predicted_exponent, p.measured_exponent, 0.1, true));
    }
    return rows;
}

std::vector<CheckRow> potential_checks(double tau) {
    std::vector<CheckRow> rows;
    const auto a = InitialField::vector_bump(Vec3(0, 2.5, 0), 1.0, Vec3(0, 0, 1));
    const double t = 10.0;
    const Vec3 x = Vec3(0, 2.5, 0) + tau * t * Vec3(1, 0, 0);
    const Vec3 v = eval_initial_potential(a, x, t, tau, MultiIndex::value());
    rows.push_back(make_row("I(a) at the co-moving centre vs mass (4 pi t)^-3/2", "initial-mass", 1.0,
                            v(2) * std::pow(4.0 * M_PI * t, 1.5) / a.mean()(2), 0.01, false));

    const auto f = SourceField::compact_bump(Vec3(0, 2.5, 0), 1.0, 1.0, Vec3(1, 0, 0));
    QuadOptions o;
    o.check = true;
    QuadDiagnostics d;
    eval_volume_potential(f, Vec3(40, 0, 0), 5.0, tau, MultiIndex::value(), o, &d);
    rows.push_back(make_row("R(f) quadrature self-convergence", "volume-quadrature", 0.0, d.rel_diff, o.tol, true));
    return rows;
}

}  // namespace oseen
