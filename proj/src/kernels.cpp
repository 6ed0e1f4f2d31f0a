#include "oseen/kernels.hpp"

#include "oseen/quadrature.hpp"
#include "oseen/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oseen {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInvSqrtPi = 0.5641895835477562869;  // 1/sqrt(pi)
constexpr double kTwoOverSqrtPi = 2.0 * kInvSqrtPi;
constexpr double kC = 1.0 / (4.0 * kPi);

void check_time(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("kernel: t must be positive and finite");
}

void check_point(const Point3& z) {
    if (!z.allFinite()) throw std::invalid_argument("kernel: z must be finite");
}

/// P, Q, U of the erf potential; series below s = 1 where the closed forms cancel.
void erf_potential_pqu(double s, double& P, double& Q, double& U) {
    if (s < 1.0) {
        const double x = s * s;
        P = Q = U = 0.0;
        double fact = 1.0;   // n!
        double sign = -1.0;  // (-1)^n
        double pp = 1.0, pq = 1.0, pu = 1.0;  // x^(n-1), x^(n-2), x^(n-3) once active
        for (int n = 1; n <= 30; ++n) {
            fact *= n;
            const double e = kTwoOverSqrtPi * sign / (fact * (2.0 * n + 1.0));
            const double n2 = 2.0 * n;
            P += n2 * e * pp;
            if (n >= 2) Q += n2 * (n2 - 2.0) * e * pq;
            if (n >= 3) U += n2 * (n2 - 2.0) * (n2 - 4.0) * e * pu;
            if (n >= 5 && std::abs(e) * pp < 1e-22) break;
            sign = -sign;
            pp *= x;
            if (n >= 2) pq *= x;
            if (n >= 3) pu *= x;
        }
        return;
    }
    const double E = std::exp(-s * s), er = std::erf(s);
    const double s2 = s * s, s3 = s2 * s, s4 = s2 * s2;
    P = kTwoOverSqrtPi * E / s2 - er / s3;
    Q = kTwoOverSqrtPi * E * (-2.0 / s2 - 3.0 / s4) + 3.0 * er / (s4 * s);
    U = kTwoOverSqrtPi * E * (4.0 / s2 + 10.0 / s4 + 15.0 / (s4 * s2)) - 15.0 * er / (s4 * s3);
}

Mat3 sym_from(const std::array<double, 6>& u) {
    Mat3 m;
    m(0, 0) = u[0];
    m(0, 1) = m(1, 0) = u[1];
    m(0, 2) = m(2, 0) = u[2];
    m(1, 1) = u[3];
    m(1, 2) = m(2, 1) = u[4];
    m(2, 2) = u[5];
    return m;
}

constexpr std::array<std::array<int, 2>, 6> kPairs = {{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};

Mat3 gamma_value(const Point3& z, const StokesCoefficients& c) {
    std::array<double, 6> u{};
    for (std::size_t p = 0; p < 6; ++p) {
        int j = kPairs[p][0], k = kPairs[p][1];
        u[p] = c.g * z[j] * z[k] + (j == k ? c.h + c.f : 0.0);
    }
    return sym_from(u);
}

Mat3 gamma_grad(const Point3& z, const StokesCoefficients& c, int i) {
    std::array<double, 6> u{};
    const double a2 = c.a * c.a;
    for (std::size_t p = 0; p < 6; ++p) {
        int j = kPairs[p][0], k = kPairs[p][1];
        double v = c.w * z[i] * z[j] * z[k];
        if (j == k) v += -2.0 * a2 * z[i] * c.h + c.g * z[i];
        if (i == j) v += c.g * z[k];
        if (i == k) v += c.g * z[j];
        u[p] = v;
    }
    return sym_from(u);
}

Mat3 gamma_dt(const Point3& z, const StokesCoefficients& c) {
    std::array<double, 6> u{};
    const double a2 = c.a * c.a, a4 = a2 * a2;
    const double r2 = z.squaredNorm();
    for (std::size_t p = 0; p < 6; ++p) {
        int j = kPairs[p][0], k = kPairs[p][1];
        double v = -c.h * 4.0 * a4 * z[j] * z[k];
        if (j == k) v += c.h * (4.0 * a4 * r2 - 6.0 * a2) + c.h * 2.0 * a2;
        u[p] = v;
    }
    return sym_from(u);
}

}  // namespace

StokesCoefficients stokes_coefficients(double r, double t) {
    StokesCoefficients c{};
    c.a = 0.5 / std::sqrt(t);
    const double s = c.a * r;
    const double a3 = c.a * c.a * c.a;
    c.h = a3 * kInvSqrtPi * kInvSqrtPi * kInvSqrtPi * std::exp(-s * s);
    double P, Q, U;
    erf_potential_pqu(s, P, Q, U);
    const double a2 = c.a * c.a;
    c.f = kC * a3 * P;
    c.g = kC * a3 * a2 * Q;
    c.w = kC * a3 * a2 * a2 * U;
    return c;
}

double heat_kernel(const Point3& z, double t, const MultiIndex& d) {
    d.validate();
    check_time(t);
    check_point(z);
    const double r2 = z.squaredNorm();
    const double h = std::pow(4.0 * kPi * t, -1.5) * std::exp(-r2 / (4.0 * t));
    if (d.l == 1) return h * (r2 / (4.0 * t * t) - 1.5 / t);
    int ax = d.axis();
    if (ax >= 0) return -z[ax] / (2.0 * t) * h;
    return h;
}

StokesJet stokes_jet(const Point3& z, double t) {
    check_time(t);
    check_point(z);
    const StokesCoefficients c = stokes_coefficients(z.norm(), t);
    StokesJet j;
    j.value = gamma_value(z, c);
    for (int i = 0; i < 3; ++i) j.grad[static_cast<std::size_t>(i)] = gamma_grad(z, c, i);
    j.dt = gamma_dt(z, c);
    return j;
}

Mat3 stokes_kernel(const Point3& z, double t, const MultiIndex& d) {
    d.validate();
    check_time(t);
    check_point(z);
    const StokesCoefficients c = stokes_coefficients(z.norm(), t);
    if (d.l == 1) return gamma_dt(z, c);
    int ax = d.axis();
    if (ax >= 0) return gamma_grad(z, c, ax);
    return gamma_value(z, c);
}

Mat3 oseen_kernel(const Point3& z, double t, double tau, const MultiIndex& d) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("oseen_kernel: tau must be >= 0");
    if (tau == 0.0) return stokes_kernel(z, t, d);
    d.validate();
    check_time(t);
    check_point(z);
    const Point3 zs = z - t * tau * e1;
    const StokesCoefficients c = stokes_coefficients(zs.norm(), t);
    if (d.l == 1) return gamma_dt(zs, c) - tau * gamma_grad(zs, c, 0);
    int ax = d.axis();
    if (ax >= 0) return gamma_grad(zs, c, ax);
    return gamma_value(zs, c);
}

Mat3 stokes_time_integral(const Point3& z, double U) {
    check_time(U);
    check_point(z);
    const double r = z.norm();
    if (!(r > 0.0)) throw std::invalid_argument("stokes_time_integral: z must be nonzero");
    const double rho = r / (2.0 * std::sqrt(U));
    double J;
    if (rho < 1.0) {
        const double x = rho * rho;
        J = 0.0;
        double fact = 1.0, pw = rho, sign = -1.0;
        for (int n = 1; n <= 30; ++n) {
            fact *= n;
            double term = sign * 2.0 * n * pw / (fact * (2.0 * n + 1.0));
            J += term;
            if (n >= 3 && std::abs(term) < 1e-19) break;
            sign = -sign;
            pw *= x;
        }
        J *= 0.5 * kInvSqrtPi;
    } else {
        J = std::exp(-rho * rho) * 0.5 * kInvSqrtPi / rho - std::erf(rho) / (4.0 * rho * rho);
    }
    const double ec = std::erfc(rho);
    const double alpha = 0.5 * ec + J;
    const double beta = 0.5 * ec - 3.0 * J;
    const double s = kC / r;
    std::array<double, 6> u{};
    for (std::size_t p = 0; p < 6; ++p) {
        int j = kPairs[p][0], k = kPairs[p][1];
        u[p] = s * (beta * z[j] * z[k] / (r * r) + (j == k ? alpha : 0.0));
    }
    return sym_from(u);
}

Mat3 oseen_time_integral_numeric(const Point3& z, double u0, double u1, double tau, int axis) {
    if (!(u1 > u0) || u0 < 0.0) throw std::invalid_argument("oseen_time_integral: need 0 <= u0 < u1");
    const double r2 = z.squaredNorm();
    if (u0 == 0.0 && r2 == 0.0) throw std::invalid_argument("oseen_time_integral: z = 0 with u0 = 0");
    const double min_w = std::max({u0, 1e-3 * r2, 1e-14 * u1});
    const auto rule = quad::graded_toward_left(u0, u1, min_w, 4);
    const MultiIndex d = axis < 0 ? MultiIndex::value() : MultiIndex::dx(axis);
    Mat3 acc = Mat3::Zero();
    for (std::size_t q = 0; q < rule.x.size(); ++q) acc += rule.w[q] * oseen_kernel(z, rule.x[q], tau, d);
    return acc;
}

Mat3 oseen_time_integral(const Point3& z, double u0, double u1, double tau) {
    if (!(u1 > u0) || u0 < 0.0) throw std::invalid_argument("oseen_time_integral: need 0 <= u0 < u1");
    if (u0 > 0.0) return oseen_time_integral_numeric(z, u0, u1, tau, -1);
    Mat3 g = stokes_time_integral(z, u1);
    if (tau == 0.0) return g;
    // Drift correction: bounded near z = 0, smooth on each dyadic panel.
    const double r2 = z.squaredNorm();
    const auto rule = quad::graded_toward_left(0.0, u1, std::max(1e-3 * r2, 1e-14 * u1), 4);
    const MultiIndex v = MultiIndex::value();
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
        const double u = rule.x[q];
        g += rule.w[q] * (oseen_kernel(z, u, tau, v) - stokes_kernel(z, u, v));
    }
    return g;
}

InequalityReport kernel_bound_report(double tau, double K, int sample_count, std::uint64_t seed) {
    if (!(K > 0.0)) throw std::invalid_argument("kernel_bound_report: K must be positive");
    if (sample_count < 1) throw std::invalid_argument("kernel_bound_report: sample_count must be positive");
    const std::array<MultiIndex, 5> ds = {MultiIndex::value(), MultiIndex::dx(0), MultiIndex::dx(1),
                                          MultiIndex::dx(2), MultiIndex::dt()};
    InequalityReport rep;
    for (int region = 0; region < 2; ++region) {
        for (std::size_t di = 0; di < ds.size(); ++di) {
            const MultiIndex& d = ds[di];
            Rng rng(seed + 101 * di + 17 * static_cast<std::uint64_t>(region));
            double sup_n = 0.0, sup_2n = 0.0;
            for (int i = 0; i < 2 * sample_count; ++i) {
                double zz = 2.0 * rng.uniform() - 1.0, ph = 2.0 * kPi * rng.uniform();
                double sn = std::sqrt(std::max(0.0, 1.0 - zz * zz));
                Vec3 dir(sn * std::cos(ph), sn * std::sin(ph), zz);
                double t = 1e-3 * std::pow(1e6, rng.uniform());
                double rad = region == 0 ? K * std::pow(1e-3, rng.uniform()) : K * std::pow(1e3, rng.uniform());
                Vec3 z = rad * dir;
                if (region == 1 && rng.uniform() < 0.3) {
                    // wake samples near the drifted pole
                    Vec3 cand = tau * t * e1 + dir * std::sqrt(t) * rng.uniform(0.0, 3.0);
                    if (cand.norm() > K) z = cand;
                }
                double gamma = z.norm() <= K ? z.squaredNorm() : z.norm() * wake_weight(z);
                double ex = -1.5 - 0.5 * d.spatial_order() - d.l;
                double bound = std::pow(gamma + t, ex) + (d.l == 1 ? std::pow(gamma + t, -2.0) : 0.0);
                double val = oseen_kernel(z, t, tau, d).cwiseAbs().maxCoeff();
                double ratio = val / bound;
                if (i < sample_count) sup_n = std::max(sup_n, ratio);
                sup_2n = std::max(sup_2n, ratio);
            }
            InequalityEntry e;
            e.tag = std::string("kernel-bound:") + d.label() + (region == 0 ? ":inner" : ":outer");
            e.name = "|d Lambda| / (gamma_K + t)^exponent";
            e.note = "tau=" + std::to_string(tau) + " K=" + std::to_string(K);
            e.sup_n = sup_n;
            e.sup_2n = sup_2n;
            e.diverged = !std::isfinite(sup_2n) || sup_2n > 1.1 * sup_n;
            rep.entries.push_back(e);
        }
    }
    return rep;
}

}  // namespace oseen
