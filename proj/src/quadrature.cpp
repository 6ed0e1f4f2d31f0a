#include "oseen/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace oseen::quad {

namespace {

Rule1D compute_gauss(int n) {
    Rule1D r;
    r.x.resize(static_cast<std::size_t>(n));
    r.w.resize(static_cast<std::size_t>(n));
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        auto lo = static_cast<std::size_t>(i);
        auto hi = static_cast<std::size_t>(n - 1 - i);
        r.x[lo] = -z;
        r.x[hi] = z;
        r.w[lo] = r.w[hi] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return r;
}

}  // namespace

const Rule1D& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    static std::mutex mu;
    static std::map<int, Rule1D> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss(n)).first;
    return it->second;
}

void append_gauss(Rule1D& out, double a, double b, int n) {
    const Rule1D& g = gauss_legendre(n);
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        out.x.push_back(c + h * g.x[i]);
        out.w.push_back(h * g.w[i]);
    }
}

Rule1D gauss_on(double a, double b, int n) {
    Rule1D r;
    append_gauss(r, a, b, n);
    return r;
}

Rule1D graded_toward_left(double a, double b, double min_width, int n) {
    Rule1D r;
    double hi = b;
    while (hi - a > 2.0 * min_width) {
        double lo = a + 0.5 * (hi - a);
        append_gauss(r, lo, hi, n);
        hi = lo;
    }
    append_gauss(r, a, hi, n);
    return r;
}

const std::array<TriPoint, 7>& triangle_rule7() {
    static const std::array<TriPoint, 7> rule = [] {
        const double a1 = 0.059715871789770, b1 = 0.470142064105115;
        const double a2 = 0.797426985353087, b2 = 0.101286507323456;
        const double w0 = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
        return std::array<TriPoint, 7>{{{1.0 / 3, 1.0 / 3, 1.0 / 3, w0},
                                        {a1, b1, b1, w1},
                                        {b1, a1, b1, w1},
                                        {b1, b1, a1, w1},
                                        {a2, b2, b2, w2},
                                        {b2, a2, b2, w2},
                                        {b2, b2, a2, w2}}};
    }();
    return rule;
}

}  // namespace oseen::quad
