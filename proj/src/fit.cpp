#include "oseen/fit.hpp"

#include <cmath>
#include <stdexcept>

namespace oseen {

bool DecayFit::evaluate() const {
    if (rejected) return false;
    if (direction == Direction::UpperBound) return slope <= predicted_exponent + tolerance;
    return std::abs(slope - predicted_exponent) <= tolerance;
}

void loglog_regression(const std::vector<double>& x, const std::vector<double>& y, std::size_t b, std::size_t e,
                       double& slope, double& intercept, double& r2) {
    if (e <= b + 1) throw std::invalid_argument("loglog_regression: need two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double n = static_cast<double>(e - b);
    for (std::size_t i = b; i < e; ++i) {
        const double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
    if (vx <= 0.0) throw std::invalid_argument("loglog_regression: degenerate abscissae");
    slope = cxy / vx;
    intercept = (sy - slope * sx) / n;
    r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
}

DecayFit fit_decay(const std::vector<double>& x, const std::vector<double>& y, double predicted,
                   const FitOptions& opts) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_decay: size mismatch");
    DecayFit f;
    f.predicted_exponent = predicted;
    f.tolerance = opts.tolerance;
    f.direction = opts.direction;
    const std::size_t minp = std::max<std::size_t>(2, opts.min_points);

    // drop noise-floor samples, keep the indices of the rest
    std::vector<double> xs, ys;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !std::isfinite(y[i])) continue;
        if (std::abs(y[i]) <= opts.noise_floor || y[i] == 0.0) continue;
        xs.push_back(x[i]);
        ys.push_back(y[i]);
        idx.push_back(i);
    }
    if (xs.size() < x.size()) f.note = std::to_string(x.size() - xs.size()) + " samples at the noise floor dropped";
    if (xs.size() < minp) {
        f.rejected = true;
        f.note = "too few samples above the noise floor";
        f.pass = false;
        return f;
    }
    std::size_t bb = 0, be = xs.size();
    if (opts.knee && xs.size() > minp) {
        double best = -1.0;
        for (std::size_t b = 0; b + minp <= xs.size(); ++b)
            for (std::size_t e = b + minp; e <= xs.size(); ++e) {
                double s, c, r2;
                loglog_regression(xs, ys, b, e, s, c, r2);
                const bool better = r2 > best + 1e-4;
                const bool tie = std::abs(r2 - best) <= 1e-4;
                const bool longer = (e - b) > (be - bb);
                const bool later = (e - b) == (be - bb) && b > bb;
                if (better || (tie && (longer || later))) {
                    if (better) best = r2;
                    bb = b;
                    be = e;
                }
            }
    }
    loglog_regression(xs, ys, bb, be, f.slope, f.intercept, f.r2);
    f.window_begin = idx[bb];
    f.window_end = idx[be - 1] + 1;
    f.x_min = xs[bb];
    f.x_max = xs[be - 1];
    f.pass = f.evaluate();
    return f;
}

}  // namespace oseen
