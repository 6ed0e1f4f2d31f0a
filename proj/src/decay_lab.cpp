#include "oseen/decay_lab.hpp"

#include "oseen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oseen {

Vec3 RaySpec::unit() const {
    switch (direction) {
        case Direction::Downstream: return {1.0, 0.0, 0.0};
        case Direction::Upstream: return {-1.0, 0.0, 0.0};
        case Direction::Transverse: return {0.0, 1.0, 0.0};
        case Direction::Custom: break;
    }
    const double n = custom.norm();
    if (!(n > 0.0)) throw std::invalid_argument("RaySpec: zero custom direction");
    return custom / n;
}

std::vector<double> RaySpec::radii() const {
    if (count < 2) throw std::invalid_argument("RaySpec: need at least two radii");
    std::vector<double> r;
    const double q = std::log(r_max / r_min) / (count - 1);
    for (int i = 0; i < count; ++i) r.push_back(r_min * std::exp(q * i));
    return r;
}

void RaySpec::validate(double enclosing_radius) const {
    if (!(r_min > enclosing_radius)) throw std::invalid_argument("RaySpec: r_min must exceed the enclosing radius");
    const auto r = radii();
    const Vec3 e = unit();
    const double d0 = r.front() * wake_weight(r.front() * e), d1 = r.back() * wake_weight(r.back() * e);
    if (!(d1 >= 10.0 * d0 * (1.0 - 1e-12))) throw std::invalid_argument("RaySpec: |x| nu(x) must span a decade");
}

RaySpec::Direction RaySpec::parse(const std::string& s) {
    if (s == "downstream") return Direction::Downstream;
    if (s == "upstream") return Direction::Upstream;
    if (s == "transverse") return Direction::Transverse;
    if (s == "custom") return Direction::Custom;
    throw std::invalid_argument("unknown ray direction '" + s + "'");
}

std::string RaySpec::name(Direction d) {
    switch (d) {
        case Direction::Downstream: return "downstream";
        case Direction::Upstream: return "upstream";
        case Direction::Transverse: return "transverse";
        case Direction::Custom: return "custom";
    }
    return "custom";
}

double field_magnitude(const FieldEvaluator& f, const Point3& x, double t, int order) {
    if (order == 0) return f(x, t, MultiIndex::value()).norm();
    if (order != 1) throw std::invalid_argument("field_magnitude: order must be 0 or 1");
    double s = 0.0;
    for (int j = 0; j < 3; ++j) s += f(x, t, MultiIndex::dx(j)).squaredNorm();
    return std::sqrt(s);
}

DecayMeasurement fit_spatial_decay(const FieldEvaluator& f, int order, const RaySpec& ray, double t, double tolerance,
                                   double noise_floor) {
    ray.validate(1.0);
    DecayMeasurement m;
    m.x_label = "|x|nu(x)";
    const Vec3 e = ray.unit();
    for (double r : ray.radii()) {
        const Point3 x = r * e;
        m.x.push_back(x.norm() * wake_weight(x));
        m.y.push_back(field_magnitude(f, x, t, order));
    }
    FitOptions fo;
    fo.tolerance = tolerance;
    fo.noise_floor = noise_floor;
    fo.min_points = std::min<std::size_t>(5, m.x.size());
    m.fit = fit_decay(m.x, m.y, -1.0 - 0.5 * order, fo);
    return m;
}

DecayMeasurement fit_temporal_decay(const std::function<double(double)>& measure, const std::vector<double>& times,
                                    double predicted, double tolerance, double shift, double noise_floor) {
    DecayMeasurement m;
    m.x_label = shift != 0.0 ? "t-T" : "t";
    for (double t : times) {
        if (!(t - shift > 0.0)) throw std::invalid_argument("fit_temporal_decay: times must exceed the shift");
        m.x.push_back(t - shift);
        m.y.push_back(measure(t));
    }
    FitOptions fo;
    fo.tolerance = tolerance;
    fo.noise_floor = noise_floor;
    fo.min_points = std::min<std::size_t>(5, m.x.size());
    m.fit = fit_decay(m.x, m.y, predicted, fo);
    return m;
}

DecayMeasurement fit_temporal_decay(const FieldEvaluator& f, int order, const Point3& x_fixed,
                                    const std::vector<double>& times, double predicted, double tolerance,
                                    double shift) {
    return fit_temporal_decay([&](double t) { return field_magnitude(f, x_fixed, t, order); }, times, predicted,
                              tolerance, shift);
}

double initial_potential_exponent(double p, int order) { return -1.5 / p - 0.5 * order; }
double volume_potential_exponent(double q, double s, int order) { return -1.5 / q - 1.0 / s + 1.0 - 0.5 * order; }
double single_layer_pointwise_exponent() { return -1.5; }

Envelope interpolation_envelope(const Point3& x, double t, double epsilon, double spatial_exp, double temporal_exp,
                                double constant, double zeta) {
    if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("interpolation_envelope: epsilon outside [0,1]");
    const double d = x.norm() * wake_weight(x);
    Envelope e;
    e.first = constant * std::pow(d, spatial_exp) * std::pow(1.0 + t, -zeta);
    e.second = constant * std::pow(d, spatial_exp * (1.0 - epsilon)) * std::pow(1.0 + t, temporal_exp * epsilon);
    return e;
}

// ---------------------------------------------------------------- rates

std::vector<std::string> RateInputs::violations(bool nonlinear) const {
    std::vector<std::string> v;
    if (!(zeta1 > 0.0)) v.push_back("zeta1 > 0");
    if (!(zeta2 > 0.0 && zeta2 < 1.0)) v.push_back("zeta2 in (0, 1)");
    if (!(q0 > 1.0 && q0 < 1.5)) v.push_back("q0 in (1, 3/2)");
    if (!(s0 > 1.0)) v.push_back("s0 in (1, inf)");
    if (!(1.5 / q0 + 1.0 / s0 > 1.5)) v.push_back("3/(2 q0) + 1/s0 > 3/2");
    if (!(p0 > 1.0 && p0 <= 2.0)) v.push_back("p0 in (1, 2]");
    if (alpha != 0 && alpha != 1) v.push_back("|alpha| in {0, 1}");
    if (nonlinear) {
        if (!(kappa1 > 0.0)) v.push_back("kappa1 > 0");
        if (!(q1 > 1.0 && q1 < 1.5)) v.push_back("q1 in (1, 3/2)");
        if (!(q1_hat > 1.0 && q1_hat < 1.5)) v.push_back("q1_hat in (1, 3/2)");
        if (!(q1_bar >= 2.0)) v.push_back("q1_bar >= 2");
        if (!(3.0 / (2.0 - alpha) < q1_bar)) v.push_back("3/(2 - |alpha|) < q1_bar");
    }
    return v;
}

RateInputs RateInputs::compact_regime(double zeta, int alpha) {
    // compact f and a: every integrability exponent may be taken just above 1
    RateInputs in;
    in.zeta1 = 10.0;
    in.zeta2 = zeta;
    in.q0 = in.s0 = in.p0 = 1.0 + 1e-9;
    in.alpha = alpha;
    return in;
}

namespace {

void require(const RateInputs& in, bool nonlinear) {
    const auto v = in.violations(nonlinear);
    if (v.empty()) return;
    std::string msg = "rate inputs outside their domain:";
    for (const auto& s : v) msg += " " + s + ";";
    throw std::domain_error(msg);
}

}  // namespace

LinearRates predict_linear_rates(const RateInputs& in) {
    require(in, false);
    const double a = in.alpha;
    LinearRates r;
    r.rho1 = std::min({in.zeta1, in.zeta2, 1.5 / in.q0 + 1.0 / in.s0 - 1.5, 1.0 / in.s0, 1.5 / in.p0 - 0.5});
    r.rho2 = std::min({in.zeta1, 1.0 + a / 2.0, 1.5 / in.q0 + 1.0 / in.s0 - 1.0 + a / 2.0, 1.5 / in.p0 + a / 2.0});
    return r;
}

NonlinearRates predict_nonlinear_rates(const RateInputs& in, double delta) {
    require(in, true);
    const LinearRates lin = predict_linear_rates(in);
    const double a = in.alpha;
    NonlinearRates r;
    r.first = std::min({lin.rho1, 1.5 / in.q1 - 1.0, 3.0 * in.kappa1 * (1.0 - 1.0 / in.q1_hat), in.kappa1});
    // the bar exponent of the second term is read as q1_bar, the only one introduced
    r.second = std::min({lin.rho2, 1.5 / in.q1 - 0.5 + a / 2.0, 2.0 * in.kappa1 / in.q1_bar});
    const double k = in.alpha == 0 ? in.kappa1 : 2.0 * in.kappa1 / 3.0;
    r.limit_first = std::min(0.5, in.kappa1) - delta;
    r.limit_second = std::min(1.0 + a / 2.0, k) + delta;
    return r;
}

// ---------------------------------------------------------------- Z bound

double z_bound_phi(double eps) { return eps > 0.5 ? eps - 0.5 : std::min(1.0 / 12.0, eps / 4.0); }

double z_value(int j, int k, double eps) {
    return -0.5 + j / (2.0 * k) + 1.0 / k - (j + 1) * eps / k;
}

ZBoundReport verify_z_bound(const std::vector<double>& grid) {
    ZBoundReport rep;
    for (double eps : grid) {
        if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("verify_z_bound: epsilon outside (0,1)");
        ZBoundCheck c;
        c.epsilon = eps;
        int k = static_cast<int>(std::floor(1.0 / eps));
        while (k > 1 && k * eps > 1.0) --k;
        while ((k + 1) * eps <= 1.0) ++k;
        c.k = k;
        c.phi = z_bound_phi(eps);
        c.max_z = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) c.max_z = std::max(c.max_z, z_value(j, k, eps));
        c.holds = c.max_z <= -c.phi + 1e-12;
        rep.rows.push_back(c);
        if (!c.holds) rep.counterexamples.push_back(c);
    }
    return rep;
}

std::vector<double> uniform_epsilon_grid(int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back((i + 0.5) / n);
    return g;
}

}  // namespace oseen
