#pragma once

#include "oseen/fit.hpp"
#include "oseen/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace oseen {

struct RaySpec {
    enum class Direction { Downstream, Upstream, Transverse, Custom };
    Direction direction = Direction::Transverse;
    Vec3 custom{0.0, 0.0, 1.0};
    double r_min = 10.0, r_max = 80.0;
    int count = 10;
    std::vector<double> times{1.0};

    Vec3 unit() const;
    /// Geometric sequence r_min .. r_max.
    std::vector<double> radii() const;
    /// Throws unless r_min exceeds R and |x| nu(x) spans at least a decade along the ray.
    void validate(double enclosing_radius) const;
    static Direction parse(const std::string& name);
    static std::string name(Direction d);
};

/// Field evaluator: (x, t, derivative) -> vector.
using FieldEvaluator = std::function<Vec3(const Point3&, double, const MultiIndex&)>;

/// A fit with the samples it was made from.
struct DecayMeasurement {
    DecayFit fit;
    std::vector<double> x;  ///< abscissa used in the regression
    std::vector<double> y;
    std::string x_label;
};

/// |u| (order 0) or the Frobenius norm of the spatial gradient (order 1).
double field_magnitude(const FieldEvaluator& f, const Point3& x, double t, int order);

/// Regress log|d^alpha field| on log(|x| nu(x)) along the ray at time t. Bound direction,
/// predicted exponent -1 - order/2.
DecayMeasurement fit_spatial_decay(const FieldEvaluator& f, int order, const RaySpec& ray, double t,
                                   double tolerance = 0.15, double noise_floor = 1e-14);

/// Regress log of a scalar series on log(time - shift). Bound direction.
DecayMeasurement fit_temporal_decay(const std::function<double(double)>& measure, const std::vector<double>& times,
                                    double predicted, double tolerance = 0.1, double shift = 0.0,
                                    double noise_floor = 1e-14);
/// Same, with the magnitude of d^alpha field at a fixed point as the measure.
DecayMeasurement fit_temporal_decay(const FieldEvaluator& f, int order, const Point3& x_fixed,
                                    const std::vector<double>& times, double predicted, double tolerance = 0.1,
                                    double shift = 0.0);

/// Predicted temporal exponents per evaluator.
double initial_potential_exponent(double p, int order);
double volume_potential_exponent(double q, double s, int order);
double single_layer_pointwise_exponent();

struct Envelope {
    double first = 0.0;   ///< c d^se (1+t)^(-zeta)
    double second = 0.0;  ///< c d^(se(1-eps)) (1+t)^(te eps)
    double total() const { return first + second; }
};

/// d = |x| nu(x); se and te are the spatial and temporal exponents (negative for decay).
Envelope interpolation_envelope(const Point3& x, double t, double epsilon, double spatial_exp, double temporal_exp,
                                double constant, double zeta);

struct RateInputs {
    double zeta1 = 2.0, zeta2 = 0.5;
    double q0 = 1.1, s0 = 1.1, p0 = 1.1;
    double kappa1 = 1.0;
    double q1 = 1.2, q1_hat = 1.2, q1_bar = 4.0;
    int alpha = 0;  ///< |alpha|, 0 or 1

    /// Every violated domain constraint; the nonlinear parameters only when asked.
    std::vector<std::string> violations(bool nonlinear) const;
    /// Parameters of the compact-support regime: f and a compact, b with tail rate zeta.
    static RateInputs compact_regime(double zeta, int alpha);
};

struct LinearRates {
    double rho1 = 0.0, rho2 = 0.0;
};

struct NonlinearRates {
    double first = 0.0;         ///< decay rate of the (1+t) factor in the first term
    double second = 0.0;        ///< decay rate of the second term before the power eps
    double limit_first = 0.0;   ///< compact data: min(1/2, kappa1) - delta
    double limit_second = 0.0;  ///< compact data: min(1 + |alpha|/2, k(alpha)) + delta
};

LinearRates predict_linear_rates(const RateInputs& in);
NonlinearRates predict_nonlinear_rates(const RateInputs& in, double delta = 0.0);

struct ZBoundCheck {
    double epsilon = 0.0;
    int k = 0;
    double phi = 0.0;
    double max_z = 0.0;  ///< max over j of Z(j)
    bool holds = true;
};

struct ZBoundReport {
    std::vector<ZBoundCheck> rows;
    std::vector<ZBoundCheck> counterexamples;
};

double z_bound_phi(double epsilon);
double z_value(int j, int k, double epsilon);
ZBoundReport verify_z_bound(const std::vector<double>& epsilon_grid);
/// n points (i + 1/2)/n.
std::vector<double> uniform_epsilon_grid(int n);

}  // namespace oseen
