#include "doctest.h"

#include "oseen/decay_lab.hpp"
#include "oseen/fit.hpp"
#include "oseen/geometry.hpp"

#include <cmath>

using namespace oseen;

TEST_CASE("linear rates by hand") {
    RateInputs in;  // zeta1 2, zeta2 1/2, q0 = s0 = p0 = 1.1, alpha 0
    const auto r = predict_linear_rates(in);
    // branches 2, 0.5, 1.5/1.1 + 1/1.1 - 1.5, 1/1.1, 1.5/1.1 - 0.5
    const double b3 = 1.5 / 1.1 + 1.0 / 1.1 - 1.5;
    CHECK(b3 == doctest::Approx(0.772727).epsilon(1e-5));
    CHECK(r.rho1 == 0.5);
    // min{2, 1, 1.5/1.1 + 1/1.1 - 1, 1.5/1.1}
    CHECK(r.rho2 == 1.0);
}

TEST_CASE("compact regime recovers zeta and 1 + |alpha|/2") {
    for (int alpha : {0, 1})
        for (double zeta : {0.3, 0.5, 0.9}) {
            const auto r = predict_linear_rates(RateInputs::compact_regime(zeta, alpha));
            CHECK(r.rho1 == doctest::Approx(zeta).epsilon(1e-12));
            CHECK(r.rho2 == doctest::Approx(1.0 + alpha / 2.0).epsilon(1e-12));
        }
}

TEST_CASE("nonlinear rates by hand") {
    auto in = RateInputs::compact_regime(0.5, 0);
    in.kappa1 = 1.0;
    auto r = predict_nonlinear_rates(in);
    CHECK(r.limit_first == doctest::Approx(0.5));
    CHECK(r.limit_second == doctest::Approx(1.0));

    in = RateInputs::compact_regime(0.5, 1);
    in.kappa1 = 0.3;
    r = predict_nonlinear_rates(in);
    CHECK(r.limit_second == doctest::Approx(0.2));

    in = RateInputs{};
    in.q1 = 1.2;
    in.kappa1 = 10.0;
    in.q1_hat = 1.4;
    r = predict_nonlinear_rates(in);
    CHECK(r.first == doctest::Approx(0.25));

    in = RateInputs::compact_regime(0.5, 0);
    in.kappa1 = 1.0;
    r = predict_nonlinear_rates(in, 0.01);
    CHECK(r.limit_first == doctest::Approx(0.49));
    CHECK(r.limit_second == doctest::Approx(1.01));
}

TEST_CASE("domain violations name the constraint") {
    RateInputs in;
    in.q0 = 1.6;
    CHECK_FALSE(in.violations(false).empty());
    try {
        predict_linear_rates(in);
        FAIL("expected a domain error");
    } catch (const std::domain_error& e) {
        CHECK(std::string(e.what()).find("q0") != std::string::npos);
    }
    in = RateInputs{};
    in.alpha = 2;
    CHECK_THROWS_AS(predict_linear_rates(in), std::domain_error);
}

TEST_CASE("Z bound examples") {
    CHECK(z_value(0, 1, 0.6) == doctest::Approx(-0.1));
    CHECK(z_bound_phi(0.6) == doctest::Approx(0.1));
    CHECK(z_value(0, 2, 0.5) == doctest::Approx(-0.25));
    CHECK(z_value(1, 2, 0.5) == doctest::Approx(-0.25));
    CHECK(z_bound_phi(0.5) == doctest::Approx(1.0 / 12.0));
    const auto rep = verify_z_bound({0.6, 0.5});
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[0].k == 1);
    CHECK(rep.rows[1].k == 2);
    CHECK(rep.counterexamples.empty());
    const auto grid = uniform_epsilon_grid(1000);
    CHECK(grid.front() == doctest::Approx(0.0005));
    CHECK(verify_z_bound(grid).counterexamples.empty());
}

TEST_CASE("envelope interpolation identity") {
    const Vec3 x(5, 3, -2);
    const double t = 7.0, se = -1.0, te = -1.5, c = 2.0, zeta = 0.5;
    const auto e0 = interpolation_envelope(x, t, 0.0, se, te, c, zeta);
    const auto e1 = interpolation_envelope(x, t, 1.0, se, te, c, zeta);
    for (double eps : {0.1, 0.37, 0.8}) {
        const auto e = interpolation_envelope(x, t, eps, se, te, c, zeta);
        const double geo = std::pow(e0.second, 1.0 - eps) * std::pow(e1.second, eps);
        CHECK(e.second == doctest::Approx(geo).epsilon(1e-12));
        CHECK(e.first == doctest::Approx(e0.first));
    }
    const double d = x.norm() * wake_weight(x);
    CHECK(e0.first == doctest::Approx(c * std::pow(d, se) * std::pow(1.0 + t, -zeta)));
}

TEST_CASE("log-log fits of exact power laws") {
    std::vector<double> x, y;
    for (int i = 0; i < 12; ++i) {
        x.push_back(std::pow(2.0, i));
        y.push_back(3.0 * std::pow(x.back(), -1.5));
    }
    FitOptions o;
    o.knee = false;
    const auto f = fit_decay(x, y, -1.5, o);
    CHECK(f.slope == doctest::Approx(-1.5).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(1.0));
    CHECK(f.pass);
    const auto g = fit_decay(x, y, -2.0, o);
    CHECK_FALSE(g.pass);

    // pre-asymptotic bump followed by a clean tail; the knee window finds the tail
    for (int i = 0; i < 4; ++i) y[static_cast<std::size_t>(i)] *= 1.0 + 3.0 / (1 + i);
    o.knee = true;
    const auto k = fit_decay(x, y, -1.5, o);
    CHECK(k.slope == doctest::Approx(-1.5).epsilon(0.01));
    CHECK(k.window_begin >= 3);
}

TEST_CASE("spatial and temporal fits of synthetic fields") {
    const FieldEvaluator f = [](const Point3& x, double t, const MultiIndex& d) -> Vec3 {
        if (d.spatial_order() != 0) {
            // |grad| of the scalar (|x| nu)^-3/2 along e2 is what matters for the slope check
            return Vec3(std::pow(x.norm() * wake_weight(x), -1.5), 0, 0);
        }
        return Vec3(std::pow(x.norm() * wake_weight(x), -1.0) / (1.0 + t), 0, 0);
    };
    RaySpec ray;
    ray.direction = RaySpec::Direction::Transverse;
    const auto m0 = fit_spatial_decay(f, 0, ray, 1.0);
    CHECK(m0.fit.slope == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(m0.fit.pass);
    CHECK(m0.fit.predicted_exponent == -1.0);
    const auto m1 = fit_spatial_decay(f, 1, ray, 1.0);
    CHECK(m1.fit.predicted_exponent == -1.5);

    std::vector<double> ts{10, 20, 40, 80, 160, 320, 640};
    const auto mt = fit_temporal_decay([](double t) { return std::pow(t - 2.0, -1.5); }, ts, -1.5, 0.1, 2.0);
    CHECK(mt.fit.slope == doctest::Approx(-1.5).epsilon(1e-9));
}

TEST_CASE("ray validation") {
    RaySpec ray;
    ray.r_min = 0.5;
    CHECK_THROWS(ray.validate(1.0));
    ray.r_min = 10.0;
    ray.r_max = 12.0;
    CHECK_THROWS(ray.validate(1.0));
    ray.r_max = 80.0;
    CHECK_NOTHROW(ray.validate(1.0));
    CHECK(RaySpec::parse("upstream") == RaySpec::Direction::Upstream);
    CHECK(RaySpec::parse(RaySpec::name(RaySpec::Direction::Downstream)) == RaySpec::Direction::Downstream);
    CHECK_THROWS(RaySpec::parse("sideways"));
}

TEST_CASE("predicted exponents") {
    CHECK(initial_potential_exponent(1.0, 0) == -1.5);
    CHECK(initial_potential_exponent(1.0, 1) == -2.0);
    CHECK(volume_potential_exponent(1.0, 1.0, 0) == -1.5);
    CHECK(single_layer_pointwise_exponent() == -1.5);
}
