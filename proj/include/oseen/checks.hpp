#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace oseen {

/// One measured quantity against its target.
struct CheckRow {
    std::string name;
    std::string tag;
    double predicted = 0.0;
    double measured = 0.0;
    double tolerance = 0.0;
    bool upper_bound = false;  ///< pass when measured <= predicted + tolerance, else |measured - predicted| <= tolerance
    bool pass = false;

    void evaluate();
};

/// Heat-kernel mass, divergence of both kernels at random points, closed-form time
/// integral against panel quadrature.
std::vector<CheckRow> kernel_checks(std::uint64_t seed, int div_points = 100, int integral_points = 20);

/// Half derivative of 1 and half of half of r^2.
std::vector<CheckRow> fractional_checks();

/// Windowed convolution exponents for the three reference parameter sets.
std::vector<CheckRow> convolution_checks();

/// Co-moving mass of I(a) and self-convergence of R(f).
std::vector<CheckRow> potential_checks(double tau = 1.0);

}  // namespace oseen
