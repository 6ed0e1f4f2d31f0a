#pragma once

#include <string>
#include <vector>

namespace oseen {

/// Log-log regression of a decay measurement against a predicted exponent.
struct DecayFit {
    enum class Direction { UpperBound, Equality };

    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t window_begin = 0;  ///< indices into the samples passed to the fit
    std::size_t window_end = 0;    ///< one past the last
    double x_min = 0.0, x_max = 0.0;
    double predicted_exponent = 0.0;
    double tolerance = 0.1;
    Direction direction = Direction::UpperBound;
    bool rejected = false;
    std::string note;
    bool pass = false;

    /// pass as a function of the other fields.
    bool evaluate() const;
};

struct FitOptions {
    double tolerance = 0.1;
    DecayFit::Direction direction = DecayFit::Direction::UpperBound;
    std::size_t min_points = 5;
    /// Samples with |y| at or below this are treated as quadrature noise.
    double noise_floor = 0.0;
    /// Pick the window by the knee detector instead of using all points.
    bool knee = true;
};

/// Ordinary least squares of log|y| on log x over [b, e).
void loglog_regression(const std::vector<double>& x, const std::vector<double>& y, std::size_t b, std::size_t e,
                       double& slope, double& intercept, double& r2);

/// Fit with optional knee detection: the contiguous window of at least min_points
/// with the largest r^2; ties within 1e-4 go to the longest, then the latest window.
DecayFit fit_decay(const std::vector<double>& x, const std::vector<double>& y, double predicted,
                   const FitOptions& opts = {});

}  // namespace oseen
