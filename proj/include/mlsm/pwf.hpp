#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mlsm/params.hpp"
#include "mlsm/transform.hpp"

namespace mlsm::pwf {

struct PwfCurve {
    std::vector<double> u;
    std::vector<double> w;      // after running-max repair
    std::vector<double> w_raw;  // before repair (endpoints pinned)
    double horizon_days = 1.0;
};

using Interval = std::pair<double, double>;

struct ShapeReport {
    std::vector<double> inflection_points;
    std::vector<Interval> concave_segments;
    std::vector<Interval> convex_segments;
    std::vector<Interval> linear_segments;
    double left_slope = 0.0;   // secant on [0, 0.02]
    double right_slope = 0.0;  // secant on [0.98, 1]
};

std::vector<double> uniform_grid(std::size_t points = 1001);

/// w(u) = F_S(F_R^inv(u)). Throws HorizonMismatchError when the grids carry
/// different horizons.
PwfCurve implied_pwf(const transform::DistributionGrid& f_r, const transform::DistributionGrid& f_s,
                     std::span<const double> u_grid);
PwfCurve implied_pwf(const transform::DistributionGrid& f_r, const transform::DistributionGrid& f_s,
                     std::size_t points = 1001);

/// Tversky-Kahneman weighting u^g / (u^g + (1-u)^g)^(1/g), g in (0, 1].
double tk_pwf(double u, double gamma);

/// Smoothed second differences (centred window of `window_frac` of the grid)
/// split (0,1) into concave / convex / linear pieces; sign changes within
/// `boundary_frac` of an endpoint are ignored.
ShapeReport shape_report(const PwfCurve& c, double window_frac = 0.02, double boundary_frac = 0.01);

/// How the option-implied parameters are turned into a law of log returns.
enum class RnDynamics {
    risk_neutral,  // mean-correcting measure: drift r - K(1)
    as_given,      // the parameters' own physical dynamics
};

/// Physical law of the spot parameters against the option-implied law, both at
/// horizon t (trading days). `r` is per trading day.
PwfCurve implied_pwf_from_models(const ModelParams& spot, const ModelParams& implied, double r, double t,
                                 RnDynamics dynamics = RnDynamics::risk_neutral, std::size_t points = 1001,
                                 std::size_t fft_points = std::size_t{1} << 16);

}  // namespace mlsm::pwf
