#include "mlsm/pwf.hpp"

#include <algorithm>
#include <cmath>

#include "mlsm/errors.hpp"

namespace mlsm::pwf {

std::vector<double> uniform_grid(std::size_t points) {
    if (points < 3) throw DomainError("PWF grid needs at least 3 points");
    std::vector<double> u(points);
    for (std::size_t i = 0; i < points; ++i) u[i] = static_cast<double>(i) / static_cast<double>(points - 1);
    u.back() = 1.0;
    return u;
}

PwfCurve implied_pwf(const transform::DistributionGrid& f_r, const transform::DistributionGrid& f_s,
                     std::span<const double> u_grid) {
    if (f_r.x.size() < 2 || f_s.x.size() < 2) throw DomainError("empty distribution grid");
    const bool both = std::isfinite(f_r.horizon_days) && std::isfinite(f_s.horizon_days);
    if (both && f_r.horizon_days != f_s.horizon_days) {
        throw HorizonMismatchError("distributions were built for horizons " + std::to_string(f_r.horizon_days) +
                                   " and " + std::to_string(f_s.horizon_days) + " days");
    }
    PwfCurve c;
    c.u.assign(u_grid.begin(), u_grid.end());
    c.horizon_days = both ? f_r.horizon_days : (std::isfinite(f_r.horizon_days) ? f_r.horizon_days : f_s.horizon_days);
    c.w_raw.resize(c.u.size());
    for (std::size_t i = 0; i < c.u.size(); ++i) {
        const double u = c.u[i];
        if (!(u >= 0.0 && u <= 1.0)) throw DomainError("PWF grid must lie in [0, 1]");
        if (u == 0.0) {
            c.w_raw[i] = 0.0;
        } else if (u == 1.0) {
            c.w_raw[i] = 1.0;
        } else {
            c.w_raw[i] = transform::cdf_at(f_s, transform::inv_cdf(f_r, u));
        }
    }
    c.w = c.w_raw;
    for (std::size_t i = 1; i < c.w.size(); ++i) c.w[i] = std::max(c.w[i], c.w[i - 1]);
    for (double& w : c.w) w = std::clamp(w, 0.0, 1.0);
    return c;
}

PwfCurve implied_pwf(const transform::DistributionGrid& f_r, const transform::DistributionGrid& f_s,
                     std::size_t points) {
    const auto u = uniform_grid(points);
    return implied_pwf(f_r, f_s, u);
}

double tk_pwf(double u, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("TK curvature must lie in (0, 1]");
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("probability must lie in [0, 1]");
    if (u == 0.0 || u == 1.0) return u;
    const double a = std::pow(u, gamma);
    const double b = std::pow(1.0 - u, gamma);
    return a / std::pow(a + b, 1.0 / gamma);
}

namespace {

double value_at(const PwfCurve& c, double u) {
    const auto it = std::lower_bound(c.u.begin(), c.u.end(), u);
    if (it == c.u.begin()) return c.w.front();
    if (it == c.u.end()) return c.w.back();
    const auto k = static_cast<std::size_t>(it - c.u.begin());
    const double t = (u - c.u[k - 1]) / (c.u[k] - c.u[k - 1]);
    return c.w[k - 1] + t * (c.w[k] - c.w[k - 1]);
}

enum class Curvature { concave = -1, linear = 0, convex = 1 };

}  // namespace

ShapeReport shape_report(const PwfCurve& c, double window_frac, double boundary_frac) {
    const std::size_t n = c.u.size();
    if (n < 5 || c.w.size() != n) throw DomainError("PWF curve too short for shape analysis");
    ShapeReport r;
    r.left_slope = (value_at(c, 0.02) - value_at(c, 0.0)) / 0.02;
    r.right_slope = (value_at(c, 1.0) - value_at(c, 0.98)) / 0.02;

    // Second differences scaled to w'' so the zero threshold is grid-independent.
    std::vector<double> d2(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h1 = c.u[i] - c.u[i - 1];
        const double h2 = c.u[i + 1] - c.u[i];
        d2[i] = 2.0 * ((c.w[i + 1] - c.w[i]) / h2 - (c.w[i] - c.w[i - 1]) / h1) / (h1 + h2);
    }
    const auto half = static_cast<std::size_t>(std::max(1.0, std::round(window_frac * static_cast<double>(n) / 2.0)));
    std::vector<double> s(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const std::size_t lo = std::max<std::size_t>(1, i >= half ? i - half : 1);
        const std::size_t hi = std::min(n - 2, i + half);
        double acc = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) acc += d2[k];
        s[i] = acc / static_cast<double>(hi - lo + 1);
    }
    double scale = 0.0;
    for (double v : s) scale = std::max(scale, std::abs(v));
    const double tol = 1e-8 * std::max(scale, 1.0);
    auto classify = [tol](double v) {
        return v > tol ? Curvature::convex : (v < -tol ? Curvature::concave : Curvature::linear);
    };

    // Candidate inflections: zero crossings between consecutive curved points.
    std::vector<double> cuts;
    std::size_t last = 0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (classify(s[i]) == Curvature::linear) continue;
        if (last != 0 && classify(s[last]) != classify(s[i])) {
            const double t = s[last] / (s[last] - s[i]);
            const double u = c.u[last] + t * (c.u[i] - c.u[last]);
            if (u > boundary_frac && u < 1.0 - boundary_frac) cuts.push_back(u);
        }
        last = i;
    }

    // Label each piece by the mean smoothed curvature inside it, then merge
    // neighbours with equal labels.
    std::vector<double> edges{0.0};
    edges.insert(edges.end(), cuts.begin(), cuts.end());
    edges.push_back(1.0);
    std::vector<std::pair<Interval, Curvature>> pieces;
    for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
        double acc = 0.0;
        std::size_t cnt = 0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (c.u[i] > edges[j] && c.u[i] < edges[j + 1]) {
                acc += s[i];
                ++cnt;
            }
        }
        const Curvature k = cnt == 0 ? Curvature::linear : classify(acc / static_cast<double>(cnt));
        if (!pieces.empty() && pieces.back().second == k) {
            pieces.back().first.second = edges[j + 1];
        } else {
            pieces.push_back({{edges[j], edges[j + 1]}, k});
        }
    }
    for (std::size_t j = 0; j < pieces.size(); ++j) {
        const auto& [iv, k] = pieces[j];
        if (j > 0 && k != Curvature::linear && pieces[j - 1].second != Curvature::linear)
            r.inflection_points.push_back(iv.first);
        switch (k) {
            case Curvature::concave: r.concave_segments.push_back(iv); break;
            case Curvature::convex: r.convex_segments.push_back(iv); break;
            case Curvature::linear: r.linear_segments.push_back(iv); break;
        }
    }
    return r;
}

PwfCurve implied_pwf_from_models(const ModelParams& spot, const ModelParams& implied, double r, double t,
                                 RnDynamics dynamics, std::size_t points, std::size_t fft_points) {
    if (!(t > 0.0)) throw DomainError("PWF horizon must be positive");
    const auto f_r = transform::model_distribution(spot, t, fft_points);
    const auto f_s = dynamics == RnDynamics::risk_neutral
                         ? transform::risk_neutral_distribution(implied, r, t, fft_points)
                         : transform::model_distribution(implied, t, fft_points);
    return implied_pwf(f_r, f_s, points);
}

}  // namespace mlsm::pwf
