#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <span>

#include "mlsm/params.hpp"

namespace mlsm::testing {

// Exhibit 2: spot fit of the subordinated model.
inline MlsmParams exhibit2() {
    return MlsmParams{0.00002, 0.0011, 2.199, {-0.00018, 310.8, 1.19, 0.007}, {0.192548, 1.49156}};
}

// Exhibit 4: calibrated option-implied magnitudes, IG pair from Exhibit 2.
inline MlsmParams exhibit4() {
    return MlsmParams{0.0, 0.05, 2.13, {-0.4, 241.0, 1.2, 5.0}, {0.192548, 1.49156}};
}

// Exhibit 5: spot traders' mixed model.
inline BlmParams exhibit5() { return BlmParams{-0.00008, 0.0011, 1.399, {0.00039, 176.8, 3.45, 0.0025}}; }

inline constexpr double kSpot = 292.58;
inline constexpr double kRateAnnual = 0.015;
inline constexpr double kRateDaily = kRateAnnual / 252.0;

// Parameter draws spanning daily-return magnitudes around the exhibits.
inline MlsmParams random_mlsm(std::mt19937_64& g) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto logu = [&](double lo, double hi) { return lo * std::pow(hi / lo, U(g)); };
    MlsmParams p;
    p.mu = (U(g) - 0.5) * 2e-3;
    p.rho = logu(1e-4, 2e-2);
    p.sigma = logu(0.3, 4.0);
    p.nig.alpha = logu(20.0, 500.0);
    p.nig.beta = (U(g) - 0.5) * 1.6 * p.nig.alpha;
    p.nig.d = logu(1e-3, 1e-1);
    p.nig.m = (U(g) - 0.5) * 2e-3;
    p.ig.h = logu(0.05, 2.0);
    p.ig.l = logu(0.2, 5.0);
    return p;
}

inline BlmParams random_blm(std::mt19937_64& g) {
    const MlsmParams m = random_mlsm(g);
    return BlmParams{m.mu, m.rho, m.sigma, m.nig};
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Relative error with an absolute floor of one, for values that pass through zero.
inline double mixed_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1.0); }
inline double mixed_err(std::complex<double> a, std::complex<double> b) {
    return std::abs(a - b) / std::max(std::abs(b), 1.0);
}

// Empirical ch.f. at v with the standard errors of its real and imaginary parts.
struct EcfEstimate {
    std::complex<double> value;
    double se_re = 0.0;
    double se_im = 0.0;
};

inline EcfEstimate ecf_estimate(std::span<const double> x, double v) {
    double sc = 0.0, ss = 0.0, sc2 = 0.0, ss2 = 0.0;
    for (double xi : x) {
        const double c = std::cos(v * xi);
        const double s = std::sin(v * xi);
        sc += c;
        ss += s;
        sc2 += c * c;
        ss2 += s * s;
    }
    const double n = static_cast<double>(x.size());
    const double mc = sc / n, ms = ss / n;
    return {{mc, ms}, std::sqrt(std::max(sc2 / n - mc * mc, 0.0) / n),
            std::sqrt(std::max(ss2 / n - ms * ms, 0.0) / n)};
}

inline bool within_se(const EcfEstimate& e, std::complex<double> truth, double k = 3.0) {
    // A floor keeps degenerate components (an exactly symmetric law) testable.
    const double floor = 1e-12;
    return std::abs(e.value.real() - truth.real()) <= k * e.se_re + floor &&
           std::abs(e.value.imag() - truth.imag()) <= k * e.se_im + floor;
}

}  // namespace mlsm::testing
