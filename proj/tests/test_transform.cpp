#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "mlsm/errors.hpp"
#include "mlsm/model.hpp"
#include "mlsm/simulator.hpp"
#include "mlsm/transform.hpp"
#include "support.hpp"

using namespace mlsm;
using namespace mlsm::transform;

namespace {

const double kPi = std::acos(-1.0);

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Black-Scholes with per-period rate and volatility, written out independently.
double bs_call(double s0, double K, double r, double T, double vol) {
    const double sd = vol * std::sqrt(T);
    const double d1 = (std::log(s0 / K) + (r + 0.5 * vol * vol) * T) / sd;
    return s0 * norm_cdf(d1) - K * std::exp(-r * T) * norm_cdf(d1 - sd);
}

double bisect(double lo, double hi, double target) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (norm_cdf(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ChfFn standard_normal() {
    return [](double v) { return std::complex<double>(std::exp(-0.5 * v * v), 0.0); };
}

GridSpec normal_spec() {
    GridSpec s;
    s.n = 4096;
    s.eta = 2.0 * kPi / 40.0;  // x spans [-20, 20)
    return s;
}

}  // namespace

TEST_CASE("standard normal recovered from its ch.f.") {
    const DistributionGrid g = pdf_cdf_from_chf(standard_normal(), normal_spec());
    CHECK(pdf_at(g, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * kPi)).epsilon(1e-10));
    CHECK(cdf_at(g, 0.0) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(g.raw_mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(inv_cdf(g, 0.975) == doctest::Approx(bisect(-10.0, 10.0, 0.975)).epsilon(1e-3));
    for (double x : {-3.0, -1.0, 0.7, 2.5}) CHECK(std::abs(cdf_at(g, x) - norm_cdf(x)) < 1e-4);
    CHECK(cdf_at(g, -100.0) == 0.0);
    CHECK(cdf_at(g, 100.0) == 1.0);
}

TEST_CASE("quantile and cdf are inverse to grid resolution") {
    const ModelParams p = testing::exhibit2();
    const DistributionGrid g = model_distribution(p, 1.0);
    for (double u = 0.01; u < 1.0; u += 0.049) {
        CHECK(std::abs(cdf_at(g, inv_cdf(g, u)) - u) < 1e-6);
    }
    CHECK(std::is_sorted(g.cdf.begin(), g.cdf.end()));
    CHECK(g.cdf.back() == doctest::Approx(1.0));
}

TEST_CASE("coverage failures are reported") {
    GridSpec s = normal_spec();
    s.eta = 2.0 * kPi / 6.0;  // x spans only [-3, 3)
    CHECK_THROWS_AS(pdf_cdf_from_chf(standard_normal(), s), GridCoverageError);
    s = normal_spec();
    s.n = 1000;
    CHECK_THROWS_AS(pdf_cdf_from_chf(standard_normal(), s), DomainError);
}

TEST_CASE("distribution_from_chf widens a narrow first guess") {
    const DistributionGrid g = distribution_from_chf(standard_normal(), 0.0, 1.0, 4096, 2.0);
    CHECK(cdf_at(g, 0.0) == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("Brownian limit prices match Black-Scholes") {
    MlsmParams p = testing::exhibit2();
    p.sigma = 0.0;
    p.rho = 0.2 / std::sqrt(252.0);
    const double s0 = 100.0;
    const double r = testing::kRateDaily;
    std::vector<double> strikes;
    for (double k = 80.0; k <= 120.0 + 1e-9; k += 2.5) strikes.push_back(k);
    for (double T : {5.0, 63.0, 252.0}) {
        const auto prices = carr_madan_call(ModelParams{p}, r, s0, T, strikes);
        for (std::size_t i = 0; i < strikes.size(); ++i) {
            CHECK(std::abs(prices[i] - bs_call(s0, strikes[i], r, T, p.rho)) < 1e-3);
        }
    }
    const double one[] = {100.0};
    CHECK(carr_madan_call(ModelParams{p}, r, s0, 252.0, one)[0] ==
          doctest::Approx(bs_call(s0, 100.0, r, 252.0, p.rho)).epsilon(1e-6));
}

TEST_CASE("deep in-the-money calls approach the forward intrinsic value") {
    const ModelParams p = testing::exhibit5();
    const double K[] = {150.0};
    const double T = 30.0;
    const double c = carr_madan_call(p, testing::kRateDaily, testing::kSpot, T, K)[0];
    const double intrinsic = testing::kSpot - K[0] * std::exp(-testing::kRateDaily * T);
    CHECK(c >= intrinsic - 1e-9);
    CHECK(c - intrinsic < 1e-6 * testing::kSpot);
}

TEST_CASE("prices are stable under grid refinement") {
    const ModelParams p = testing::exhibit4();
    std::vector<double> K;
    for (double k = 250.0; k <= 330.0; k += 5.0) K.push_back(k);
    GridSpec fine;
    fine.n = std::size_t{1} << 16;
    fine.eta = 0.125;
    for (double T : {6.0, 30.0, 120.0}) {
        const auto a = carr_madan_call(p, testing::kRateDaily, testing::kSpot, T, K);
        const auto b = carr_madan_call(p, testing::kRateDaily, testing::kSpot, T, K, 0.75, fine);
        for (std::size_t i = 0; i < K.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-5 * testing::kSpot);
    }
}

TEST_CASE("damping choice does not move prices") {
    const ModelParams p = testing::exhibit4();
    const double K[] = {280.0, 292.58, 305.0};
    const auto a = carr_madan_call(p, testing::kRateDaily, testing::kSpot, 21.0, K, 0.75);
    const auto b = carr_madan_call(p, testing::kRateDaily, testing::kSpot, 21.0, K, 1.5);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-6 * testing::kSpot);
}

TEST_CASE("prices are monotone and convex in strike") {
    const ModelParams p = testing::exhibit4();
    std::vector<double> K;
    for (double k = 200.0; k <= 380.0; k += 1.0) K.push_back(k);
    const auto c = carr_madan_call(p, testing::kRateDaily, testing::kSpot, 30.0, K);
    const double tol = 1e-6 * testing::kSpot;
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i] <= c[i - 1] + tol);
    for (std::size_t i = 1; i + 1 < c.size(); ++i) CHECK(c[i - 1] - 2.0 * c[i] + c[i + 1] >= -tol);
    for (double x : c) CHECK(x >= 0.0);
}

TEST_CASE("put-call parity") {
    const double s0 = testing::kSpot;
    const double r = testing::kRateDaily;
    const double p = put_from_parity(10.0, s0, 295.0, r, 30.0);
    CHECK(p == doctest::Approx(10.0 - s0 + 295.0 * std::exp(-r * 30.0)));
}

TEST_CASE("infeasible damping is rejected") {
    const ModelParams p = testing::exhibit5();  // exponential moments end near u = 124
    const double K[] = {100.0};
    CHECK_THROWS_AS(carr_madan_call(p, 0.0, 100.0, 1.0, K, 200.0), DampingError);
    CHECK_THROWS_AS(carr_madan_call(p, 0.0, 100.0, 1.0, K, -0.5), DomainError);
}

TEST_CASE("density matches a simulated histogram") {
    const MlsmParams p = testing::exhibit2();
    const DistributionGrid g = model_distribution(p, 1.0);
    const std::size_t n = 1'000'000;
    const auto x = sim::sample_mlsm(p, 1.0, n, sim::RngSeed{7});
    const double sd = std::sqrt(model::moments_mlsm(p).variance);
    const double lo = -4.0 * sd;
    const double hi = 4.0 * sd;
    const int bins = 50;
    std::vector<double> count(bins, 0.0);
    for (double xi : x) {
        if (xi < lo || xi >= hi) continue;
        count[static_cast<int>((xi - lo) / (hi - lo) * bins)] += 1.0;
    }
    int worst = 0;
    for (int b = 0; b < bins; ++b) {
        const double a = lo + (hi - lo) * b / bins;
        const double c = lo + (hi - lo) * (b + 1) / bins;
        const double prob = cdf_at(g, c) - cdf_at(g, a);
        const double se = std::sqrt(prob * (1.0 - prob) / static_cast<double>(n));
        const double err = std::abs(count[b] / static_cast<double>(n) - prob);
        if (err > 3.0 * se) ++worst;
    }
    CHECK(worst == 0);
}

TEST_CASE("FFT helper matches a direct DFT") {
    std::vector<std::complex<double>> a(256);
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = {std::sin(0.1 * k), std::cos(0.37 * k * k)};
    auto b = a;
    detail::fft_forward(b);
    for (std::size_t k : {0u, 1u, 77u, 255u}) {
        std::complex<double> s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * std::polar(1.0, -2.0 * kPi * j * k / 256.0);
        CHECK(std::abs(s - b[k]) < 1e-10);
    }
}
