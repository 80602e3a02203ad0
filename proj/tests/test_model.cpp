#include <doctest.h>

#include <boost/math/distributions/inverse_gaussian.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <complex>
#include <random>

#include "mlsm/errors.hpp"
#include "mlsm/model.hpp"
#include "support.hpp"

using namespace mlsm;
using namespace mlsm::model;
using mlsm::testing::mixed_err;
using mlsm::testing::rel_err;

namespace {

// Direct transcription of the cumulant function, radicals left unfactored.
double naive_cgf(double u, const MlsmParams& p) {
    const auto& n = p.nig;
    const double s = p.sigma * u;
    const double kl = n.m * s + n.d * (std::sqrt(n.alpha * n.alpha - n.beta * n.beta) -
                                       std::sqrt(n.alpha * n.alpha - (n.beta + s) * (n.beta + s)));
    const double h = p.ig.h;
    const double l = p.ig.l;
    return p.mu * u + 0.5 * p.rho * p.rho * u * u + (l / h) * (1.0 - std::sqrt(1.0 - 2.0 * h * h * kl / l));
}

// Grid of 11 real arguments inside 80% of the admissible interval, capped at |u| <= 5.
std::vector<double> real_grid(std::pair<double, double> iv) {
    const double lo = std::max(0.8 * iv.first, -5.0);
    const double hi = std::min(0.8 * iv.second, 5.0);
    std::vector<double> u(11);
    for (int i = 0; i < 11; ++i) u[i] = lo + (hi - lo) * i / 10.0;
    return u;
}

}  // namespace

TEST_CASE("NIG cumulant at a textbook point") {
    // alpha = 2, beta = 0, d = 1: K(1) = 2 - sqrt(3).
    CHECK(cgf_nig(1.0, NigParams{0.0, 2.0, 0.0, 1.0}) == doctest::Approx(2.0 - std::sqrt(3.0)).epsilon(1e-15));
    CHECK(cgf_nig(0.0, NigParams{0.3, 7.0, -2.0, 0.4}) == 0.0);
}

TEST_CASE("IG cumulant matches quadrature of the density") {
    const IgParams ig = testing::exhibit2().ig;
    boost::math::inverse_gaussian_distribution<double> dist(ig.h, ig.l);
    boost::math::quadrature::tanh_sinh<double> integrator;
    for (double u : {-3.0, 0.5, 1.0, 3.0}) {
        const double mgf = integrator.integrate(
            [&](double x) {
                if (x <= 0.0) return 0.0;
                const double f = boost::math::pdf(dist, x);
                return f > 0.0 && std::isfinite(f) ? std::exp(u * x) * f : 0.0;
            },
            0.0, 60.0);
        CHECK(rel_err(cgf_ig(u, ig), std::log(mgf)) < 1e-9);
    }
    CHECK(cgf_ig(1.0, ig) == doctest::Approx(0.19500).epsilon(1e-4));
}

TEST_CASE("IG boundary is admitted and the exterior rejected") {
    const IgParams ig{0.5, 2.0};
    const double edge = ig.l / (2.0 * ig.h * ig.h);
    CHECK(ig_domain(edge, ig) == DomainStatus::boundary);
    CHECK(cgf_ig(edge, ig) == doctest::Approx(ig.l / ig.h));
    CHECK(ig_domain(edge * (1 + 1e-6), ig) == DomainStatus::outside);
    CHECK_THROWS_AS(cgf_ig(edge * 1.01, ig), DomainError);
    CHECK_THROWS_AS(cgf_ig(cplx(edge * 1.01, 1.0), ig), BranchError);
}

TEST_CASE("NIG domain edges") {
    const NigParams n{0.0, 10.0, 2.0, 1.0};
    CHECK(nig_domain(8.0, n) == DomainStatus::boundary);
    CHECK(nig_domain(-12.0, n) == DomainStatus::boundary);
    CHECK(nig_domain(8.01, n) == DomainStatus::outside);
    CHECK_THROWS_AS(cgf_nig(8.01, n), DomainError);
    CHECK_THROWS_AS(cgf_nig(cplx(8.01, 0.5), n), DomainError);
}

TEST_CASE("subordinated cumulant function agrees with an independent transcription") {
    std::mt19937_64 g(11);
    for (int k = 0; k < 50; ++k) {
        const MlsmParams p = testing::random_mlsm(g);
        for (double u : real_grid(mlsm_admissible_interval(p))) {
            CHECK(mixed_err(cgf_mlsm(u, p), naive_cgf(u, p)) < 1e-9);
        }
    }
    const MlsmParams e2 = testing::exhibit2();
    CHECK(mixed_err(cgf_mlsm(1.0, e2), naive_cgf(1.0, e2)) < 1e-12);
}

TEST_CASE("ch.f. on the imaginary axis is the MGF and cgf is its logarithm") {
    std::mt19937_64 g(12);
    for (int k = 0; k < 100; ++k) {
        const MlsmParams p = testing::random_mlsm(g);
        const BlmParams b{p.mu, p.rho, p.sigma, p.nig};
        for (double u : real_grid(mlsm_admissible_interval(p))) {
            const cplx v(0.0, -u);
            CHECK(mixed_err(chf_mlsm(v, p), cplx(mgf_mlsm(u, p))) < 1e-10);
            CHECK(mixed_err(cgf_mlsm(u, p), std::log(mgf_mlsm(u, p))) < 1e-10);
        }
        for (double u : real_grid(blm_admissible_interval(b))) {
            CHECK(mixed_err(chf_blm(cplx(0.0, -u), b), cplx(mgf_blm(u, b))) < 1e-10);
        }
    }
}

TEST_CASE("ch.f. basic properties") {
    std::mt19937_64 g(13);
    for (int k = 0; k < 30; ++k) {
        const MlsmParams p = testing::random_mlsm(g);
        CHECK(std::abs(chf_mlsm(0.0, p) - 1.0) < 1e-15);
        for (double v : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
            const cplx a = chf_mlsm(v, p, 3.0);
            CHECK(std::abs(a - std::conj(chf_mlsm(-v, p, 3.0))) < 1e-14);
            CHECK(std::abs(a) <= 1.0 + 1e-14);
            // Infinite divisibility: phi_t = phi_1^t.
            CHECK(std::abs(a - std::pow(chf_mlsm(v, p), 3.0)) < 1e-12);
        }
    }
}

TEST_CASE("degenerate jump scale reduces to Brownian motion") {
    MlsmParams p = testing::exhibit2();
    p.sigma = 0.0;
    for (double v : {0.5, 20.0, 300.0}) {
        const cplx gauss = std::exp(cplx(0.0, v * p.mu) - 0.5 * p.rho * p.rho * v * v);
        CHECK(std::abs(chf_mlsm(v, p) - gauss) < 1e-15);
    }
    const auto iv = mlsm_admissible_interval(p);
    CHECK(std::isinf(iv.first));
    CHECK(std::isinf(iv.second));
}

TEST_CASE("Exhibit 2 moments") {
    const Moments m = moments_mlsm(testing::exhibit2());
    CHECK(m.mean == doctest::Approx(-4.49e-5).epsilon(2e-3));
    CHECK(m.variance == doctest::Approx(2.22e-5).epsilon(2e-3));
}

TEST_CASE("closed-form mean and variance match finite-difference cumulants") {
    std::mt19937_64 g(14);
    std::vector<MlsmParams> draws{testing::exhibit2(), testing::exhibit4()};
    for (int k = 0; k < 100; ++k) draws.push_back(testing::random_mlsm(g));
    for (const auto& p : draws) {
        const Moments m = moments_mlsm(p);
        const double step = 0.05 / std::sqrt(m.variance);
        const auto iv = mlsm_admissible_interval(p);
        const Cumulants c =
            finite_difference_cumulants([&](double u) { return cgf_mlsm(u, p); },
                                        std::min(step, 0.2 * std::min(-iv.first, iv.second)));
        CHECK(rel_err(m.mean, c.k1) < 1e-6);
        CHECK(rel_err(m.variance, c.k2) < 1e-6);
    }
    const BlmParams e5 = testing::exhibit5();
    const Moments m = moments_blm(e5);
    const Cumulants c = finite_difference_cumulants([&](double u) { return cgf_blm(u, e5); },
                                                    0.05 / std::sqrt(m.variance));
    CHECK(rel_err(m.mean, c.k1) < 1e-6);
    CHECK(rel_err(m.variance, c.k2) < 1e-6);
}

TEST_CASE("symmetric parameters give zero skewness") {
    MlsmParams p = testing::exhibit2();
    p.mu = 0.0;
    p.nig.m = 0.0;
    p.nig.beta = 0.0;
    const Moments m = moments_mlsm(p);
    CHECK(std::abs(m.skewness) < 1e-6);
    CHECK(m.excess_kurtosis > 0.0);
}

TEST_CASE("martingale condition under the mean-correcting measure") {
    std::mt19937_64 g(15);
    std::vector<ModelParams> sets{testing::exhibit2(), testing::exhibit4(), testing::exhibit5()};
    for (int k = 0; k < 20; ++k) sets.emplace_back(testing::random_mlsm(g));
    for (const auto& p : sets) {
        if (!strictly_interior(1.0, p)) continue;
        for (double T : {1.0, 21.0, 126.0}) {
            const double r = testing::kRateDaily;
            const cplx v = chf_rn(cplx(0.0, -1.0), p, r, testing::kSpot, T);
            CHECK(rel_err(v.real(), testing::kSpot * std::exp(r * T)) < 1e-9);
            CHECK(std::abs(v.imag()) < 1e-9 * testing::kSpot);
        }
    }
    CHECK(mcmm_compensator(testing::exhibit2()) == doctest::Approx(cgf_mlsm(1.0, testing::exhibit2())));
}

TEST_CASE("compensator rejects parameters with an infinite exponential moment") {
    BlmParams p = testing::exhibit5();
    p.sigma = 500.0;  // sigma > alpha - beta
    CHECK_THROWS_WITH_AS(mcmm_compensator(p), doctest::Contains("cannot be mean-corrected"), DomainError);
    CHECK_THROWS_AS(chf_rn(cplx(1.0), ModelParams{p}, 0.0, 100.0, 1.0), DomainError);
    CHECK_THROWS_AS(chf_rn(cplx(1.0), ModelParams{testing::exhibit5()}, 0.0, 0.0, 1.0), DomainError);
}

TEST_CASE("risk-neutral functor matches the direct evaluation") {
    const ModelParams p = testing::exhibit4();
    const RiskNeutralChf f(p, testing::kRateDaily, testing::kSpot, 30.0);
    for (double v : {0.0, 0.3, 3.0, 30.0}) {
        const cplx z(v, -1.75);
        CHECK(std::abs(f(z) - chf_rn(z, p, testing::kRateDaily, testing::kSpot, 30.0)) <
              1e-12 * std::abs(f(z)) + 1e-300);
    }
}

TEST_CASE("finite-difference cumulants of a Gaussian") {
    const Cumulants c = finite_difference_cumulants([](double u) { return 0.3 * u + 0.5 * 4.0 * u * u; }, 0.1);
    CHECK(c.k1 == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(c.k2 == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(std::abs(c.k3) < 1e-8);
    CHECK(std::abs(c.k4) < 1e-6);
}
