#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mlsm/errors.hpp"
#include "mlsm/inference.hpp"
#include "mlsm/model.hpp"
#include "mlsm/simulator.hpp"
#include "support.hpp"

using namespace mlsm;
using namespace mlsm::inference;

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

ReturnSeries series(std::vector<double> v) {
    ReturnSeries s;
    s.values = std::move(v);
    return s;
}

}  // namespace

TEST_CASE("IG maximum likelihood on a hand-checked sample") {
    const double x[] = {0.5, 1.0, 1.5};
    const IgParams p = fit_ig_mle(x, 1.0);
    CHECK(p.h == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.l == doctest::Approx(4.5).epsilon(1e-14));
    const double levels[] = {50.0, 100.0, 150.0};
    CHECK(fit_ig_mle(levels).l == doctest::Approx(4.5));
}

TEST_CASE("IG estimates satisfy the score equations and beat a simplex search") {
    const IgParams truth = testing::exhibit2().ig;
    const auto x = sim::sample_ig(truth.h, truth.l, 5000, sim::RngSeed{21});
    const IgParams p = fit_ig_mle(x, 1.0);
    double score_h = 0.0, ss = 0.0;
    for (double v : x) {
        score_h += p.l * (v - p.h) / (p.h * p.h * p.h);
        ss += (v - p.h) * (v - p.h) / (2.0 * p.h * p.h * v);
    }
    const double n = static_cast<double>(x.size());
    CHECK(std::abs(score_h) * p.h / n < 1e-6 * p.l);
    CHECK(std::abs(n / (2.0 * p.l) - ss) < 1e-6 * n / (2.0 * p.l));

    const auto nm = opt::nelder_mead(
        [&](std::span<const double> z) { return -ig_log_likelihood(x, {std::exp(z[0]), std::exp(z[1])}); },
        {std::log(0.5), std::log(0.5)});
    CHECK(std::exp(nm.x[0]) == doctest::Approx(p.h).epsilon(1e-4));
    CHECK(std::exp(nm.x[1]) == doctest::Approx(p.l).epsilon(1e-4));
    CHECK(ig_log_likelihood(x, p) >= -nm.f - 1e-9);
}

TEST_CASE("IG recovery from synthetic draws") {
    const IgParams truth{0.192548, 1.49156};
    const auto x = sim::sample_ig(truth.h, truth.l, 100'000, sim::RngSeed{22});
    const IgParams p = fit_ig_mle(x, 1.0);
    CHECK(testing::rel_err(p.h, truth.h) < 0.02);
    CHECK(testing::rel_err(p.l, truth.l) < 0.02);
}

TEST_CASE("degenerate IG samples are rejected") {
    const double same[] = {2.0, 2.0, 2.0};
    CHECK_THROWS_AS(fit_ig_mle(same), FitError);
    const double one[] = {2.0};
    CHECK_THROWS_AS(fit_ig_mle(one), FitError);
    const double neg[] = {2.0, -1.0};
    CHECK_THROWS_AS(fit_ig_mle(neg), DomainError);
}

TEST_CASE("IG cdf") {
    const IgParams p{1.0, 1.0};
    CHECK(ig_cdf(0.0, p) == 0.0);
    // Closed form F(x) = Phi(sqrt(l/x)(x/h - 1)) + e^{2l/h} Phi(-sqrt(l/x)(x/h + 1)).
    for (double x : {0.3, 1.0, 4.0}) {
        const double f = norm_cdf(std::sqrt(1.0 / x) * (x - 1.0)) + std::exp(2.0) * norm_cdf(-std::sqrt(1.0 / x) * (x + 1.0));
        CHECK(ig_cdf(x, p) == doctest::Approx(f).epsilon(1e-12));
    }
}

TEST_CASE("empirical ch.f. and grids") {
    const std::vector<double> x{0.01, -0.02, 0.005, 0.0, 0.03};
    CHECK(empirical_chf(x, 0.0) == std::complex<double>(1.0, 0.0));
    const EcfGrid g = make_ecf_grid(x, 201);
    CHECK(g.theta.size() == 201);
    CHECK(g.theta[100] == 0.0);
    double w = 0.0;
    for (std::size_t j = 0; j < 201; ++j) {
        CHECK(g.theta[j] == -g.theta[200 - j]);
        CHECK(g.weights[j] > 0.0);
        w += g.weights[j];
    }
    CHECK(w == doctest::Approx(1.0));
    CHECK_THROWS_AS(make_ecf_grid(1.0, 200), DomainError);
    CHECK_THROWS_AS(make_ecf_grid(-1.0), DomainError);
}

TEST_CASE("ECF objective properties") {
    const ModelParams truth = testing::exhibit5();
    auto x = sim::sample(truth, 1.0, 100'000, sim::RngSeed{23});
    const EcfGrid g = make_ecf_grid(x);
    const EcfTable table = tabulate_ecf(x, g);
    const double at_truth = ecf_objective(truth, table);
    CHECK(at_truth < 10.0 * ecf_noise_level(truth, g, x.size()));

    ModelParams wider = truth;
    set(wider, ParamId::sigma, 1.5 * get(truth, ParamId::sigma));
    CHECK(ecf_objective(wider, table) > at_truth);

    // The sample's own ch.f. is a perfect match.
    CHECK(ecf_objective([&](double t) { return empirical_chf(x, t); }, table) < 1e-28);

    std::mt19937_64 eng(5);
    std::shuffle(x.begin(), x.end(), eng);
    CHECK(ecf_objective(truth, x, g) == doctest::Approx(at_truth).epsilon(1e-9));
}

TEST_CASE("moment start lands near the generating law") {
    const ModelParams truth = testing::exhibit5();
    const auto x = sim::sample(truth, 1.0, 100'000, sim::RngSeed{24});
    const ModelParams s = moment_start(x, truth);
    const Moments a = model::moments(s);
    const Moments b = model::moments(truth);
    CHECK(a.mean == doctest::Approx(b.mean).epsilon(0.2));
    CHECK(a.variance == doctest::Approx(b.variance).epsilon(0.05));
    CHECK(get(s, ParamId::sigma) == get(truth, ParamId::sigma));
}

TEST_CASE("ECF fit recovers the mixed model in the true gauge") {
    const ModelParams truth = testing::exhibit5();
    const auto data = series(sim::sample(truth, 1.0, 20'000, sim::RngSeed{25}));
    EcfFitOptions opts;
    opts.n_starts = 6;
    const EcfFitResult r = fit_ecf_auto(data, ModelKind::blm, std::nullopt, opts, truth);
    CHECK(r.n_converged > 0);
    CHECK(r.objective < 10.0 * r.noise_level);
    CHECK(get(r.params, ParamId::sigma) == get(truth, ParamId::sigma));
    CHECK(testing::rel_err(get(r.params, ParamId::alpha), get(truth, ParamId::alpha)) < 0.3);
    CHECK(testing::rel_err(get(r.params, ParamId::d), get(truth, ParamId::d)) < 0.3);
    CHECK(std::isfinite(r.log_likelihood));
    for (const auto& c : r.candidates) CHECK_NOTHROW(validate(c.params));
}

TEST_CASE("Gaussian data yields a Gaussian fitted law") {
    // Near-Gaussian NIG laws (large alpha) and the Brownian part are
    // interchangeable, so only the fitted law itself is checked.
    std::mt19937_64 eng(26);
    std::normal_distribution<double> N(2e-4, 0.01);
    std::vector<double> v(20'000);
    for (double& x : v) x = N(eng);
    EcfFitOptions opts;
    opts.n_starts = 6;
    opts.free = opt::make_mask({ParamId::mu, ParamId::rho, ParamId::sigma, ParamId::alpha, ParamId::beta, ParamId::d});
    const EcfFitResult r = fit_ecf_auto(series(v), ModelKind::blm, std::nullopt, opts);
    const Moments m = model::moments(r.params);
    CHECK(std::abs(m.excess_kurtosis) < 0.15);
    CHECK(std::abs(m.skewness) < 0.1);
    CHECK(m.variance == doctest::Approx(1e-4).epsilon(0.05));
}

TEST_CASE("fit errors") {
    const auto data = series(sim::sample(ModelParams{testing::exhibit5()}, 1.0, 500, sim::RngSeed{27}));
    CHECK_THROWS_AS(fit_ecf(data, ModelKind::blm, std::nullopt, std::span<const ModelParams>{}), FitError);
    CHECK_THROWS_AS(fit_ecf_auto(data, ModelKind::mlsm, std::nullopt), FitError);
    CHECK_THROWS_AS(fit_ecf_auto(series({0.1, 0.2}), ModelKind::blm, std::nullopt), DomainError);
}

TEST_CASE("Kolmogorov tail probabilities") {
    CHECK(kolmogorov_pvalue(1.358) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(kolmogorov_pvalue(1.628) == doctest::Approx(0.01).epsilon(0.02));
    CHECK(kolmogorov_pvalue(0.5) == doctest::Approx(0.9639).epsilon(1e-3));
    // Both series agree where they meet.
    CHECK(kolmogorov_pvalue(1.18 - 1e-12) == doctest::Approx(kolmogorov_pvalue(1.18)).epsilon(1e-9));
    CHECK(kolmogorov_pvalue(0.0) == 1.0);
    CHECK(kolmogorov_pvalue(10.0) < 1e-80);
}

TEST_CASE("goodness of fit against the empirical distribution itself") {
    std::vector<double> x{3.0, 1.0, 2.0, 2.0, 5.0};
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    auto fn = [&](double t) {
        return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin()) / 5.0;
    };
    const GofReport r = gof_report(x, fn);
    CHECK(r.ks_stat == 0.0);
    CHECK(r.ks_pvalue == 1.0);
    REQUIRE(r.pp_points.size() == 5);
    for (std::size_t i = 1; i < 5; ++i) {
        CHECK(r.pp_points[i].first >= r.pp_points[i - 1].first);
        CHECK(r.pp_points[i].second >= r.pp_points[i - 1].second);
    }
    CHECK(r.pit_values[0] == doctest::Approx(0.8));
}

TEST_CASE("KS p-values are uniform under the null") {
    const int seeds = 200;
    std::vector<double> pv;
    int rejected = 0;
    for (int s = 0; s < seeds; ++s) {
        std::mt19937_64 eng(1000 + s);
        std::normal_distribution<double> N;
        std::vector<double> x(10'000);
        for (double& v : x) v = N(eng);
        const GofReport r = gof_report(x, norm_cdf);
        CHECK(r.ks_stat >= 0.0);
        CHECK(r.ks_stat <= 1.0);
        if (r.ks_pvalue <= 0.01) ++rejected;
        pv.push_back(r.ks_pvalue);
    }
    CHECK(rejected <= 6);  // 1% level: expected 2, allowing sampling variation
    const GofReport meta = gof_report(pv, [](double u) { return std::clamp(u, 0.0, 1.0); });
    CHECK(meta.ks_pvalue > 0.001);
}

TEST_CASE("series validation") {
    ReturnSeries r;
    r.values = {0.1, 0.2};
    r.dates = {parse_date("2020-01-02"), parse_date("2020-01-02")};
    CHECK_THROWS_AS(r.validate(), DomainError);
    VixSeries v;
    v.levels = {10.0, 0.0};
    CHECK_THROWS_AS(v.validate(), DomainError);
}
