#include "mlsm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/distributions/inverse_gaussian.hpp>
#include <boost/random/normal_distribution.hpp>

#include "mlsm/errors.hpp"
#include "mlsm/model.hpp"

namespace mlsm::inference {

namespace {

constexpr double kPi = std::numbers::pi;

struct SampleMoments {
    double mean = 0.0, var = 0.0, skew = 0.0, exkurt = 0.0;
};

SampleMoments sample_moments(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    SampleMoments s;
    for (double v : x) s.mean += v;
    s.mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - s.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    s.var = m2;
    s.skew = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    s.exkurt = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
    return s;
}

}  // namespace

void ReturnSeries::validate(std::size_t min_len) const {
    if (values.size() < min_len) {
        throw DomainError("return series has " + std::to_string(values.size()) + " observations, need at least " +
                          std::to_string(min_len));
    }
    if (!dates.empty() && dates.size() != values.size()) throw DomainError("dates and values differ in length");
    for (std::size_t i = 1; i < dates.size(); ++i)
        if (!(dates[i - 1] < dates[i])) throw DomainError("return dates must be strictly increasing");
    for (double v : values)
        if (!std::isfinite(v)) throw DomainError("return values must be finite");
}

void VixSeries::validate() const {
    if (!dates.empty() && dates.size() != levels.size()) throw DomainError("dates and levels differ in length");
    for (double v : levels)
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("volatility index levels must be positive");
}

IgParams fit_ig_mle(std::span<const double> levels, double scale) {
    if (!(scale > 0.0)) throw DomainError("scale must be positive");
    if (levels.size() < 2) throw FitError("IG fit needs at least two observations");
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : levels) {
        const double x = scale * v;
        if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("IG fit needs positive observations");
        sum += x;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (hi == lo) throw FitError("degenerate sample: all observations equal");
    const double n = static_cast<double>(levels.size());
    const double h = sum / n;
    double s = 0.0;
    for (double v : levels) s += 1.0 / (scale * v) - 1.0 / h;
    if (!(s > 0.0)) throw FitError("degenerate sample: shape undefined");
    return {h, n / s};
}

IgParams fit_ig_mle(const VixSeries& v, double scale) {
    v.validate();
    return fit_ig_mle(v.levels, scale);
}

double ig_log_likelihood(std::span<const double> x, const IgParams& p) {
    validate(p);
    double ll = 0.0;
    for (double v : x) {
        if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
        ll += 0.5 * std::log(p.l / (2.0 * kPi * v * v * v)) - p.l * (v - p.h) * (v - p.h) / (2.0 * p.h * p.h * v);
    }
    return ll;
}

double ig_cdf(double x, const IgParams& p) {
    if (!(x > 0.0)) return 0.0;
    if (x == std::numeric_limits<double>::infinity()) return 1.0;
    return boost::math::cdf(boost::math::inverse_gaussian_distribution<double>(p.h, p.l), x);
}

// ---------------------------------------------------------------- ECF

cplx empirical_chf(std::span<const double> data, double theta) {
    if (data.empty()) throw DomainError("empirical characteristic function of an empty sample");
    double re = 0.0, im = 0.0;
    for (double x : data) {
        re += std::cos(theta * x);
        im += std::sin(theta * x);
    }
    const double n = static_cast<double>(data.size());
    return {re / n, im / n};
}

EcfGrid make_ecf_grid(double radius, std::size_t points) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("ECF grid radius must be positive");
    if (points < 3 || points % 2 == 0) throw DomainError("ECF grid needs an odd number (>= 3) of points");
    EcfGrid g;
    g.theta.resize(points);
    g.weights.resize(points);
    const double s = radius / 3.0;
    double total = 0.0;
    const auto half = static_cast<double>(points - 1) / 2.0;
    for (std::size_t j = 0; j < points; ++j) {
        const double th = radius * (static_cast<double>(j) - half) / half;
        g.theta[j] = th;
        g.weights[j] = std::exp(-th * th / (2.0 * s * s));
        total += g.weights[j];
    }
    for (double& w : g.weights) w /= total;
    return g;
}

EcfGrid make_ecf_grid(std::span<const double> data, std::size_t points) {
    const auto mo = sample_moments(data);
    const double sd = std::sqrt(mo.var);
    if (!(sd > 0.0)) throw FitError("sample has zero variance");
    const double cap = 10.0 / sd;
    const double step = 0.05 / sd;
    double radius = cap;
    for (double th = step; th < cap; th += step) {
        if (std::abs(empirical_chf(data, th)) < 0.05) {
            radius = th;
            break;
        }
    }
    return make_ecf_grid(radius, points);
}

EcfTable tabulate_ecf(std::span<const double> data, const EcfGrid& grid) {
    const std::size_t p = grid.theta.size();
    if (p == 0 || grid.weights.size() != p) throw DomainError("malformed ECF grid");
    for (std::size_t j = 0; j < p; ++j) {
        if (grid.theta[j] != -grid.theta[p - 1 - j]) throw DomainError("ECF grid must be symmetric about 0");
        if (!(grid.weights[j] > 0.0)) throw DomainError("ECF weights must be positive");
    }
    EcfTable t;
    t.grid = grid;
    t.n = data.size();
    t.values.resize(p);
    for (std::size_t j = p / 2; j < p; ++j) {
        t.values[j] = empirical_chf(data, grid.theta[j]);
        t.values[p - 1 - j] = std::conj(t.values[j]);
    }
    return t;
}

double ecf_objective(const std::function<cplx(double)>& chf, const EcfTable& table) {
    const auto& th = table.grid.theta;
    const auto& w = table.grid.weights;
    const std::size_t p = th.size();
    double s = 0.0;
    for (std::size_t j = p / 2; j < p; ++j) {
        const cplx phi = chf(th[j]);
        const std::size_t k = p - 1 - j;
        s += w[j] * std::norm(table.values[j] - phi);
        if (k != j) s += w[k] * std::norm(table.values[k] - std::conj(phi));
    }
    return s;
}

double ecf_objective(const ModelParams& p, const EcfTable& table) {
    return ecf_objective([&p](double v) { return model::chf(v, p, 1.0); }, table);
}

double ecf_objective(const ModelParams& p, std::span<const double> data, const EcfGrid& grid) {
    return ecf_objective(p, tabulate_ecf(data, grid));
}

double ecf_noise_level(const ModelParams& p, const EcfGrid& grid, std::size_t n) {
    double s = 0.0;
    for (std::size_t j = 0; j < grid.theta.size(); ++j)
        s += grid.weights[j] * (1.0 - std::norm(model::chf(grid.theta[j], p, 1.0)));
    return s / static_cast<double>(n);
}

// ---------------------------------------------------------------- fitting

double log_likelihood(const ModelParams& p, std::span<const double> data) {
    if (data.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    const Moments mo = model::moments(p);
    const auto g = transform::distribution_from_chf([&p](double v) { return model::chf(v, p, 1.0); }, mo.mean,
                                                    std::sqrt(mo.variance), std::size_t{1} << 14, 20.0, *lo, *hi);
    double ll = 0.0;
    for (double x : data) ll += std::log(std::max(transform::pdf_at(g, x), 1e-300));
    return ll;
}

opt::ParamCodec::Mask default_ecf_mask(ModelKind kind) {
    using enum ParamId;
    if (kind == ModelKind::blm) return opt::make_mask({mu, rho, alpha, beta, d});
    return opt::make_mask({mu, rho, m, alpha, beta, d});
}

ModelParams moment_start(std::span<const double> data, const ModelParams& gauge) {
    const auto mo = sample_moments(data);
    if (!(mo.var > 0.0)) throw FitError("sample has zero variance");

    // A tenth of the variance goes to the Gaussian part.
    const double var_j = 0.9 * mo.var;
    const double rho = std::sqrt(0.1 * mo.var);
    const double s = mo.skew * std::pow(mo.var / var_j, 1.5);
    const double k = mo.exkurt * (mo.var / var_j) * (mo.var / var_j);

    const double denom = std::max(k - 4.0 * s * s / 3.0, 0.05);
    const double zeta = 3.0 / denom;  // delta * gamma
    double r = std::copysign(std::sqrt(std::min(s * s * zeta / 9.0, 0.81)), s);
    const double one_m = 1.0 - r * r;
    const double delta = std::sqrt(zeta * var_j * one_m);
    const double gamma = std::sqrt(zeta / (var_j * one_m));
    const double alpha = gamma / std::sqrt(one_m);
    const double beta = r * alpha;
    const double jump_mean = delta * beta / gamma;

    ModelParams p = gauge;
    const double sigma = std::abs(get(gauge, ParamId::sigma)) > 0.0 ? std::abs(get(gauge, ParamId::sigma)) : 1.0;
    const double horizon = kind_of(gauge) == ModelKind::mlsm ? get(gauge, ParamId::h) : 1.0;
    const double m = get(gauge, ParamId::m);
    set(p, ParamId::sigma, sigma);
    set(p, ParamId::rho, rho);
    set(p, ParamId::alpha, alpha * sigma);
    set(p, ParamId::beta, beta * sigma);
    set(p, ParamId::d, delta / (sigma * horizon));
    set(p, ParamId::mu, mo.mean - jump_mean - sigma * m * horizon);
    validate(p);
    return p;
}

std::vector<ModelParams> default_starts(std::span<const double> data, const ModelParams& gauge,
                                        const opt::ParamCodec::Mask& free, std::size_t count, double jitter,
                                        std::uint64_t seed) {
    std::vector<ModelParams> out;
    if (count == 0) return out;
    const ModelParams centre = moment_start(data, gauge);
    out.push_back(centre);
    const opt::ParamCodec codec(centre, free);
    const auto x0 = codec.encode(centre);
    std::mt19937_64 eng(seed);
    boost::random::normal_distribution<double> normal;
    for (std::size_t attempt = 0; out.size() < count && attempt < 100 * count; ++attempt) {
        auto x = x0;
        for (double& v : x) v += jitter * normal(eng);
        try {
            out.push_back(codec.decode(x));
        } catch (const Error&) {
        }
    }
    return out;
}

EcfFitResult fit_ecf(const ReturnSeries& data, ModelKind kind, std::optional<IgParams> ig_fixed,
                     std::span<const ModelParams> starts, const EcfFitOptions& opts) {
    data.validate(100);
    if (starts.empty()) throw FitError("no starting points supplied");
    if (kind == ModelKind::mlsm && !ig_fixed) throw FitError("the subordinated model needs a fixed IG pair");

    std::vector<ModelParams> prepared;
    for (const auto& s : starts) {
        if (kind_of(s) != kind) throw FitError("start does not match the requested model");
        ModelParams q = s;
        if (ig_fixed) {
            if (kind == ModelKind::mlsm) {
                set(q, ParamId::h, ig_fixed->h);
                set(q, ParamId::l, ig_fixed->l);
            }
        }
        validate(q);
        prepared.push_back(q);
    }

    EcfFitResult res;
    res.grid = make_ecf_grid(data.values, opts.grid_points);
    const EcfTable table = tabulate_ecf(data.values, res.grid);
    const opt::ParamCodec codec(prepared.front(), opts.free.value_or(default_ecf_mask(kind)));

    auto objective = [&](std::span<const double> x) {
        try {
            return ecf_objective(codec.decode(x), table);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    std::vector<std::vector<double>> xs;
    for (const auto& s : prepared) {
        // Fixed slots come from the first start.
        ModelParams q = codec.base();
        for (auto id : codec.free_ids()) set(q, id, get(s, id));
        try {
            xs.push_back(codec.encode(q));
        } catch (const Error&) {
        }
    }
    if (xs.empty()) throw FitError("no valid starting point");
    const auto runs = opt::multi_start(objective, xs, opts.nm);

    double best_ll = -std::numeric_limits<double>::infinity();
    std::optional<std::size_t> best;
    for (const auto& run : runs) {
        FitCandidate c;
        c.iterations = run.iterations;
        c.converged = run.converged && std::isfinite(run.f);
        c.objective = run.f;
        try {
            c.params = codec.decode(run.x);
            c.log_likelihood = log_likelihood(c.params, data.values);
        } catch (const Error&) {
            c.params = codec.base();
            c.converged = false;
            c.log_likelihood = -std::numeric_limits<double>::infinity();
        }
        if (c.converged) {
            ++res.n_converged;
            if (c.log_likelihood > best_ll || !best) {
                best_ll = c.log_likelihood;
                best = res.candidates.size();
            }
        }
        res.candidates.push_back(std::move(c));
    }
    if (!best) throw FitError("no start converged");
    const auto& win = res.candidates[*best];
    validate(win.params);
    res.params = win.params;
    res.objective = win.objective;
    res.log_likelihood = win.log_likelihood;
    res.noise_level = ecf_noise_level(win.params, res.grid, data.values.size());
    return res;
}

EcfFitResult fit_ecf_auto(const ReturnSeries& data, ModelKind kind, std::optional<IgParams> ig_fixed,
                          const EcfFitOptions& opts, std::optional<ModelParams> gauge) {
    data.validate(100);
    ModelParams g;
    if (gauge) {
        g = *gauge;
    } else if (kind == ModelKind::blm) {
        g = BlmParams{0.0, 1e-3, 1.0, {0.0, 100.0, 0.0, 1e-2}};
    } else {
        if (!ig_fixed) throw FitError("the subordinated model needs a fixed IG pair");
        g = MlsmParams{0.0, 1e-3, 1.0, {0.0, 100.0, 0.0, 1e-2}, *ig_fixed};
    }
    if (kind_of(g) != kind) throw FitError("gauge does not match the requested model");
    if (kind == ModelKind::mlsm && ig_fixed) {
        set(g, ParamId::h, ig_fixed->h);
        set(g, ParamId::l, ig_fixed->l);
    }
    const auto starts = default_starts(data.values, g, opts.free.value_or(default_ecf_mask(kind)), opts.n_starts,
                                       opts.jitter, opts.seed);
    return fit_ecf(data, kind, ig_fixed, starts, opts);
}

// ---------------------------------------------------------------- diagnostics

double kolmogorov_pvalue(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    double p;
    if (lambda < 1.18) {
        // P(K <= lambda) via the theta-function form, fast for small lambda.
        double s = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double a = (2.0 * k - 1.0) * kPi / lambda;
            s += std::exp(-a * a / 8.0);
        }
        p = 1.0 - std::sqrt(2.0 * kPi) / lambda * s;
    } else {
        double s = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double term = std::exp(-2.0 * k * k * lambda * lambda);
            s += (k % 2 == 1 ? term : -term);
            if (term < 1e-300) break;
        }
        p = 2.0 * s;
    }
    return std::clamp(p, 0.0, 1.0);
}

namespace {

// sup_x |F_n(x) - F(x)|. Between order statistics F_n is flat and F is
// monotone, so the supremum is reached at a sample point or just left of one.
double ks_distance(const std::vector<double>& sorted_x, const std::function<double(double)>& cdf) {
    const std::size_t n = sorted_x.size();
    const double inf = std::numeric_limits<double>::infinity();
    double d = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && sorted_x[j + 1] == sorted_x[i]) ++j;
        const double below = static_cast<double>(i) / static_cast<double>(n);
        const double at = static_cast<double>(j + 1) / static_cast<double>(n);
        const double f_left = std::clamp(cdf(std::nextafter(sorted_x[i], -inf)), 0.0, 1.0);
        const double f_at = std::clamp(cdf(sorted_x[i]), 0.0, 1.0);
        d = std::max({d, std::abs(below - f_left), std::abs(at - f_at)});
        i = j + 1;
    }
    return d;
}

}  // namespace

GofReport gof_report(std::span<const double> data, const std::function<double(double)>& model_cdf) {
    if (data.empty()) throw DomainError("goodness of fit needs data");
    const std::size_t n = data.size();
    GofReport r;
    r.pit_values.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.pit_values[i] = std::clamp(model_cdf(data[i]), 0.0, 1.0);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return data[a] < data[b]; });
    std::vector<double> xs(n), fs(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = data[order[i]];
        fs[i] = r.pit_values[order[i]];
    }
    // Repair any non-monotone model values (interpolation noise) for the PP plot.
    for (std::size_t i = 1; i < n; ++i) fs[i] = std::max(fs[i], fs[i - 1]);

    const double sqrt_n = std::sqrt(static_cast<double>(n));
    r.ks_stat = ks_distance(xs, model_cdf);
    r.ks_pvalue = kolmogorov_pvalue(sqrt_n * r.ks_stat);
    r.pp_points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) r.pp_points.emplace_back(static_cast<double>(i + 1) / static_cast<double>(n), fs[i]);

    std::vector<double> u = r.pit_values;
    std::sort(u.begin(), u.end());
    r.pit_ks_pvalue = kolmogorov_pvalue(sqrt_n * ks_distance(u, [](double v) { return v; }));
    return r;
}

GofReport gof_report(std::span<const double> data, const transform::DistributionGrid& model) {
    return gof_report(data, [&model](double x) { return transform::cdf_at(model, x); });
}

}  // namespace mlsm::inference
