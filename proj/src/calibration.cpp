#include "mlsm/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "mlsm/errors.hpp"
#include "mlsm/model.hpp"

namespace mlsm::calibration {

void OptionChain::validate() const {
    if (!(s0 > 0.0) || !std::isfinite(s0)) throw DomainError("spot must be positive");
    if (!std::isfinite(r_ann)) throw DomainError("rate must be finite");
    for (const auto& q : quotes) {
        if (!(q.strike > 0.0) || !std::isfinite(q.strike)) throw DomainError("strikes must be positive");
        if (!(q.mid >= 0.0) || !std::isfinite(q.mid)) throw DomainError("mid prices must be nonnegative");
        if (!(q.expiry > quote_date)) throw DomainError("expiry must follow the quote date");
    }
}

ScreenResult screen(const OptionChain& chain, double min_mid) {
    chain.validate();
    ScreenResult out;
    out.chain = chain;
    out.chain.quotes.clear();
    const double r = chain.r_day();
    for (const auto& q : chain.quotes) {
        const int T = chain.days_to(q.expiry);
        const double lower = std::max(chain.s0 - q.strike * std::exp(-r * T), 0.0);
        std::ostringstream why;
        if (T <= 0) {
            why << "no trading days to expiry";
        } else if (q.mid < min_mid) {
            why << "mid " << q.mid << " below noise floor " << min_mid;
        } else if (q.mid < lower || q.mid > chain.s0) {
            why << "mid " << q.mid << " outside no-arbitrage bounds [" << lower << ", " << chain.s0 << "]";
        }
        if (!why.str().empty()) {
            ++out.dropped;
            out.warnings.push_back("dropped quote " + format_date(q.expiry) + " K=" + std::to_string(q.strike) +
                                   ": " + why.str());
            continue;
        }
        out.chain.quotes.push_back(q);
    }
    std::sort(out.chain.quotes.begin(), out.chain.quotes.end(), [](const OptionQuote& a, const OptionQuote& b) {
        if (a.expiry != b.expiry) return a.expiry < b.expiry;
        if (a.strike != b.strike) return a.strike < b.strike;
        return a.mid < b.mid;
    });
    return out;
}

std::vector<double> model_prices(const ModelParams& p, const OptionChain& chain, const PricingSetup& setup) {
    std::map<int, std::vector<std::size_t>> by_days;
    for (std::size_t i = 0; i < chain.quotes.size(); ++i) by_days[chain.days_to(chain.quotes[i].expiry)].push_back(i);

    std::vector<double> out(chain.quotes.size());
    const double r = chain.r_day();
    for (const auto& [T, idx] : by_days) {
        if (T <= 0) throw DomainError("quote expires within zero trading days");
        std::vector<double> strikes;
        strikes.reserve(idx.size());
        for (auto i : idx) strikes.push_back(chain.quotes[i].strike);
        const auto prices = transform::carr_madan_call(p, r, chain.s0, T, strikes, setup.a, setup.grid);
        for (std::size_t j = 0; j < idx.size(); ++j) out[idx[j]] = prices[j];
    }
    return out;
}

std::vector<double> price_residuals(const ModelParams& p, const OptionChain& chain, double a,
                                    const transform::GridSpec& grid) {
    auto prices = model_prices(p, chain, {a, grid});
    for (std::size_t i = 0; i < prices.size(); ++i) prices[i] -= chain.quotes[i].mid;
    return prices;
}

double rmse(std::span<const double> residuals) {
    if (residuals.empty()) return 0.0;
    double s = 0.0;
    for (double r : residuals) s += r * r;
    return std::sqrt(s / static_cast<double>(residuals.size()));
}

opt::ParamCodec::Mask default_calibration_mask(ModelKind kind) {
    using enum ParamId;
    if (kind == ModelKind::blm) return opt::make_mask({alpha, beta, d});
    return opt::make_mask({rho, m, alpha, beta, d});
}

namespace {

// The a-moment must hold with some room for the optimiser to stay interior.
bool damping_feasible(const ModelParams& p, double a) {
    try {
        return model::strictly_interior(a + 1.0, p);
    } catch (const Error&) {
        return false;
    }
}

}  // namespace

CalibrationResult calibrate(const OptionChain& chain_in, std::span<const ModelParams> starts,
                            const CalibrationOptions& opts) {
    if (starts.empty()) throw FitError("no starting points supplied");
    const auto screened = screen(chain_in, opts.min_mid);
    const OptionChain& chain = screened.chain;
    std::map<Date, int> expiries;
    for (const auto& q : chain.quotes) ++expiries[q.expiry];
    if (chain.quotes.size() < opts.min_quotes || expiries.size() < opts.min_maturities) {
        throw FitError("calibration needs at least " + std::to_string(opts.min_quotes) + " quotes across " +
                       std::to_string(opts.min_maturities) + " maturities after screening; have " +
                       std::to_string(chain.quotes.size()) + " across " + std::to_string(expiries.size()));
    }

    const ModelKind kind = kind_of(starts.front());
    const opt::ParamCodec codec(starts.front(), opts.free.value_or(default_calibration_mask(kind)));
    const double penalty = 10.0 * chain.s0;
    std::vector<double> mids;
    for (const auto& q : chain.quotes) mids.push_back(q.mid);

    auto rmse_at = [&](const ModelParams& p) {
        if (!damping_feasible(p, opts.pricing.a)) return penalty;
        try {
            auto prices = model_prices(p, chain, opts.pricing);
            for (std::size_t i = 0; i < prices.size(); ++i) prices[i] -= mids[i];
            const double v = rmse(prices);
            return std::isfinite(v) ? v : penalty;
        } catch (const Error&) {
            return penalty;
        }
    };
    auto objective = [&](std::span<const double> x) {
        try {
            return rmse_at(codec.decode(x));
        } catch (const Error&) {
            return penalty;
        }
    };

    std::vector<std::vector<double>> xs;
    CalibrationResult res;
    for (const auto& s : starts) {
        if (kind_of(s) != kind) throw FitError("all starts must use the same model");
        ModelParams q = codec.base();
        for (auto id : codec.free_ids()) set(q, id, get(s, id));
        xs.push_back(codec.encode(q));
        res.start_rmse.push_back(rmse_at(q));
    }
    const auto runs = opt::multi_start(objective, xs, opts.nm);

    std::size_t best = 0;
    for (std::size_t i = 1; i < runs.size(); ++i)
        if (runs[i].f < runs[best].f) best = i;
    const auto& win = runs[best];
    res.params = codec.decode(win.x);
    res.rmse = win.f;
    res.n_quotes_used = chain.quotes.size();
    res.objective_trace = win.trace;
    const bool feasible = damping_feasible(res.params, opts.pricing.a) && win.f < penalty;
    res.converged = win.converged && feasible;
    if (feasible) {
        validate(res.params);
        if (!std::isfinite(model::mcmm_compensator(res.params))) throw InvariantError("compensator not finite");
    }
    return res;
}

double black_scholes_call(double s0, double K, double r, double T, double vol) {
    const double disc_k = K * std::exp(-r * T);
    if (!(vol > 0.0) || !(T > 0.0)) return std::max(s0 - disc_k, 0.0);
    const double sd = vol * std::sqrt(T);
    const double d1 = (std::log(s0 / K) + r * T) / sd + 0.5 * sd;
    const double d2 = d1 - sd;
    auto ncdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    return s0 * ncdf(d1) - disc_k * ncdf(d2);
}

double implied_vol(double price, double s0, double K, double r, double T) {
    const double lower = std::max(s0 - K * std::exp(-r * T), 0.0);
    if (!(price > lower) || !(price < s0)) return std::numeric_limits<double>::quiet_NaN();
    auto f = [&](double v) { return black_scholes_call(s0, K, r, T, v) - price; };
    double lo = 1e-8, hi = 1.0;
    while (f(hi) < 0.0 && hi < 1e3) hi *= 2.0;
    if (f(hi) < 0.0) return std::numeric_limits<double>::quiet_NaN();
    boost::math::tools::eps_tolerance<double> tol(40);
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
    return 0.5 * (a + b);
}

std::vector<ModelParams> default_calibration_starts(const OptionChain& chain_in, const ModelParams& base,
                                                    std::size_t count, double a, double min_mid) {
    const auto chain = screen(chain_in, min_mid).chain;
    if (chain.quotes.empty()) throw FitError("no usable quotes for starting values");
    const double r = chain.r_day();

    // Nearest-to-forward quote of the shortest maturity sets the variance level.
    const Date first = chain.quotes.front().expiry;
    const int T = chain.days_to(first);
    double var_day = std::numeric_limits<double>::quiet_NaN();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : chain.quotes) {
        if (q.expiry != first) continue;
        const double dist = std::abs(std::log(q.strike / (chain.s0 * std::exp(r * T))));
        const double iv = implied_vol(q.mid, chain.s0, q.strike, r, T);
        if (std::isfinite(iv) && dist < best) {
            best = dist;
            var_day = iv * iv;
        }
    }
    if (!std::isfinite(var_day)) throw FitError("cannot infer a variance level from the quotes");

    const ModelKind kind = kind_of(base);
    const double rho = get(base, ParamId::rho);
    const double sigma = std::abs(get(base, ParamId::sigma)) > 0.0 ? std::abs(get(base, ParamId::sigma)) : 1.0;
    const double horizon = kind == ModelKind::mlsm ? get(base, ParamId::h) : 1.0;
    const double jump_var = std::max(var_day - rho * rho, 0.25 * var_day);
    const double skew = get(base, ParamId::beta) / get(base, ParamId::alpha);

    static constexpr double kLadder[] = {1.0, 0.3, 3.0, 0.1, 10.0, 0.03, 30.0, 0.01, 100.0};
    std::vector<ModelParams> out;
    for (const double f : kLadder) {
        if (out.size() >= count) break;
        ModelParams p = base;
        set(p, ParamId::sigma, sigma);
        const double alpha = get(base, ParamId::alpha) * f;
        const double beta = skew * alpha;
        const double g = std::sqrt((alpha - beta) * (alpha + beta));
        set(p, ParamId::alpha, alpha);
        set(p, ParamId::beta, beta);
        set(p, ParamId::d, jump_var * g * g * g / (sigma * sigma * alpha * alpha * horizon));
        try {
            validate(p);
            if (damping_feasible(p, a)) out.push_back(p);
        } catch (const Error&) {
        }
    }
    if (out.empty()) throw FitError("no valid calibration start");
    return out;
}

CalibrationResult calibrate_auto(const OptionChain& chain, const ModelParams& base, const CalibrationOptions& opts) {
    const auto starts = default_calibration_starts(chain, base, opts.n_starts, opts.pricing.a, opts.min_mid);
    return calibrate(chain, starts, opts);
}

}  // namespace mlsm::calibration
