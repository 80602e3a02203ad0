#include "mlsm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <tbb/parallel_for.h>

#include "mlsm/errors.hpp"

namespace mlsm::opt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, std::span<const double> x) {
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
}

struct Simplex {
    std::vector<std::vector<double>> x;
    std::vector<double> f;

    void sort() {
        std::vector<std::size_t> idx(f.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [this](std::size_t a, std::size_t b) { return f[a] < f[b]; });
        std::vector<std::vector<double>> xs;
        std::vector<double> fs;
        for (auto i : idx) {
            xs.push_back(std::move(x[i]));
            fs.push_back(f[i]);
        }
        x = std::move(xs);
        f = std::move(fs);
    }

    double diameter() const {
        double d = 0.0;
        for (std::size_t i = 1; i < x.size(); ++i)
            for (std::size_t j = 0; j < x[0].size(); ++j) d = std::max(d, std::abs(x[i][j] - x[0][j]));
        return d;
    }
};

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts) {
    const std::size_t n = x0.size();
    NelderMeadResult res;
    if (n == 0) {
        res.x = x0;
        res.f = safe_eval(f, x0);
        res.evaluations = 1;
        res.converged = true;
        return res;
    }
    const double dn = static_cast<double>(n);
    const double c_refl = 1.0;
    const double c_exp = 1.0 + 2.0 / dn;
    const double c_con = 0.75 - 1.0 / (2.0 * dn);
    const double c_shr = 1.0 - 1.0 / dn;

    auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        return safe_eval(f, x);
    };

    auto build = [&](const std::vector<double>& centre) {
        Simplex s;
        s.x.push_back(centre);
        s.f.push_back(eval(centre));
        for (std::size_t i = 0; i < n; ++i) {
            auto v = centre;
            v[i] += opts.initial_step;
            s.f.push_back(eval(v));
            s.x.push_back(std::move(v));
        }
        s.sort();
        return s;
    };

    Simplex s = build(x0);
    int restarts_left = opts.restarts;
    double last_converged_f = kInf;

    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    while (res.iterations < opts.max_iter) {
        const bool flat = std::isfinite(s.f[n]) && s.f[n] - s.f[0] <= opts.f_tol;
        if (flat || s.diameter() <= opts.x_tol) {
            if (restarts_left > 0 && last_converged_f - s.f[0] > opts.f_tol) {
                --restarts_left;
                last_converged_f = s.f[0];
                s = build(s.x[0]);
                continue;
            }
            res.converged = true;
            break;
        }
        ++res.iterations;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += s.x[i][j] / dn;

        for (std::size_t j = 0; j < n; ++j) xr[j] = centroid[j] + c_refl * (centroid[j] - s.x[n][j]);
        const double fr = eval(xr);

        if (fr < s.f[0]) {
            for (std::size_t j = 0; j < n; ++j) xe[j] = centroid[j] + c_exp * (xr[j] - centroid[j]);
            const double fe = eval(xe);
            if (fe < fr) {
                s.x[n] = xe;
                s.f[n] = fe;
            } else {
                s.x[n] = xr;
                s.f[n] = fr;
            }
        } else if (fr < s.f[n - 1]) {
            s.x[n] = xr;
            s.f[n] = fr;
        } else {
            const bool outside = fr < s.f[n];
            for (std::size_t j = 0; j < n; ++j) {
                xc[j] = outside ? centroid[j] + c_con * (xr[j] - centroid[j])
                                : centroid[j] + c_con * (s.x[n][j] - centroid[j]);
            }
            const double fc = eval(xc);
            if (outside ? fc <= fr : fc < s.f[n]) {
                s.x[n] = xc;
                s.f[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) s.x[i][j] = s.x[0][j] + c_shr * (s.x[i][j] - s.x[0][j]);
                    s.f[i] = eval(s.x[i]);
                }
            }
        }
        s.sort();
        res.trace.push_back(s.f[0]);
    }
    res.x = s.x[0];
    res.f = s.f[0];
    return res;
}

std::vector<NelderMeadResult> multi_start(const Objective& f, const std::vector<std::vector<double>>& starts,
                                          const NelderMeadOptions& opts) {
    if (starts.empty()) throw FitError("no starting points supplied");
    std::vector<NelderMeadResult> out(starts.size());
    tbb::parallel_for(std::size_t{0}, starts.size(), [&](std::size_t i) { out[i] = nelder_mead(f, starts[i], opts); });
    return out;
}

ParamCodec::Mask make_mask(std::initializer_list<ParamId> free) {
    ParamCodec::Mask m{};
    for (auto id : free) m[static_cast<std::size_t>(id)] = true;
    return m;
}

ParamCodec::ParamCodec(ModelParams base, Mask free, double location_scale) : base_(std::move(base)), mask_(free) {
    validate(base_);
    const auto kind = kind_of(base_);
    for (int i = 0; i < kParamCount; ++i) {
        const auto id = static_cast<ParamId>(i);
        if (!mask_[static_cast<std::size_t>(i)]) continue;
        if (!has_slot(kind, id)) throw DomainError("free parameter '" + std::string(kParamNames[i]) +
                                                   "' does not exist in this model");
        ids_.push_back(id);
    }
    mu_scale_ = std::max(std::abs(get(base_, ParamId::mu)), location_scale);
    m_scale_ = std::max(std::abs(get(base_, ParamId::m)), location_scale);
    rho_sign_ = get(base_, ParamId::rho) < 0.0 ? -1.0 : 1.0;
    sigma_sign_ = get(base_, ParamId::sigma) < 0.0 ? -1.0 : 1.0;
}

std::vector<double> ParamCodec::encode(const ModelParams& p) const {
    validate(p);
    const bool beta_free = mask_[static_cast<std::size_t>(ParamId::beta)];
    std::vector<double> x;
    x.reserve(ids_.size());
    for (auto id : ids_) {
        const double v = get(p, id);
        switch (id) {
            case ParamId::mu: x.push_back(v / mu_scale_); break;
            case ParamId::m: x.push_back(v / m_scale_); break;
            case ParamId::alpha:
                x.push_back(beta_free ? std::log(v) : std::log(v - std::abs(get(p, ParamId::beta))));
                break;
            case ParamId::beta: x.push_back(std::atanh(v / get(p, ParamId::alpha))); break;
            default:
                if (v == 0.0) throw DomainError("cannot free a scale parameter that starts at zero");
                x.push_back(std::log(std::abs(v)));
                break;
        }
    }
    return x;
}

ModelParams ParamCodec::decode(std::span<const double> x) const {
    if (x.size() != ids_.size()) throw DomainError("codec dimension mismatch");
    ModelParams p = base_;
    const bool beta_free = mask_[static_cast<std::size_t>(ParamId::beta)];
    // alpha before beta: beta is a fraction of alpha.
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        const auto id = ids_[i];
        switch (id) {
            case ParamId::mu: set(p, id, mu_scale_ * x[i]); break;
            case ParamId::m: set(p, id, m_scale_ * x[i]); break;
            case ParamId::alpha:
                set(p, id, beta_free ? std::exp(x[i]) : std::abs(get(p, ParamId::beta)) + std::exp(x[i]));
                break;
            case ParamId::beta: break;
            case ParamId::rho: set(p, id, rho_sign_ * std::exp(x[i])); break;
            case ParamId::sigma: set(p, id, sigma_sign_ * std::exp(x[i])); break;
            default: set(p, id, std::exp(x[i])); break;
        }
    }
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (ids_[i] != ParamId::beta) continue;
        const double a = get(p, ParamId::alpha);
        set(p, ParamId::beta, a * std::tanh(x[i]));
    }
    // Fixed beta with free alpha is already consistent; fixed alpha with free
    // beta is consistent through tanh. Anything else (overflow) is caught here.
    validate(p);
    return p;
}

}  // namespace mlsm::opt
