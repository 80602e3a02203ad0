#include "mlsm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mlsm/errors.hpp"

namespace mlsm::model {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBoundaryTol = 1e-13;
const cplx kI(0.0, 1.0);

std::string describe(const char* what, double u) {
    std::ostringstream os;
    os.precision(17);
    os << what << " at u = " << u;
    return os.str();
}

// alpha^2 - (beta+u)^2, factored to keep precision near the boundary.
double nig_radicand(double u, const NigParams& p) {
    return (p.alpha - p.beta - u) * (p.alpha + p.beta + u);
}

double ig_radicand(double u, const IgParams& p) { return 1.0 - 2.0 * p.h * p.h * u / p.l; }

DomainStatus classify(double radicand, double scale) {
    if (radicand > kBoundaryTol * scale) return DomainStatus::interior;
    if (radicand >= -kBoundaryTol * scale) return DomainStatus::boundary;
    return DomainStatus::outside;
}

DomainStatus worst(DomainStatus a, DomainStatus b) {
    return static_cast<int>(a) > static_cast<int>(b) ? a : b;
}

// Evaluated only after the NIG domain check passed.
double cgf_nig_unchecked(double u, const NigParams& p) {
    const double rad = std::max(nig_radicand(u, p), 0.0);
    // gamma - sqrt(rad) rewritten as u (2 beta + u) / (gamma + sqrt(rad)).
    return p.m * u + p.d * u * (2.0 * p.beta + u) / (nig_gamma(p) + std::sqrt(rad));
}

// Endpoint of {s between 0 and s_end : K_L(s) <= cap}; K_L is convex with K_L(0) = 0.
double solve_ig_cap(double s_end, const NigParams& nig, double cap) {
    if (cgf_nig_unchecked(s_end, nig) <= cap) return s_end;
    double inside = 0.0;
    double outside = s_end;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (inside + outside);
        if (mid == inside || mid == outside) break;
        (cgf_nig_unchecked(mid, nig) <= cap ? inside : outside) = mid;
    }
    return inside;
}

std::pair<double, double> scale_interval(double s_lo, double s_hi, double sigma) {
    if (sigma == 0.0) return {-kInf, kInf};
    if (sigma > 0.0) return {s_lo / sigma, s_hi / sigma};
    return {s_hi / sigma, s_lo / sigma};
}

// kappa_3 and kappa_4 by finite differences with a step adapted to the
// distribution's scale and kept inside the admissible interval.
std::pair<double, double> higher_cumulants(const std::function<double(double)>& k,
                                           double variance, std::pair<double, double> interval) {
    double step = 0.2 / std::sqrt(variance);
    const double room = std::min(-interval.first, interval.second);
    step = std::min(step, 0.25 * room);
    const Cumulants c = finite_difference_cumulants(k, step);
    return {c.k3, c.k4};
}

}  // namespace

DomainStatus nig_domain(double u, const NigParams& p) {
    if (!std::isfinite(u)) return DomainStatus::outside;
    return classify(nig_radicand(u, p), p.alpha * p.alpha);
}

DomainStatus ig_domain(double u, const IgParams& p) {
    if (!std::isfinite(u)) return DomainStatus::outside;
    return classify(ig_radicand(u, p), 1.0);
}

DomainStatus mlsm_domain(double u, const MlsmParams& p) {
    const double s = p.sigma * u;
    const DomainStatus nig = nig_domain(s, p.nig);
    if (nig == DomainStatus::outside) return nig;
    return worst(nig, ig_domain(cgf_nig_unchecked(s, p.nig), p.ig));
}

DomainStatus blm_domain(double u, const BlmParams& p) { return nig_domain(p.sigma * u, p.nig); }

std::pair<double, double> mlsm_admissible_interval(const MlsmParams& p) {
    const double cap = p.ig.l / (2.0 * p.ig.h * p.ig.h);
    const double s_hi = solve_ig_cap(p.nig.alpha - p.nig.beta, p.nig, cap);
    const double s_lo = solve_ig_cap(-p.nig.alpha - p.nig.beta, p.nig, cap);
    return scale_interval(s_lo, s_hi, p.sigma);
}

std::pair<double, double> blm_admissible_interval(const BlmParams& p) {
    return scale_interval(-p.nig.alpha - p.nig.beta, p.nig.alpha - p.nig.beta, p.sigma);
}

std::pair<double, double> admissible_interval(const ModelParams& p) {
    if (const auto* q = std::get_if<MlsmParams>(&p)) return mlsm_admissible_interval(*q);
    return blm_admissible_interval(std::get<BlmParams>(p));
}

bool strictly_interior(double u, const ModelParams& p, double margin) {
    const auto [lo, hi] = admissible_interval(p);
    const double lo_gap = std::isfinite(lo) ? margin * std::max(1.0, std::abs(lo)) : 0.0;
    const double hi_gap = std::isfinite(hi) ? margin * std::max(1.0, std::abs(hi)) : 0.0;
    return u > lo + lo_gap && u < hi - hi_gap;
}

double cgf_nig(double u, const NigParams& p) {
    if (nig_domain(u, p) == DomainStatus::outside) {
        throw DomainError(describe("NIG cumulant function undefined", u));
    }
    return cgf_nig_unchecked(u, p);
}

cplx cgf_nig(cplx u, const NigParams& p) {
    if (u.imag() == 0.0) return cgf_nig(u.real(), p);
    if (nig_domain(u.real(), p) == DomainStatus::outside) {
        throw DomainError(describe("NIG exponential moment infinite for Re(u)", u.real()));
    }
    const cplx bu = p.beta + u;
    const cplx rad = p.alpha * p.alpha - bu * bu;
    if (rad.real() < 0.0) throw BranchError("NIG radicand left the right half plane");
    return p.m * u + p.d * u * (2.0 * p.beta + u) / (nig_gamma(p) + std::sqrt(rad));
}

double cgf_ig(double u, const IgParams& p) {
    if (ig_domain(u, p) == DomainStatus::outside) {
        throw DomainError(describe("IG cumulant function undefined", u));
    }
    const double rad = std::max(ig_radicand(u, p), 0.0);
    // (l/h)(1 - sqrt(rad)) rewritten as 2 h u / (1 + sqrt(rad)).
    return 2.0 * p.h * u / (1.0 + std::sqrt(rad));
}

cplx cgf_ig(cplx u, const IgParams& p) {
    if (u.imag() == 0.0) return cgf_ig(u.real(), p);
    const cplx rad = 1.0 - 2.0 * p.h * p.h * u / p.l;
    if (rad.real() < 0.0) throw BranchError("IG radicand left the right half plane");
    return 2.0 * p.h * u / (1.0 + std::sqrt(rad));
}

// ---------------------------------------------------------------------------
// Subordinated model

double cgf_mlsm(double u, const MlsmParams& p) {
    if (mlsm_domain(u, p) == DomainStatus::outside) {
        throw DomainError(describe("MLSM moment generating function infinite", u));
    }
    return u * p.mu + 0.5 * p.rho * p.rho * u * u + cgf_ig(cgf_nig(p.sigma * u, p.nig), p.ig);
}

double mgf_mlsm(double u, const MlsmParams& p) { return std::exp(cgf_mlsm(u, p)); }

cplx char_exponent_mlsm(cplx v, const MlsmParams& p) {
    const cplx iv = kI * v;
    return iv * p.mu + 0.5 * p.rho * p.rho * iv * iv + cgf_ig(cgf_nig(p.sigma * iv, p.nig), p.ig);
}

cplx chf_mlsm(cplx v, const MlsmParams& p, double t) { return std::exp(t * char_exponent_mlsm(v, p)); }

Moments moments_mlsm(const MlsmParams& p) {
    const NigParams& n = p.nig;
    const double g = nig_gamma(n);
    const double h = p.ig.h;
    const double l = p.ig.l;
    const double jump_mean = n.m * p.sigma + n.beta * n.d * p.sigma / g;

    Moments out;
    out.mean = p.mu + h * jump_mean;
    out.variance = h * (n.d * p.sigma * p.sigma / g + n.beta * n.beta * n.d * p.sigma * p.sigma / (g * g * g)) +
                   p.rho * p.rho + h * h * h * jump_mean * jump_mean / l;
    const auto [k3, k4] = higher_cumulants([&p](double u) { return cgf_mlsm(u, p); }, out.variance,
                                           mlsm_admissible_interval(p));
    out.skewness = k3 / std::pow(out.variance, 1.5);
    out.excess_kurtosis = k4 / (out.variance * out.variance);
    return out;
}

double mcmm_compensator(const MlsmParams& p) {
    if (mlsm_domain(1.0, p) == DomainStatus::outside) {
        throw DomainError("E[exp(X_1)] is infinite: parameters cannot be mean-corrected");
    }
    return cgf_mlsm(1.0, p);
}

cplx chf_rn_mlsm(cplx v, const MlsmParams& p, double r, double s0, double t) {
    if (!(s0 > 0.0)) throw DomainError("spot must be positive");
    const double k1 = mcmm_compensator(p);
    const cplx iv = kI * v;
    return std::exp(iv * std::log(s0) + t * (iv * (r - k1) + char_exponent_mlsm(v, p)));
}

// ---------------------------------------------------------------------------
// Behavioral mixed model

double cgf_blm(double u, const BlmParams& p) {
    if (blm_domain(u, p) == DomainStatus::outside) {
        throw DomainError(describe("BLM moment generating function infinite", u));
    }
    return u * p.mu + 0.5 * p.rho * p.rho * u * u + cgf_nig(p.sigma * u, p.nig);
}

double mgf_blm(double u, const BlmParams& p) { return std::exp(cgf_blm(u, p)); }

cplx char_exponent_blm(cplx v, const BlmParams& p) {
    const cplx iv = kI * v;
    return iv * p.mu + 0.5 * p.rho * p.rho * iv * iv + cgf_nig(p.sigma * iv, p.nig);
}

cplx chf_blm(cplx v, const BlmParams& p, double t) { return std::exp(t * char_exponent_blm(v, p)); }

Moments moments_blm(const BlmParams& p) {
    const NigParams& n = p.nig;
    const double g = nig_gamma(n);
    const double a2 = n.alpha * n.alpha;
    const double s = p.sigma;
    const double k2 = p.rho * p.rho + s * s * n.d * a2 / (g * g * g);
    const double k3 = s * s * s * 3.0 * n.d * n.beta * a2 / std::pow(g, 5);
    const double k4 = s * s * s * s * 3.0 * n.d * a2 * (a2 + 4.0 * n.beta * n.beta) / std::pow(g, 7);
    Moments out;
    out.mean = p.mu + s * (n.m + n.d * n.beta / g);
    out.variance = k2;
    out.skewness = k3 / std::pow(k2, 1.5);
    out.excess_kurtosis = k4 / (k2 * k2);
    return out;
}

double mcmm_compensator(const BlmParams& p) {
    if (blm_domain(1.0, p) == DomainStatus::outside) {
        throw DomainError("E[exp(X_1)] is infinite: parameters cannot be mean-corrected");
    }
    return cgf_blm(1.0, p);
}

cplx chf_rn_blm(cplx v, const BlmParams& p, double r, double s0, double t) {
    if (!(s0 > 0.0)) throw DomainError("spot must be positive");
    const double k1 = mcmm_compensator(p);
    const cplx iv = kI * v;
    return std::exp(iv * std::log(s0) + t * (iv * (r - k1) + char_exponent_blm(v, p)));
}

// ---------------------------------------------------------------------------
// Dispatch

double cgf(double u, const ModelParams& p) {
    return std::visit(
        [u](const auto& q) {
            if constexpr (std::is_same_v<std::decay_t<decltype(q)>, MlsmParams>) return cgf_mlsm(u, q);
            else return cgf_blm(u, q);
        },
        p);
}

double mgf(double u, const ModelParams& p) { return std::exp(cgf(u, p)); }

cplx chf(cplx v, const ModelParams& p, double t) {
    return std::visit(
        [&](const auto& q) {
            if constexpr (std::is_same_v<std::decay_t<decltype(q)>, MlsmParams>) return chf_mlsm(v, q, t);
            else return chf_blm(v, q, t);
        },
        p);
}

cplx chf_rn(cplx v, const ModelParams& p, double r, double s0, double t) {
    return std::visit(
        [&](const auto& q) {
            if constexpr (std::is_same_v<std::decay_t<decltype(q)>, MlsmParams>) {
                return chf_rn_mlsm(v, q, r, s0, t);
            } else {
                return chf_rn_blm(v, q, r, s0, t);
            }
        },
        p);
}

Moments moments(const ModelParams& p) {
    return std::visit(
        [](const auto& q) {
            if constexpr (std::is_same_v<std::decay_t<decltype(q)>, MlsmParams>) return moments_mlsm(q);
            else return moments_blm(q);
        },
        p);
}

double mcmm_compensator(const ModelParams& p) {
    return std::visit([](const auto& q) { return mcmm_compensator(q); }, p);
}

RiskNeutralChf::RiskNeutralChf(ModelParams p, double r, double s0, double t)
    : params_(std::move(p)), drift_(0.0), log_s0_(0.0), t_(t) {
    if (!(s0 > 0.0)) throw DomainError("spot must be positive");
    drift_ = r - mcmm_compensator(params_);
    log_s0_ = std::log(s0);
}

cplx RiskNeutralChf::operator()(cplx v) const {
    const cplx iv = kI * v;
    const cplx psi = std::visit(
        [&v](const auto& q) {
            if constexpr (std::is_same_v<std::decay_t<decltype(q)>, MlsmParams>) {
                return char_exponent_mlsm(v, q);
            } else {
                return char_exponent_blm(v, q);
            }
        },
        params_);
    return std::exp(iv * log_s0_ + t_ * (iv * drift_ + psi));
}

Cumulants finite_difference_cumulants(const std::function<double(double)>& cgf, double step) {
    // Second-order central stencils; their error expands in even powers of the
    // step, so two Richardson passes (h, h/2, h/4) leave an O(h^6) remainder.
    auto stencils = [&cgf](double h) {
        const double fm2 = cgf(-2.0 * h);
        const double fm1 = cgf(-h);
        const double f0 = cgf(0.0);
        const double fp1 = cgf(h);
        const double fp2 = cgf(2.0 * h);
        Cumulants c;
        c.k1 = (fp1 - fm1) / (2.0 * h);
        c.k2 = (fp1 - 2.0 * f0 + fm1) / (h * h);
        c.k3 = (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h * h * h);
        c.k4 = (fp2 - 4.0 * fp1 + 6.0 * f0 - 4.0 * fm1 + fm2) / (h * h * h * h);
        return c;
    };
    auto extrapolate = [](const Cumulants& coarse, const Cumulants& fine, double factor) {
        auto r = [factor](double a, double b) { return (factor * b - a) / (factor - 1.0); };
        return Cumulants{r(coarse.k1, fine.k1), r(coarse.k2, fine.k2), r(coarse.k3, fine.k3),
                         r(coarse.k4, fine.k4)};
    };
    const Cumulants d1 = stencils(step);
    const Cumulants d2 = stencils(0.5 * step);
    const Cumulants d4 = stencils(0.25 * step);
    return extrapolate(extrapolate(d1, d2, 4.0), extrapolate(d2, d4, 4.0), 16.0);
}

}  // namespace mlsm::model
