#include "mlsm/transform.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>

#include "mlsm/errors.hpp"
#include "mlsm/model.hpp"

namespace mlsm::transform {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Plans are created once per size; only fftw_execute_* is thread-safe, so
// planning happens under a lock.
fftw_plan forward_plan(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, fftw_plan> plans;
    std::lock_guard lock(mutex);
    auto it = plans.find(n);
    if (it != plans.end()) return it->second;
    std::vector<cplx> scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.emplace(n, plan);
    return plan;
}

void check_chf(const ChfFn& chf, double eta, std::size_t n) {
    const cplx at0 = chf(0.0);
    if (std::abs(at0 - 1.0) > 1e-12) {
        throw DomainError("characteristic function must equal 1 at the origin");
    }
    for (std::size_t j : {std::size_t{1}, std::size_t{7}, std::size_t{31}, n / 64, n / 8, n / 3}) {
        const double v = static_cast<double>(j) * eta;
        const cplx plus = chf(v);
        const cplx minus = chf(-v);
        if (std::abs(minus - std::conj(plus)) > 1e-12 * std::max(1.0, std::abs(plus))) {
            throw DomainError("characteristic function is not Hermitian");
        }
    }
}

double trapezoid_mass(std::span<const double> f, double dx) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * dx;
}

}  // namespace

double GridSpec::lambda() const { return 2.0 * kPi / (static_cast<double>(n) * eta); }

void GridSpec::validate() const {
    if (n < 256 || !is_power_of_two(n)) throw DomainError("grid size must be a power of two >= 256");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("frequency spacing eta must be > 0");
    if (!std::isfinite(x_center)) throw DomainError("grid centre must be finite");
}

namespace detail {

void fft_forward(std::vector<cplx>& data) {
    if (!is_power_of_two(data.size())) throw DomainError("FFT length must be a power of two");
    fftw_plan plan = forward_plan(data.size());
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
}

}  // namespace detail

DistributionGrid pdf_cdf_from_chf(const ChfFn& chf, const GridSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n;
    const std::size_t half = n / 2;
    const double eta = spec.eta;
    const double lambda = spec.lambda();
    const double x0 = spec.x_center - static_cast<double>(half) * lambda;
    check_chf(chf, eta, n);

    // Frequencies v_m = m eta, m = -n/2 .. n/2-1, stored at index m + n/2.
    // The negative half follows from Hermitian symmetry.
    std::vector<cplx> positive(half + 1);
    for (std::size_t j = 0; j <= half; ++j) positive[j] = chf(static_cast<double>(j) * eta);

    std::vector<cplx> buf(n);
    for (std::size_t idx = 0; idx < n; ++idx) {
        const auto m = static_cast<std::ptrdiff_t>(idx) - static_cast<std::ptrdiff_t>(half);
        const double v = static_cast<double>(m) * eta;
        const cplx phi = m >= 0 ? positive[static_cast<std::size_t>(m)]
                                : std::conj(positive[static_cast<std::size_t>(-m)]);
        buf[idx] = phi * std::exp(-kI * (v * x0));
    }
    detail::fft_forward(buf);

    DistributionGrid g;
    g.x.resize(n);
    g.pdf.resize(n);
    g.cdf.resize(n);
    double max_re = 0.0;
    double max_im = 0.0;
    const double scale = eta / (2.0 * kPi);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx f = (k % 2 == 0 ? scale : -scale) * buf[k];
        g.x[k] = x0 + static_cast<double>(k) * lambda;
        g.pdf[k] = std::max(f.real(), 0.0);
        max_re = std::max(max_re, std::abs(f.real()));
        max_im = std::max(max_im, std::abs(f.imag()));
    }
    if (max_im > 1e-10 * max_re) {
        throw GridCoverageError("characteristic function not negligible at the frequency cutoff");
    }

    g.raw_mass = trapezoid_mass(g.pdf, lambda);
    const std::size_t edge = std::max<std::size_t>(2, n / 40);
    const double left_edge = trapezoid_mass(std::span(g.pdf).first(edge), lambda);
    const double right_edge = trapezoid_mass(std::span(g.pdf).last(edge), lambda);
    if (std::abs(g.raw_mass - 1.0) > 1e-4 || left_edge > 1e-6 || right_edge > 1e-6) {
        std::ostringstream os;
        os << "grid too narrow: mass " << g.raw_mass << ", edge mass " << left_edge << " / " << right_edge;
        throw GridCoverageError(os.str());
    }

    g.cdf[0] = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        const double step = 0.5 * lambda * (g.pdf[k - 1] + g.pdf[k]);
        g.cdf[k] = std::max(g.cdf[k - 1], g.cdf[k - 1] + step);
    }
    const double total = g.cdf.back();
    for (std::size_t k = 0; k < n; ++k) {
        g.cdf[k] /= total;
        g.pdf[k] /= total;
    }
    return g;
}

DistributionGrid distribution_from_chf(const ChfFn& chf, double mean, double sd, std::size_t n,
                                       double half_width_sd, double cover_lo, double cover_hi) {
    if (!(sd > 0.0) || !std::isfinite(sd)) throw DomainError("standard deviation must be positive");
    double half = half_width_sd * sd;
    if (std::isfinite(cover_lo)) half = std::max(half, 1.05 * (mean - cover_lo));
    if (std::isfinite(cover_hi)) half = std::max(half, 1.05 * (cover_hi - mean));

    for (int attempt = 0;; ++attempt) {
        GridSpec spec;
        spec.n = n;
        spec.eta = 2.0 * kPi / (2.0 * half);
        spec.x_center = mean;
        try {
            return pdf_cdf_from_chf(chf, spec);
        } catch (const GridCoverageError&) {
            if (attempt >= 5) throw;
            half *= 2.0;
            if (n < (std::size_t{1} << 20)) n *= 2;
        }
    }
}

DistributionGrid model_distribution(const ModelParams& p, double t, std::size_t n) {
    const Moments mo = model::moments(p);
    auto g = distribution_from_chf([&](double v) { return model::chf(v, p, t); }, mo.mean * t,
                                   std::sqrt(mo.variance * t), n);
    g.horizon_days = t;
    return g;
}

DistributionGrid risk_neutral_distribution(const ModelParams& p, double r, double t, std::size_t n) {
    const Moments mo = model::moments(p);
    const double drift = (r - model::mcmm_compensator(p)) * t;
    const model::RiskNeutralChf chf(p, r, 1.0, t);
    auto g = distribution_from_chf([&chf](double v) { return chf(v); },
                                   drift + mo.mean * t, std::sqrt(mo.variance * t), n);
    g.horizon_days = t;
    return g;
}

double inv_cdf(const DistributionGrid& g, double u) {
    const auto it = std::upper_bound(g.cdf.begin(), g.cdf.end(), u);
    if (it == g.cdf.begin()) return g.x.front();
    if (it == g.cdf.end()) return g.x.back();
    const auto k = static_cast<std::size_t>(it - g.cdf.begin());
    const double c0 = g.cdf[k - 1];
    const double c1 = g.cdf[k];
    return g.x[k - 1] + (u - c0) / (c1 - c0) * (g.x[k] - g.x[k - 1]);
}

namespace {

double interpolate(const DistributionGrid& g, const std::vector<double>& y, double x, double left,
                   double right) {
    if (x <= g.x.front()) return left;
    if (x >= g.x.back()) return right;
    const double pos = (x - g.x.front()) / g.spacing();
    const auto k = std::min(static_cast<std::size_t>(pos), g.x.size() - 2);
    const double frac = pos - static_cast<double>(k);
    return y[k] + frac * (y[k + 1] - y[k]);
}

}  // namespace

double cdf_at(const DistributionGrid& g, double x) { return interpolate(g, g.cdf, x, 0.0, 1.0); }

double pdf_at(const DistributionGrid& g, double x) { return interpolate(g, g.pdf, x, 0.0, 0.0); }

std::vector<double> carr_madan_call(const ContourChfFn& chf_rn, double r, double s0, double T,
                                    std::span<const double> strikes, double a, const GridSpec& spec) {
    spec.validate();
    if (!(a > 0.0)) throw DomainError("damping factor must be > 0");
    if (!(s0 > 0.0)) throw DomainError("spot must be > 0");
    if (!(T > 0.0)) throw DomainError("maturity must be > 0");

    // E[S_T^{a+1}] must be finite: the integrand at v = 0.
    cplx at_origin;
    try {
        at_origin = chf_rn(cplx(0.0, -(a + 1.0)));
    } catch (const DomainError& e) {
        throw DampingError(std::string("damping a infeasible: ") + e.what());
    }
    if (!std::isfinite(at_origin.real()) || !std::isfinite(at_origin.imag())) {
        throw DampingError("damping a infeasible: E[S_T^(a+1)] is not finite");
    }

    const std::size_t n = spec.n;
    const double eta = spec.eta;
    const double lambda = spec.lambda();
    const double centre = spec.x_center != 0.0 ? spec.x_center : std::log(s0);
    const double k0 = centre - 0.5 * static_cast<double>(n) * lambda;
    const double discount = std::exp(-r * T);

    std::vector<cplx> buf(n, cplx(0.0, 0.0));
    double peak = 0.0;
    std::size_t quiet = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double v = static_cast<double>(j) * eta;
        const cplx phi = j == 0 ? at_origin : chf_rn(cplx(v, -(a + 1.0)));
        const cplx denom(a * a + a - v * v, (2.0 * a + 1.0) * v);
        const cplx psi = discount * phi / denom;
        double w = 1.0;
        if (spec.rule == Quadrature::trapezoid) {
            w = j == 0 ? 0.5 : 1.0;
        } else {
            w = j == 0 ? 1.0 / 3.0 : (j % 2 == 1 ? 4.0 / 3.0 : 2.0 / 3.0);
        }
        buf[j] = w * eta * psi * std::exp(-kI * (v * k0));

        // Stop once the integrand has decayed to rounding level for a while.
        const double mag = std::abs(psi);
        peak = std::max(peak, mag);
        quiet = mag < 1e-17 * peak ? quiet + 1 : 0;
        if (quiet >= 32) break;
    }
    detail::fft_forward(buf);

    std::vector<double> prices;
    prices.reserve(strikes.size());
    for (const double K : strikes) {
        if (!(K > 0.0)) throw DomainError("strikes must be > 0");
        const double pos = (std::log(K) - k0) / lambda;
        if (pos < 0.0 || pos > static_cast<double>(n - 1)) {
            throw DomainError("strike outside the log-strike grid; decrease eta");
        }
        const auto u = std::min(static_cast<std::size_t>(pos), n - 2);
        const double frac = pos - static_cast<double>(u);
        auto call_at = [&](std::size_t idx) {
            const double k = k0 + static_cast<double>(idx) * lambda;
            return std::exp(-a * k) / kPi * buf[idx].real();
        };
        const double c = (1.0 - frac) * call_at(u) + frac * call_at(u + 1);
        const double floor = std::max(s0 - K * discount, 0.0);
        prices.push_back(std::max(c, floor));
    }
    return prices;
}

std::vector<double> carr_madan_call(const ModelParams& p, double r, double s0, double T,
                                    std::span<const double> strikes, double a, const GridSpec& spec) {
    std::optional<model::RiskNeutralChf> chf;
    try {
        chf.emplace(p, r, s0, T);
    } catch (const DomainError& e) {
        throw DampingError(std::string("risk-neutral measure unavailable: ") + e.what());
    }
    return carr_madan_call(*chf, r, s0, T, strikes, a, spec);
}

double put_from_parity(double call, double s0, double K, double r, double T) {
    return call - s0 + K * std::exp(-r * T);
}

}  // namespace mlsm::transform
