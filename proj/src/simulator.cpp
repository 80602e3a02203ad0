#include "mlsm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <tbb/parallel_for.h>

#include "mlsm/errors.hpp"
#include "mlsm/model.hpp"

namespace mlsm::sim {

namespace {

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct Streams {
    Engine eng;
    boost::random::normal_distribution<double> normal{0.0, 1.0};
    boost::random::uniform_01<double> unif;

    explicit Streams(std::uint64_t s) : eng(s) {}

    double z() { return normal(eng); }
    double u() { return unif(eng); }

    // IG(mean mu, shape lambda), Michael-Schucany-Haas. The smaller root is
    // written without the cancelling subtraction.
    double ig(double mu, double lambda) {
        const double n = z();
        const double phi = mu * n * n / (2.0 * lambda);
        const double x = mu / (1.0 + phi + std::sqrt(phi * phi + 2.0 * phi));
        return u() <= mu / (mu + x) ? x : mu * mu / x;
    }

    // NIG increment over horizon t.
    double nig(const NigParams& p, double gamma, double t) {
        const double dt = p.d * t;
        const double zz = ig(dt / gamma, dt * dt);
        return p.m * t + p.beta * zz + std::sqrt(zz) * z();
    }
};

template <class Draw>
std::vector<double> generate(std::size_t n, RngSeed seed, Draw draw) {
    std::vector<double> out(n);
    const std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;
    tbb::parallel_for(std::size_t{0}, chunks, [&](std::size_t c) {
        Streams s(chunk_seed(seed, c));
        const std::size_t lo = c * kChunkSize;
        const std::size_t hi = std::min(n, lo + kChunkSize);
        for (std::size_t i = lo; i < hi; ++i) out[i] = draw(s);
    });
    return out;
}

void check_horizon(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("simulation horizon must be positive");
}

}  // namespace

std::uint64_t chunk_seed(RngSeed seed, std::size_t chunk) {
    return splitmix64(seed.value + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(chunk));
}

std::vector<double> sample_ig(double h, double l, std::size_t n, RngSeed seed) {
    validate(IgParams{h, l});
    return generate(n, seed, [h, l](Streams& s) { return s.ig(h, l); });
}

std::vector<double> sample_nig(const NigParams& p, double t, std::size_t n, RngSeed seed) {
    validate(p);
    check_horizon(t);
    const double g = nig_gamma(p);
    return generate(n, seed, [&p, g, t](Streams& s) { return s.nig(p, g, t); });
}

std::vector<double> sample_mlsm(const MlsmParams& p, double t, std::size_t n, RngSeed seed) {
    validate(p);
    check_horizon(t);
    const double g = nig_gamma(p.nig);
    const double vm = p.ig.h * t;
    const double vl = p.ig.l * t * t;
    const double sqt = std::sqrt(t);
    return generate(n, seed, [&p, g, vm, vl, t, sqt](Streams& s) {
        const double v = s.ig(vm, vl);
        const double jump = s.nig(p.nig, g, v);
        return p.mu * t + p.rho * sqt * s.z() + p.sigma * jump;
    });
}

std::vector<double> sample_blm(const BlmParams& p, double t, std::size_t n, RngSeed seed) {
    validate(p);
    check_horizon(t);
    const double g = nig_gamma(p.nig);
    const double sqt = std::sqrt(t);
    return generate(n, seed, [&p, g, t, sqt](Streams& s) {
        const double jump = p.sigma != 0.0 ? s.nig(p.nig, g, t) : 0.0;
        return p.mu * t + p.rho * sqt * s.z() + p.sigma * jump;
    });
}

std::vector<double> sample(const ModelParams& p, double t, std::size_t n, RngSeed seed) {
    return std::visit(
        [&](const auto& q) {
            if constexpr (std::is_same_v<std::decay_t<decltype(q)>, MlsmParams>)
                return sample_mlsm(q, t, n, seed);
            else
                return sample_blm(q, t, n, seed);
        },
        p);
}

namespace {

std::vector<McPrice> mc_prices(const ModelParams& p, double r, double s0, std::span<const double> strikes,
                               double T, std::size_t n_paths, RngSeed seed, bool call) {
    if (!(s0 > 0.0)) throw DomainError("spot must be positive");
    if (n_paths < 2) throw DomainError("need at least two paths");
    for (double k : strikes)
        if (!(k >= 0.0)) throw DomainError("strikes must be nonnegative");
    const double drift = (r - model::mcmm_compensator(p)) * T;
    const double disc = std::exp(-r * T);
    const auto x = sample(p, T, n_paths, seed);

    std::vector<McPrice> out;
    out.reserve(strikes.size());
    for (double k : strikes) {
        // Welford accumulation in path order keeps the result independent of threading.
        double mean = 0.0, m2 = 0.0;
        std::size_t i = 0;
        for (double xi : x) {
            const double st = s0 * std::exp(drift + xi);
            const double pay = disc * (call ? std::max(st - k, 0.0) : std::max(k - st, 0.0));
            ++i;
            const double delta = pay - mean;
            mean += delta / static_cast<double>(i);
            m2 += delta * (pay - mean);
        }
        const double var = m2 / static_cast<double>(n_paths - 1);
        out.push_back({mean, std::sqrt(var / static_cast<double>(n_paths))});
    }
    return out;
}

}  // namespace

std::vector<McPrice> mc_call_prices(const ModelParams& p, double r, double s0, std::span<const double> strikes,
                                    double T, std::size_t n_paths, RngSeed seed) {
    return mc_prices(p, r, s0, strikes, T, n_paths, seed, true);
}

McPrice mc_call_price(const ModelParams& p, double r, double s0, double K, double T, std::size_t n_paths,
                      RngSeed seed) {
    const double k[1] = {K};
    return mc_call_prices(p, r, s0, k, T, n_paths, seed).front();
}

std::vector<McPrice> mc_put_prices(const ModelParams& p, double r, double s0, std::span<const double> strikes,
                                   double T, std::size_t n_paths, RngSeed seed) {
    return mc_prices(p, r, s0, strikes, T, n_paths, seed, false);
}

}  // namespace mlsm::sim
