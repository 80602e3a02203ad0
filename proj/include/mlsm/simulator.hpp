#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mlsm/params.hpp"

// Exact terminal-value sampling of the IG, NIG, subordinated and mixed laws,
// plus Monte Carlo call pricing under the mean-correcting measure.
//
// Reproducibility: draws are produced in chunks of kChunkSize. Chunk c uses
// its own std::mt19937_64 seeded with splitmix64(seed + c * golden_gamma),
// with Boost.Random's normal (ziggurat) and uniform_01 transforms. Output is
// independent of the number of worker threads.
namespace mlsm::sim {

struct RngSeed {
    std::uint64_t value = 0;
};

inline constexpr std::size_t kChunkSize = std::size_t{1} << 15;

std::uint64_t chunk_seed(RngSeed seed, std::size_t chunk);

/// IG(mean h, shape l) by the transform-with-rejection construction.
std::vector<double> sample_ig(double h, double l, std::size_t n, RngSeed seed);

/// NIG increments over horizon t: m t + beta z + sqrt(z) N(0,1),
/// z ~ IG(d t / gamma, (d t)^2).
std::vector<double> sample_nig(const NigParams& p, double t, std::size_t n, RngSeed seed);

/// X_t = mu t + rho sqrt(t) Z + sigma L_{V_t}, V_t ~ IG(h t, l t^2).
std::vector<double> sample_mlsm(const MlsmParams& p, double t, std::size_t n, RngSeed seed);
/// X_t = mu t + rho sqrt(t) Z + sigma L_t.
std::vector<double> sample_blm(const BlmParams& p, double t, std::size_t n, RngSeed seed);
std::vector<double> sample(const ModelParams& p, double t, std::size_t n, RngSeed seed);

struct McPrice {
    double price = 0.0;
    double stderr_ = 0.0;
};

/// Calls on S_T = s0 exp((r - K_{X_1}(1)) T + X_T); one set of paths serves
/// every strike (common random numbers). r per trading day, T in trading days.
std::vector<McPrice> mc_call_prices(const ModelParams& p, double r, double s0, std::span<const double> strikes,
                                    double T, std::size_t n_paths, RngSeed seed);
McPrice mc_call_price(const ModelParams& p, double r, double s0, double K, double T, std::size_t n_paths,
                      RngSeed seed);
/// Puts from the same paths.
std::vector<McPrice> mc_put_prices(const ModelParams& p, double r, double s0, std::span<const double> strikes,
                                   double T, std::size_t n_paths, RngSeed seed);

}  // namespace mlsm::sim
