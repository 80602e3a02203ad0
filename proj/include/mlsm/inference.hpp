#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mlsm/date.hpp"
#include "mlsm/optimize.hpp"
#include "mlsm/params.hpp"
#include "mlsm/transform.hpp"

namespace mlsm::inference {

using cplx = std::complex<double>;

struct ReturnSeries {
    std::vector<Date> dates;
    std::vector<double> values;  // daily log returns

    // Strictly increasing dates (when present), finite values, length >= min_len.
    void validate(std::size_t min_len = 0) const;
};

struct VixSeries {
    std::vector<Date> dates;
    std::vector<double> levels;  // index points

    void validate() const;
};

// ---------------------------------------------------------------- IG / VIX

inline constexpr double kDefaultVixScale = 0.01;

/// Closed-form IG maximum likelihood on x_i = scale * level_i.
IgParams fit_ig_mle(std::span<const double> levels, double scale = kDefaultVixScale);
IgParams fit_ig_mle(const VixSeries& v, double scale = kDefaultVixScale);

double ig_log_likelihood(std::span<const double> x, const IgParams& p);
double ig_cdf(double x, const IgParams& p);

// ---------------------------------------------------------------- ECF

struct EcfGrid {
    std::vector<double> theta;    // symmetric about 0
    std::vector<double> weights;  // positive, sum to 1
};

/// Default grid: radius where |ECF| first drops below 0.05 (capped at
/// 10 / sample sd), `points` nodes, Gaussian weights with sd radius / 3.
EcfGrid make_ecf_grid(std::span<const double> data, std::size_t points = 201);
EcfGrid make_ecf_grid(double radius, std::size_t points = 201);

/// (1/n) sum_i exp(i theta x_i).
cplx empirical_chf(std::span<const double> data, double theta);

/// ECF tabulated on a grid, for repeated objective evaluations.
struct EcfTable {
    EcfGrid grid;
    std::vector<cplx> values;
    std::size_t n = 0;
};
EcfTable tabulate_ecf(std::span<const double> data, const EcfGrid& grid);

/// sum_j w_j |ECF(theta_j) - phi(theta_j)|^2.
double ecf_objective(const ModelParams& p, const EcfTable& table);
double ecf_objective(const ModelParams& p, std::span<const double> data, const EcfGrid& grid);
double ecf_objective(const std::function<cplx(double)>& chf, const EcfTable& table);

/// Expected value of the objective at the true law for a sample of size n:
/// sum_j w_j (1 - |phi(theta_j)|^2) / n.
double ecf_noise_level(const ModelParams& p, const EcfGrid& grid, std::size_t n);

// ---------------------------------------------------------------- fitting

/// Exact log-likelihood with the density from FFT inversion at t = 1.
double log_likelihood(const ModelParams& p, std::span<const double> data);

/// Parameters that fix the scale of the jump part. The law of sigma L depends
/// on (sigma, m, alpha, beta, d) only through sigma m, alpha/sigma,
/// beta/sigma and sigma d, so sigma (and for the unsubordinated model also m,
/// which merges with mu) is held at its starting value by default.
opt::ParamCodec::Mask default_ecf_mask(ModelKind kind);

struct EcfFitOptions {
    std::size_t n_starts = 16;
    double jitter = 0.5;  // sd of the log-scale perturbation around the moment start
    std::uint64_t seed = 20190829;
    opt::NelderMeadOptions nm{};
    std::optional<opt::ParamCodec::Mask> free;  // default_ecf_mask when empty
    std::size_t grid_points = 201;
};

/// Moment-matching start: NIG shape from sample skewness / excess kurtosis,
/// expressed in the gauge given by `gauge` (its sigma, m and IG pair are kept).
ModelParams moment_start(std::span<const double> data, const ModelParams& gauge);

/// `count` starts: the moment start followed by jittered copies in the
/// codec's search coordinates.
std::vector<ModelParams> default_starts(std::span<const double> data, const ModelParams& gauge,
                                        const opt::ParamCodec::Mask& free, std::size_t count, double jitter,
                                        std::uint64_t seed);

struct FitCandidate {
    ModelParams params;
    double objective = 0.0;
    double log_likelihood = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

struct EcfFitResult {
    ModelParams params;
    double objective = 0.0;
    double log_likelihood = 0.0;
    double noise_level = 0.0;
    std::size_t n_converged = 0;
    std::vector<FitCandidate> candidates;
    EcfGrid grid;
};

/// Multi-start simplex minimisation of the ECF objective; the converged
/// candidate with the largest log-likelihood wins. For the subordinated model
/// `ig_fixed` is required and overrides the IG pair of every start.
EcfFitResult fit_ecf(const ReturnSeries& data, ModelKind kind, std::optional<IgParams> ig_fixed,
                     std::span<const ModelParams> starts, const EcfFitOptions& opts = {});

/// Builds default starts (gauge sigma = 1 unless `gauge` is given) and fits.
EcfFitResult fit_ecf_auto(const ReturnSeries& data, ModelKind kind, std::optional<IgParams> ig_fixed,
                          const EcfFitOptions& opts = {}, std::optional<ModelParams> gauge = std::nullopt);

// ---------------------------------------------------------------- diagnostics

/// P(sup |B| > lambda) for the Brownian bridge: the asymptotic Kolmogorov tail.
double kolmogorov_pvalue(double lambda);

struct GofReport {
    double ks_stat = 0.0;
    double ks_pvalue = 1.0;
    std::vector<std::pair<double, double>> pp_points;  // (empirical, model) at order statistics
    std::vector<double> pit_values;                    // in data order
    double pit_ks_pvalue = 1.0;
};

GofReport gof_report(std::span<const double> data, const std::function<double(double)>& model_cdf);
GofReport gof_report(std::span<const double> data, const transform::DistributionGrid& model);

}  // namespace mlsm::inference
