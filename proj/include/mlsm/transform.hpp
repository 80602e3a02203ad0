#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "mlsm/params.hpp"

namespace mlsm::transform {

using cplx = std::complex<double>;
using ChfFn = std::function<cplx(double)>;
using ContourChfFn = std::function<cplx(cplx)>;

// Quadrature applied to the one-sided Carr-Madan integral. The integrand's
// real part is even in v, so the trapezoid rule is spectrally accurate; the
// Simpson weights add a -1/3 ghost of the damped price half a period away in
// log-strike (kept for comparison).
enum class Quadrature { trapezoid, simpson };

struct GridSpec {
    std::size_t n = std::size_t{1} << 14;  // power of two, >= 256
    double eta = 0.25;                      // frequency spacing
    double x_center = 0.0;                  // centre of the x / log-strike grid
    Quadrature rule = Quadrature::trapezoid;

    // Spacing of the conjugate grid, 2 pi / (n eta).
    double lambda() const;
    void validate() const;
};

/// Tabulated law of a log-return on a uniform abscissa.
struct DistributionGrid {
    std::vector<double> x;
    std::vector<double> pdf;
    std::vector<double> cdf;
    double raw_mass = 1.0;  // trapezoid mass of the pdf before normalization
    double horizon_days = std::numeric_limits<double>::quiet_NaN();

    double spacing() const { return x.size() > 1 ? x[1] - x[0] : 0.0; }
};

/// Fourier inversion of a characteristic function onto x_k = x_center + (k - n/2) lambda.
/// Throws GridCoverageError when mass leaks outside the grid and BranchError
/// when the function fails the chf(0) = 1 / Hermitian checks.
DistributionGrid pdf_cdf_from_chf(const ChfFn& chf, const GridSpec& spec);

/// Builds the grid around `mean` spanning +-half_width_sd standard deviations
/// (and at least [cover_lo, cover_hi]); doubles the span on coverage errors.
DistributionGrid distribution_from_chf(const ChfFn& chf, double mean, double sd,
                                       std::size_t n = std::size_t{1} << 14,
                                       double half_width_sd = 20.0,
                                       double cover_lo = std::numeric_limits<double>::quiet_NaN(),
                                       double cover_hi = std::numeric_limits<double>::quiet_NaN());

/// Law of X_t under the model's physical measure.
DistributionGrid model_distribution(const ModelParams& p, double t, std::size_t n = std::size_t{1} << 14);
/// Law of ln S_t - ln S_0 under the mean-correcting martingale measure.
DistributionGrid risk_neutral_distribution(const ModelParams& p, double r, double t,
                                           std::size_t n = std::size_t{1} << 14);

/// Generalized inverse min{x : F(x) > u}, linear between grid nodes, clamped to the grid.
double inv_cdf(const DistributionGrid& g, double u);
/// F(x) by linear interpolation; 0 left of the grid, 1 right of it.
double cdf_at(const DistributionGrid& g, double x);
double pdf_at(const DistributionGrid& g, double x);

/// European calls by the damped Fourier transform of the call price.
/// `chf_rn` is the risk-neutral characteristic function of ln S_T, evaluated
/// on the contour v - i(a+1). `r` is per trading day, `T` in trading days.
/// The log-strike grid is centred on ln s0 unless spec.x_center is non-zero.
std::vector<double> carr_madan_call(const ContourChfFn& chf_rn, double r, double s0, double T,
                                    std::span<const double> strikes, double a = 0.75,
                                    const GridSpec& spec = {});

/// Convenience overload that builds the risk-neutral characteristic function.
std::vector<double> carr_madan_call(const ModelParams& p, double r, double s0, double T,
                                    std::span<const double> strikes, double a = 0.75,
                                    const GridSpec& spec = {});

double put_from_parity(double call, double s0, double K, double r, double T);

namespace detail {
// In-place forward DFT, X_k = sum_j x_j exp(-2 pi i jk/n).
void fft_forward(std::vector<cplx>& data);
}  // namespace detail

}  // namespace mlsm::transform
