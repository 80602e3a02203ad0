#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlsm/date.hpp"
#include "mlsm/optimize.hpp"
#include "mlsm/params.hpp"
#include "mlsm/transform.hpp"

namespace mlsm::calibration {

struct OptionQuote {
    Date expiry{};
    double strike = 0.0;
    double mid = 0.0;
};

struct OptionChain {
    Date quote_date{};
    double s0 = 0.0;
    double r_ann = 0.0;
    std::vector<OptionQuote> quotes;

    double r_day() const { return r_ann / kTradingDaysPerYear; }
    /// Trading days from the quote date to `expiry`.
    int days_to(Date expiry) const { return weekdays_between(quote_date, expiry); }
    void validate() const;
};

struct ScreenResult {
    OptionChain chain;  // surviving quotes in canonical (expiry, strike, mid) order
    std::size_t dropped = 0;
    std::vector<std::string> warnings;
};

/// Drops quotes outside max(s0 - K e^{-rT}, 0) <= C <= s0, with mid below
/// `min_mid`, or expiring within zero trading days. Every drop is reported.
ScreenResult screen(const OptionChain& chain, double min_mid = 0.05);

struct PricingSetup {
    double a = 0.75;
    transform::GridSpec grid{};
};

/// Model prices for every quote (Carr-Madan, one FFT per expiry), in quote order.
std::vector<double> model_prices(const ModelParams& p, const OptionChain& chain, const PricingSetup& setup = {});
/// model - mid, per quote. Throws DampingError when the a-moment fails.
std::vector<double> price_residuals(const ModelParams& p, const OptionChain& chain, double a = 0.75,
                                    const transform::GridSpec& grid = {});

/// Jump scale gauge: the mean correction removes mu (and, without the
/// subordinator, m) and sigma only rescales the NIG parameters, so the
/// defaults free alpha, beta, d (plus m and rho for the subordinated model).
/// The unsubordinated model keeps rho at the spot-fitted value.
opt::ParamCodec::Mask default_calibration_mask(ModelKind kind);

struct CalibrationOptions {
    PricingSetup pricing{};
    std::optional<opt::ParamCodec::Mask> free;
    opt::NelderMeadOptions nm{};
    std::size_t n_starts = 6;
    double min_mid = 0.05;
    std::size_t min_quotes = 10;
    std::size_t min_maturities = 2;
};

struct CalibrationResult {
    ModelParams params;
    double rmse = 0.0;
    std::size_t n_quotes_used = 0;
    std::vector<double> objective_trace;  // best RMSE per simplex iteration of the winning start
    std::vector<double> start_rmse;       // RMSE at each start
    bool converged = false;
};

double rmse(std::span<const double> residuals);

/// Minimises price RMSE from each start; fixed slots come from the first start.
/// The chain is screened first.
CalibrationResult calibrate(const OptionChain& chain, std::span<const ModelParams> starts,
                            const CalibrationOptions& opts = {});

/// Starts derived from `base`: alpha rescaled by a ladder of factors, d chosen
/// so the daily jump variance matches the at-the-money implied variance.
std::vector<ModelParams> default_calibration_starts(const OptionChain& chain, const ModelParams& base,
                                                    std::size_t count, double a = 0.75, double min_mid = 0.05);
CalibrationResult calibrate_auto(const OptionChain& chain, const ModelParams& base,
                                 const CalibrationOptions& opts = {});

/// Black-Scholes call with per-day rate and volatility, T in trading days.
double black_scholes_call(double s0, double K, double r, double T, double vol);
/// Per-day implied volatility; NaN when the price violates the static bounds.
double implied_vol(double price, double s0, double K, double r, double T);

}  // namespace mlsm::calibration
