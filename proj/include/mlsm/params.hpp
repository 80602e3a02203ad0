#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string_view>
#include <variant>

namespace mlsm {

/// Normal inverse Gaussian law of the jump process at unit (intrinsic) time.
struct NigParams {
    double m = 0.0;      // location
    double alpha = 1.0;  // tail heaviness, alpha > |beta|
    double beta = 0.0;   // asymmetry
    double d = 1.0;      // scale
};

/// Inverse Gaussian subordinator at unit time: mean h, shape l.
struct IgParams {
    double h = 1.0;
    double l = 1.0;
};

/// Brownian motion plus an IG-subordinated NIG jump part:
/// X_t = mu t + rho B_t + sigma L_{V_t}.
struct MlsmParams {
    double mu = 0.0;
    double rho = 0.0;
    double sigma = 0.0;
    NigParams nig;
    IgParams ig;
};

/// Behavioral mixed model without subordination: X_t = mu t + rho B_t + sigma L_t.
struct BlmParams {
    double mu = 0.0;
    double rho = 0.0;
    double sigma = 0.0;
    NigParams nig;
};

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

using ModelParams = std::variant<MlsmParams, BlmParams>;

enum class ModelKind { mlsm, blm };

inline ModelKind kind_of(const ModelParams& p) {
    return std::holds_alternative<MlsmParams>(p) ? ModelKind::mlsm : ModelKind::blm;
}

// sqrt(alpha^2 - beta^2)
inline double nig_gamma(const NigParams& p) {
    return std::sqrt((p.alpha - p.beta) * (p.alpha + p.beta));
}

// Throw DomainError when a type invariant fails.
void validate(const NigParams& p);
void validate(const IgParams& p);
void validate(const MlsmParams& p);
void validate(const BlmParams& p);
void validate(const ModelParams& p);

// Flat slot view used by the params document and the fitting codecs.
enum class ParamId : int { mu = 0, rho, sigma, m, alpha, beta, d, h, l };
inline constexpr int kParamCount = 9;
inline constexpr std::array<std::string_view, kParamCount> kParamNames = {
    "mu", "rho", "sigma", "m", "alpha", "beta", "d", "h", "l"};

std::optional<ParamId> param_id_from_name(std::string_view name);

double get(const ModelParams& p, ParamId id);
void set(ModelParams& p, ParamId id, double value);
// h and l exist only for the subordinated model.
bool has_slot(ModelKind kind, ParamId id);

}  // namespace mlsm
