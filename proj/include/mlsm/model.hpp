#pragma once

#include <complex>
#include <functional>
#include <utility>

#include "mlsm/params.hpp"

// Closed-form characteristic, moment- and cumulant-generating functions of the
// subordinated model (MLSM) and of the behavioral mixed model (BLM).
//
// Time is measured in trading days. Complex square roots use the principal
// branch; every complex evaluation checks that its radicand stays in the
// closed right half plane and throws BranchError otherwise.
namespace mlsm::model {

using cplx = std::complex<double>;

enum class DomainStatus { interior, boundary, outside };

// Real-argument admissibility. Boundary points (radicand exactly zero within
// rounding) are admitted: the value is finite but the derivative is not.
DomainStatus nig_domain(double u, const NigParams& p);
DomainStatus ig_domain(double u, const IgParams& p);
DomainStatus mlsm_domain(double u, const MlsmParams& p);
DomainStatus blm_domain(double u, const BlmParams& p);

/// Closed interval of admissible real u for the MGF (endpoints may be
/// infinite when sigma == 0).
std::pair<double, double> mlsm_admissible_interval(const MlsmParams& p);
std::pair<double, double> blm_admissible_interval(const BlmParams& p);

/// True when u lies inside the admissible interval with at least `margin`
/// clearance from both ends (optimizers must stay strictly interior).
bool strictly_interior(double u, const ModelParams& p, double margin = 1e-8);

/// NIG cumulant function m u + d (sqrt(alpha^2-beta^2) - sqrt(alpha^2-(beta+u)^2)).
double cgf_nig(double u, const NigParams& p);
cplx cgf_nig(cplx u, const NigParams& p);

/// IG cumulant function (l/h) (1 - sqrt(1 - 2 h^2 u / l)).
double cgf_ig(double u, const IgParams& p);
cplx cgf_ig(cplx u, const IgParams& p);

double cgf_mlsm(double u, const MlsmParams& p);
double mgf_mlsm(double u, const MlsmParams& p);
// Characteristic exponent psi with phi_{X_1}(v) = exp(psi(v)).
cplx char_exponent_mlsm(cplx v, const MlsmParams& p);
cplx chf_mlsm(cplx v, const MlsmParams& p, double t = 1.0);
Moments moments_mlsm(const MlsmParams& p);
/// K_{X_1}(1): the drift correction of the mean-correcting martingale measure.
double mcmm_compensator(const MlsmParams& p);
/// Risk-neutral characteristic function of ln S_t (log-price, not log-return).
cplx chf_rn_mlsm(cplx v, const MlsmParams& p, double r, double s0, double t);

double cgf_blm(double u, const BlmParams& p);
double mgf_blm(double u, const BlmParams& p);
cplx char_exponent_blm(cplx v, const BlmParams& p);
cplx chf_blm(cplx v, const BlmParams& p, double t = 1.0);
Moments moments_blm(const BlmParams& p);
double mcmm_compensator(const BlmParams& p);
cplx chf_rn_blm(cplx v, const BlmParams& p, double r, double s0, double t);

// Dispatch over ModelParams.
double cgf(double u, const ModelParams& p);
double mgf(double u, const ModelParams& p);
cplx chf(cplx v, const ModelParams& p, double t = 1.0);
cplx chf_rn(cplx v, const ModelParams& p, double r, double s0, double t);
Moments moments(const ModelParams& p);
double mcmm_compensator(const ModelParams& p);

/// chf_rn with the compensator and ln s0 evaluated once, for contour sweeps.
class RiskNeutralChf {
public:
    RiskNeutralChf(ModelParams p, double r, double s0, double t);
    cplx operator()(cplx v) const;

private:
    ModelParams params_;
    double drift_;  // r - K_{X_1}(1)
    double log_s0_;
    double t_;
};
std::pair<double, double> admissible_interval(const ModelParams& p);

/// Cumulants kappa_1..kappa_4 of a cumulant function by central finite
/// differences at 0 with two levels of Richardson extrapolation (O(step^6)).
/// The stencil reaches +-2*step.
struct Cumulants {
    double k1 = 0.0, k2 = 0.0, k3 = 0.0, k4 = 0.0;
};
Cumulants finite_difference_cumulants(const std::function<double(double)>& cgf, double step);

}  // namespace mlsm::model
