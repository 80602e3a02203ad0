#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mlsm/params.hpp"

namespace mlsm::opt {

using Objective = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
    std::size_t max_iter = 5000;
    double f_tol = 1e-10;  // absolute spread of simplex values
    double x_tol = 1e-10;  // simplex diameter (max-norm) in search coordinates
    double initial_step = 0.25;
    int restarts = 1;  // re-seed the simplex at the optimum after convergence
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
    std::vector<double> trace;  // best value after each iteration
};

/// Adaptive Nelder-Mead (dimension-dependent coefficients). Non-finite
/// objective values are treated as +inf.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts = {});

/// Runs nelder_mead from every start; element i of the result belongs to start i.
std::vector<NelderMeadResult> multi_start(const Objective& f, const std::vector<std::vector<double>>& starts,
                                          const NelderMeadOptions& opts = {});

/// Smooth unconstrained coordinates for a subset of model parameters.
///   alpha = exp(a)             (|beta| + exp(a) when beta is held fixed)
///   beta  = alpha tanh(b)
///   rho, sigma, d, h, l = exp(.)  (magnitudes; sign of the base value is kept)
///   mu, m = scale * x, scale taken from the base value or `location_scale`
/// Every decoded point satisfies the type invariants by construction.
class ParamCodec {
public:
    using Mask = std::array<bool, kParamCount>;

    ParamCodec(ModelParams base, Mask free, double location_scale = 1e-3);

    std::size_t dim() const { return ids_.size(); }
    const std::vector<ParamId>& free_ids() const { return ids_; }
    const ModelParams& base() const { return base_; }
    const Mask& mask() const { return mask_; }

    std::vector<double> encode(const ModelParams& p) const;
    ModelParams decode(std::span<const double> x) const;

private:
    ModelParams base_;
    Mask mask_{};
    std::vector<ParamId> ids_;
    double mu_scale_ = 1e-3;
    double m_scale_ = 1e-3;
    double rho_sign_ = 1.0;
    double sigma_sign_ = 1.0;
};

ParamCodec::Mask make_mask(std::initializer_list<ParamId> free);

}  // namespace mlsm::opt
