#include "mlsm/params.hpp"

#include <string>

#include "mlsm/errors.hpp"

namespace mlsm {

namespace {

void require_finite(double x, const char* name) {
    if (!std::isfinite(x)) throw DomainError(std::string(name) + " must be finite");
}

}  // namespace

void validate(const NigParams& p) {
    require_finite(p.m, "m");
    require_finite(p.alpha, "alpha");
    require_finite(p.beta, "beta");
    require_finite(p.d, "d");
    if (!(p.alpha > 0.0)) throw DomainError("NIG alpha must be > 0");
    if (!(p.d > 0.0)) throw DomainError("NIG d must be > 0");
    if (!(std::abs(p.beta) < p.alpha)) throw DomainError("NIG requires |beta| < alpha");
}

void validate(const IgParams& p) {
    require_finite(p.h, "h");
    require_finite(p.l, "l");
    if (!(p.h > 0.0)) throw DomainError("IG mean h must be > 0");
    if (!(p.l > 0.0)) throw DomainError("IG shape l must be > 0");
}

void validate(const MlsmParams& p) {
    require_finite(p.mu, "mu");
    require_finite(p.rho, "rho");
    require_finite(p.sigma, "sigma");
    if (p.rho == 0.0) throw DomainError("subordinated model requires rho != 0");
    validate(p.nig);
    validate(p.ig);
}

void validate(const BlmParams& p) {
    require_finite(p.mu, "mu");
    require_finite(p.rho, "rho");
    require_finite(p.sigma, "sigma");
    validate(p.nig);
}

void validate(const ModelParams& p) {
    std::visit([](const auto& q) { validate(q); }, p);
}

std::optional<ParamId> param_id_from_name(std::string_view name) {
    for (int i = 0; i < kParamCount; ++i) {
        if (kParamNames[static_cast<std::size_t>(i)] == name) return static_cast<ParamId>(i);
    }
    return std::nullopt;
}

bool has_slot(ModelKind kind, ParamId id) {
    if (id == ParamId::h || id == ParamId::l) return kind == ModelKind::mlsm;
    return true;
}

namespace {

template <typename P>
double* slot(P& p, ParamId id) {
    switch (id) {
        case ParamId::mu: return &p.mu;
        case ParamId::rho: return &p.rho;
        case ParamId::sigma: return &p.sigma;
        case ParamId::m: return &p.nig.m;
        case ParamId::alpha: return &p.nig.alpha;
        case ParamId::beta: return &p.nig.beta;
        case ParamId::d: return &p.nig.d;
        case ParamId::h:
        case ParamId::l:
            if constexpr (std::is_same_v<P, MlsmParams>) {
                return id == ParamId::h ? &p.ig.h : &p.ig.l;
            }
            break;
    }
    return nullptr;
}

}  // namespace

double get(const ModelParams& p, ParamId id) {
    return std::visit(
        [id](const auto& q) {
            auto copy = q;
            const double* s = slot(copy, id);
            if (s == nullptr) throw DomainError("parameter slot not present in this model");
            return *s;
        },
        p);
}

void set(ModelParams& p, ParamId id, double value) {
    std::visit(
        [id, value](auto& q) {
            double* s = slot(q, id);
            if (s == nullptr) throw DomainError("parameter slot not present in this model");
            *s = value;
        },
        p);
}

}  // namespace mlsm
