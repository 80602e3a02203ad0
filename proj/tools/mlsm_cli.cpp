// Command-line front end: fit-vix, fit-returns, calibrate, price, pwf, simulate.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mlsm/calibration.hpp"
#include "mlsm/errors.hpp"
#include "mlsm/inference.hpp"
#include "mlsm/io.hpp"
#include "mlsm/model.hpp"
#include "mlsm/pwf.hpp"
#include "mlsm/simulator.hpp"
#include "mlsm/transform.hpp"

namespace fs = std::filesystem;
using namespace mlsm;
using io::Json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitError = 3;
constexpr int kExitInternal = 4;

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error("usage", what) {}
};

struct Global {
    std::string out = "-";
    bool no_timestamp = false;
    std::uint64_t seed = 20190829;
};

struct Context {
    Global g;
    io::ResultDocument doc;
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;

    void input(const std::string& label, const fs::path& p) {
        doc.inputs.emplace_back(label, io::sha256_file(p));
        inputs.push_back(p);
    }
    void output(const std::string& p) {
        if (!p.empty() && p != "-") outputs.push_back(p);
    }
    // Refuse to overwrite any input file.
    void check_paths() const {
        for (const auto& o : outputs) {
            for (const auto& i : inputs) {
                std::error_code ec;
                if (fs::exists(o) && fs::equivalent(o, i, ec)) {
                    throw UsageError("output " + o.string() + " would overwrite input " + i.string());
                }
            }
        }
    }
    void emit() {
        if (!g.no_timestamp) doc.timestamp = io::timestamp_now();
        const std::string text = doc.to_json().dump(2) + "\n";
        if (g.out == "-") {
            std::cout << text;
        } else {
            io::write_text(g.out, text);
        }
    }
};

void write_csv(const std::string& path, const io::CsvTable& t) {
    if (path == "-") {
        std::cout << t.to_string();
    } else {
        io::write_text(path, t.to_string());
    }
}

std::string num(double x) { return io::format_double(x); }

Json moments_json(const Moments& m) {
    Json j = Json::object();
    j["mean"] = m.mean;
    j["variance"] = m.variance;
    j["skewness"] = m.skewness;
    j["excess_kurtosis"] = m.excess_kurtosis;
    return j;
}

Json gof_json(const inference::GofReport& r) {
    Json j = Json::object();
    j["ks_stat"] = r.ks_stat;
    j["ks_pvalue"] = r.ks_pvalue;
    j["pit_ks_pvalue"] = r.pit_ks_pvalue;
    return j;
}

Json interval_list(const std::vector<pwf::Interval>& v) {
    Json a = Json::array();
    for (const auto& [lo, hi] : v) a.push_back(Json::array({lo, hi}));
    return a;
}

// Jump-law normalisation: mean and variance of L_1.
Json jump_normalisation(const ModelParams& p) {
    const double m = get(p, ParamId::m), alpha = get(p, ParamId::alpha), beta = get(p, ParamId::beta),
                 d = get(p, ParamId::d);
    const double g = std::sqrt((alpha - beta) * (alpha + beta));
    Json j = Json::object();
    j["mean_L1"] = m + d * beta / g;
    j["variance_L1"] = d * alpha * alpha / (g * g * g);
    return j;
}

void write_pp(const std::string& path, std::span<const double> data, const inference::GofReport& r) {
    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    io::CsvTable t{{"x", "empirical_cdf", "model_cdf"}, {}};
    for (std::size_t i = 0; i < sorted.size(); ++i)
        t.rows.push_back({num(sorted[i]), num(r.pp_points[i].first), num(r.pp_points[i].second)});
    write_csv(path, t);
}

// ---------------------------------------------------------------- fit-vix

struct FitVixOpts {
    std::string in;
    double scale = inference::kDefaultVixScale;
    std::string params_out, pp_out, pit_out;
};

void run_fit_vix(Context& ctx, const FitVixOpts& o) {
    ctx.input("vix", o.in);
    ctx.output(o.params_out);
    ctx.output(o.pp_out);
    ctx.output(o.pit_out);
    ctx.check_paths();
    const auto vix = io::load_vix(o.in);
    const IgParams ig = inference::fit_ig_mle(vix, o.scale);
    std::vector<double> x;
    for (double v : vix.levels) x.push_back(o.scale * v);
    const auto gof = inference::gof_report(x, [&ig](double v) { return inference::ig_cdf(v, ig); });

    ctx.doc.parameters = io::params_to_json(ig);
    auto& d = ctx.doc.diagnostics;
    d["n"] = x.size();
    d["scale"] = o.scale;
    d["log_likelihood"] = inference::ig_log_likelihood(x, ig);
    d["goodness_of_fit"] = gof_json(gof);
    if (!o.params_out.empty()) io::write_text(o.params_out, io::params_to_json(ig).dump(2) + "\n");
    if (!o.pp_out.empty()) write_pp(o.pp_out, x, gof);
    if (!o.pit_out.empty()) {
        io::CsvTable t{{"date", "pit"}, {}};
        for (std::size_t i = 0; i < x.size(); ++i) t.rows.push_back({format_date(vix.dates[i]), num(gof.pit_values[i])});
        write_csv(o.pit_out, t);
    }
}

// ---------------------------------------------------------------- fit-returns

struct FitReturnsOpts {
    std::string in, model = "mlsm", ig, gauge;
    std::size_t starts = 16;
    double jitter = 0.5;
    std::size_t max_iter = 5000;
    std::size_t grid_points = 201;
    std::string params_out, density_out, pp_out;
};

void run_fit_returns(Context& ctx, const FitReturnsOpts& o) {
    ctx.input("returns", o.in);
    if (!o.ig.empty()) ctx.input("ig", o.ig);
    if (!o.gauge.empty()) ctx.input("gauge", o.gauge);
    ctx.output(o.params_out);
    ctx.output(o.density_out);
    ctx.output(o.pp_out);
    ctx.check_paths();

    const auto kind = o.model == "blm" ? ModelKind::blm : ModelKind::mlsm;
    std::optional<IgParams> ig;
    if (!o.ig.empty()) ig = io::load_ig(o.ig);
    if (kind == ModelKind::mlsm && !ig) throw UsageError("--ig is required for the subordinated model");
    std::optional<ModelParams> gauge;
    if (!o.gauge.empty()) gauge = io::load_params(o.gauge);

    const auto data = io::load_returns(o.in);
    inference::EcfFitOptions fo;
    fo.n_starts = o.starts;
    fo.jitter = o.jitter;
    fo.seed = ctx.g.seed;
    fo.nm.max_iter = o.max_iter;
    fo.grid_points = o.grid_points;
    const auto fit = inference::fit_ecf_auto(data, kind, ig, fo, gauge);

    const auto grid = transform::model_distribution(fit.params, 1.0);
    const auto gof = inference::gof_report(data.values, grid);

    ctx.doc.parameters = io::params_to_json(fit.params);
    auto& d = ctx.doc.diagnostics;
    d["model"] = o.model;
    d["n"] = data.values.size();
    d["ecf_objective"] = fit.objective;
    d["ecf_noise_level"] = fit.noise_level;
    d["log_likelihood"] = fit.log_likelihood;
    d["starts"] = fit.candidates.size();
    d["converged_starts"] = fit.n_converged;
    d["ecf_grid_radius"] = fit.grid.theta.back();
    d["model_moments"] = moments_json(model::moments(fit.params));
    d["jump_normalisation"] = jump_normalisation(fit.params);
    d["goodness_of_fit"] = gof_json(gof);
    Json cands = Json::array();
    for (const auto& c : fit.candidates) {
        Json j = Json::object();
        j["objective"] = c.objective;
        j["log_likelihood"] = c.log_likelihood;
        j["iterations"] = c.iterations;
        j["converged"] = c.converged;
        cands.push_back(j);
    }
    d["candidates"] = cands;

    if (!o.params_out.empty()) io::write_text(o.params_out, io::params_to_json(fit.params).dump(2) + "\n");
    if (!o.density_out.empty()) {
        io::CsvTable t{{"x", "pdf", "cdf"}, {}};
        for (std::size_t i = 0; i < grid.x.size(); ++i) t.rows.push_back({num(grid.x[i]), num(grid.pdf[i]), num(grid.cdf[i])});
        write_csv(o.density_out, t);
    }
    if (!o.pp_out.empty()) write_pp(o.pp_out, data.values, gof);
}

// ---------------------------------------------------------------- calibrate

struct FftOpts {
    std::size_t n = std::size_t{1} << 14;
    double eta = 0.25;
    std::string rule = "trapezoid";

    transform::GridSpec spec() const {
        transform::GridSpec s;
        s.n = n;
        s.eta = eta;
        s.rule = rule == "simpson" ? transform::Quadrature::simpson : transform::Quadrature::trapezoid;
        s.validate();
        return s;
    }
};

void add_fft_options(CLI::App* sub, FftOpts& f) {
    sub->add_option("--fft-n", f.n, "FFT size (power of two)")->capture_default_str();
    sub->add_option("--eta", f.eta, "frequency spacing")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--quadrature", f.rule, "Carr-Madan quadrature")
        ->capture_default_str()
        ->check(CLI::IsMember({"trapezoid", "simpson"}));
}

struct CalibrateOpts {
    std::string chain, start, model, ig, free;
    double s0 = 0.0, r = 0.0, a = 0.75, min_mid = 0.05;
    std::size_t starts = 6, max_iter = 5000;
    FftOpts fft;
    std::string params_out, residuals_out;
};

ModelParams convert_model(const ModelParams& p, const std::string& model, const std::optional<IgParams>& ig) {
    if (model.empty()) return p;
    if (model == "blm") {
        if (kind_of(p) == ModelKind::blm) return p;
        const auto& q = std::get<MlsmParams>(p);
        return BlmParams{q.mu, q.rho, q.sigma, q.nig};
    }
    if (kind_of(p) == ModelKind::mlsm) {
        auto q = std::get<MlsmParams>(p);
        if (ig) q.ig = *ig;
        return q;
    }
    if (!ig) throw UsageError("--ig is required to start the subordinated model from unsubordinated parameters");
    const auto& q = std::get<BlmParams>(p);
    return MlsmParams{q.mu, q.rho, q.sigma, q.nig, *ig};
}

std::optional<opt::ParamCodec::Mask> parse_free(const std::string& list, ModelKind kind) {
    if (list.empty()) return std::nullopt;
    opt::ParamCodec::Mask m{};
    std::size_t start = 0;
    while (start <= list.size()) {
        const auto pos = list.find(',', start);
        const std::string name = list.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
        const auto id = param_id_from_name(name);
        if (!id || !has_slot(kind, *id)) throw UsageError("unknown parameter '" + name + "' in --free");
        m[static_cast<std::size_t>(*id)] = true;
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return m;
}

void run_calibrate(Context& ctx, const CalibrateOpts& o) {
    ctx.input("chain", o.chain);
    ctx.input("start", o.start);
    if (!o.ig.empty()) ctx.input("ig", o.ig);
    ctx.output(o.params_out);
    ctx.output(o.residuals_out);
    ctx.check_paths();

    std::optional<IgParams> ig;
    if (!o.ig.empty()) ig = io::load_ig(o.ig);
    const ModelParams base = convert_model(io::load_params(o.start), o.model, ig);
    const auto chain = io::load_chain(o.chain, o.s0, o.r);
    const auto screened = calibration::screen(chain, o.min_mid);

    calibration::CalibrationOptions co;
    co.pricing.a = o.a;
    co.pricing.grid = o.fft.spec();
    co.free = parse_free(o.free, kind_of(base));
    co.nm.max_iter = o.max_iter;
    co.n_starts = o.starts;
    co.min_mid = o.min_mid;
    const auto res = calibration::calibrate_auto(chain, base, co);

    ctx.doc.warnings = screened.warnings;
    ctx.doc.parameters = io::params_to_json(res.params);
    auto& d = ctx.doc.diagnostics;
    d["model"] = kind_of(res.params) == ModelKind::mlsm ? "mlsm" : "blm";
    d["rmse"] = res.rmse;
    d["rmse_over_s0"] = res.rmse / o.s0;
    d["n_quotes"] = chain.quotes.size();
    d["n_quotes_used"] = res.n_quotes_used;
    d["n_dropped"] = screened.dropped;
    d["converged"] = res.converged;
    d["damping_a"] = o.a;
    d["compensator"] = model::mcmm_compensator(res.params);
    d["start_rmse"] = res.start_rmse;
    d["objective_trace"] = res.objective_trace;

    if (!o.params_out.empty()) io::write_text(o.params_out, io::params_to_json(res.params).dump(2) + "\n");
    if (!o.residuals_out.empty()) {
        const auto& used = screened.chain;
        const auto prices = calibration::model_prices(res.params, used, co.pricing);
        io::CsvTable t{{"expiry_date", "days", "strike", "mid", "model", "residual"}, {}};
        for (std::size_t i = 0; i < used.quotes.size(); ++i) {
            const auto& q = used.quotes[i];
            t.rows.push_back({format_date(q.expiry), std::to_string(used.days_to(q.expiry)), num(q.strike), num(q.mid),
                              num(prices[i]), num(prices[i] - q.mid)});
        }
        write_csv(o.residuals_out, t);
    }
}

// ---------------------------------------------------------------- price

struct PriceOpts {
    std::string params;
    double s0 = 0.0, r = 0.0, days = 0.0, a = 0.75;
    std::vector<double> strikes;
    FftOpts fft;
    std::string csv_out;
};

void run_price(Context& ctx, const PriceOpts& o) {
    ctx.input("params", o.params);
    ctx.output(o.csv_out);
    ctx.check_paths();
    const auto p = io::load_params(o.params);
    const double r = o.r / kTradingDaysPerYear;
    const auto calls = transform::carr_madan_call(p, r, o.s0, o.days, o.strikes, o.a, o.fft.spec());

    ctx.doc.parameters = io::params_to_json(p);
    auto& d = ctx.doc.diagnostics;
    d["s0"] = o.s0;
    d["r_annual"] = o.r;
    d["expiry_days"] = o.days;
    d["damping_a"] = o.a;
    Json rows = Json::array();
    io::CsvTable t{{"strike", "call", "put"}, {}};
    for (std::size_t i = 0; i < calls.size(); ++i) {
        const double put = transform::put_from_parity(calls[i], o.s0, o.strikes[i], r, o.days);
        Json row = Json::object();
        row["strike"] = o.strikes[i];
        row["call"] = calls[i];
        row["put"] = put;
        rows.push_back(row);
        t.rows.push_back({num(o.strikes[i]), num(calls[i]), num(put)});
    }
    d["prices"] = rows;
    if (!o.csv_out.empty()) write_csv(o.csv_out, t);
}

// ---------------------------------------------------------------- pwf

struct PwfOpts {
    std::string spot, rn, dynamics = "risk-neutral", curve_out;
    double r = 0.0, days = 1.0;
    std::size_t points = 1001;
    std::size_t fft_n = std::size_t{1} << 16;
};

void run_pwf(Context& ctx, const PwfOpts& o) {
    ctx.input("spot_params", o.spot);
    ctx.input("rn_params", o.rn);
    ctx.output(o.curve_out);
    ctx.check_paths();
    const auto spot = io::load_params(o.spot);
    const auto rn = io::load_params(o.rn);
    const auto dyn = o.dynamics == "as-given" ? pwf::RnDynamics::as_given : pwf::RnDynamics::risk_neutral;
    const auto curve =
        pwf::implied_pwf_from_models(spot, rn, o.r / kTradingDaysPerYear, o.days, dyn, o.points, o.fft_n);
    const auto shape = pwf::shape_report(curve);

    ctx.doc.parameters = Json::object();
    ctx.doc.parameters["spot"] = io::params_to_json(spot);
    ctx.doc.parameters["implied"] = io::params_to_json(rn);
    auto& d = ctx.doc.diagnostics;
    d["horizon_days"] = curve.horizon_days;
    d["rn_dynamics"] = o.dynamics;
    d["points"] = curve.u.size();
    double dev = 0.0;
    for (std::size_t i = 0; i < curve.u.size(); ++i) dev = std::max(dev, std::abs(curve.w[i] - curve.u[i]));
    d["max_abs_deviation_from_identity"] = dev;
    Json s = Json::object();
    s["inflection_points"] = shape.inflection_points;
    s["concave_segments"] = interval_list(shape.concave_segments);
    s["convex_segments"] = interval_list(shape.convex_segments);
    s["linear_segments"] = interval_list(shape.linear_segments);
    s["left_slope"] = shape.left_slope;
    s["right_slope"] = shape.right_slope;
    d["shape"] = s;
    if (!o.curve_out.empty()) {
        io::CsvTable t{{"u", "w", "w_raw"}, {}};
        for (std::size_t i = 0; i < curve.u.size(); ++i)
            t.rows.push_back({num(curve.u[i]), num(curve.w[i]), num(curve.w_raw[i])});
        write_csv(o.curve_out, t);
    }
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    std::string params, ig, kind = "returns", start_date = "2000-01-03", csv_out;
    std::size_t n = 1000;
    double days = 1.0, scale = inference::kDefaultVixScale;
};

std::vector<Date> weekday_dates(Date start, std::size_t n) {
    std::vector<Date> out;
    for (Date d = start; out.size() < n; d += std::chrono::days{1}) {
        const std::chrono::weekday w{d};
        if (w != std::chrono::Saturday && w != std::chrono::Sunday) out.push_back(d);
    }
    return out;
}

void run_simulate(Context& ctx, const SimulateOpts& o) {
    if (o.kind == "returns" && o.params.empty()) throw UsageError("--params is required for returns");
    if (o.kind == "vix" && o.ig.empty()) throw UsageError("--ig is required for vix");
    if (!o.params.empty()) ctx.input("params", o.params);
    if (!o.ig.empty()) ctx.input("ig", o.ig);
    ctx.output(o.csv_out);
    ctx.check_paths();
    const auto dates = weekday_dates(parse_date(o.start_date), o.n);
    const sim::RngSeed seed{ctx.g.seed};
    auto& d = ctx.doc.diagnostics;
    d["kind"] = o.kind;
    d["n"] = o.n;
    d["seed"] = ctx.g.seed;

    io::CsvTable t;
    std::vector<double> values;
    if (o.kind == "returns") {
        const auto p = io::load_params(o.params);
        ctx.doc.parameters = io::params_to_json(p);
        values = sim::sample(p, o.days, o.n, seed);
        t.header = {"date", "log_return"};
        d["horizon_days"] = o.days;
        const auto m = model::moments(p);
        d["model_mean"] = m.mean * o.days;
        d["model_variance"] = m.variance * o.days;
    } else {
        const auto ig = io::load_ig(o.ig);
        ctx.doc.parameters = io::params_to_json(ig);
        values = sim::sample_ig(ig.h, ig.l, o.n, seed);
        for (double& v : values) v /= o.scale;
        t.header = {"date", "level"};
        d["scale"] = o.scale;
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    d["sample_mean"] = mean;
    d["sample_variance"] = values.size() > 1 ? var / static_cast<double>(values.size() - 1) : 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) t.rows.push_back({format_date(dates[i]), num(values[i])});
    if (!o.csv_out.empty()) write_csv(o.csv_out, t);
}

void print_error(const std::string& category, const std::string& message) {
    Json j = Json::object();
    j["error"] = category;
    j["message"] = message;
    std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed Levy subordinated market model: fitting, calibration, pricing and probability weighting"};
    app.set_config("--config", "", "TOML/INI configuration file; command-line flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1, 1);

    Context ctx;
    app.add_option("--out", ctx.g.out, "result document path ('-' for stdout)")->capture_default_str();
    app.add_flag("--no-timestamp", ctx.g.no_timestamp, "omit the timestamp from the result document");
    app.add_option("--seed", ctx.g.seed, "random seed")->capture_default_str();

    FitVixOpts fv;
    auto* s_fv = app.add_subcommand("fit-vix", "inverse Gaussian maximum likelihood on volatility-index levels");
    s_fv->add_option("--in", fv.in, "CSV with header date,level")->required()->check(CLI::ExistingFile);
    s_fv->add_option("--scale", fv.scale, "multiplier applied to levels")->capture_default_str()->check(CLI::PositiveNumber);
    s_fv->add_option("--params-out", fv.params_out, "write {h, l} as a parameter document");
    s_fv->add_option("--pp-out", fv.pp_out, "write PP-plot points as CSV");
    s_fv->add_option("--pit-out", fv.pit_out, "write probability integral transforms as CSV");

    FitReturnsOpts fr;
    auto* s_fr = app.add_subcommand("fit-returns", "empirical characteristic function fit to daily log returns");
    s_fr->add_option("--in", fr.in, "CSV with header date,log_return")->required()->check(CLI::ExistingFile);
    s_fr->add_option("--model", fr.model, "mlsm or blm")->capture_default_str()->check(CLI::IsMember({"mlsm", "blm"}));
    s_fr->add_option("--ig", fr.ig, "IG parameter document (h, l), required for mlsm")->check(CLI::ExistingFile);
    s_fr->add_option("--gauge", fr.gauge, "parameter document fixing sigma (and m for blm)")->check(CLI::ExistingFile);
    s_fr->add_option("--starts", fr.starts, "number of simplex starts")->capture_default_str()->check(CLI::PositiveNumber);
    s_fr->add_option("--jitter", fr.jitter, "start perturbation scale")->capture_default_str()->check(CLI::NonNegativeNumber);
    s_fr->add_option("--max-iter", fr.max_iter, "simplex iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
    s_fr->add_option("--ecf-points", fr.grid_points, "ECF grid size (odd)")->capture_default_str();
    s_fr->add_option("--params-out", fr.params_out, "write fitted parameters");
    s_fr->add_option("--density-out", fr.density_out, "write the fitted density grid as CSV");
    s_fr->add_option("--pp-out", fr.pp_out, "write PP-plot points as CSV");

    CalibrateOpts ca;
    auto* s_ca = app.add_subcommand("calibrate", "risk-neutral calibration to European call quotes");
    s_ca->add_option("--chain", ca.chain, "CSV quote_date,expiry_date,strike,mid[,bid,ask]")->required()->check(CLI::ExistingFile);
    s_ca->add_option("--start", ca.start, "starting parameter document (e.g. the spot fit)")->required()->check(CLI::ExistingFile);
    s_ca->add_option("--s0", ca.s0, "spot price")->required()->check(CLI::PositiveNumber);
    s_ca->add_option("--r", ca.r, "annualised risk-free rate")->required();
    s_ca->add_option("--model", ca.model, "mlsm or blm (default: model of --start)")->check(CLI::IsMember({"mlsm", "blm"}));
    s_ca->add_option("--ig", ca.ig, "IG pair when converting a blm start to mlsm")->check(CLI::ExistingFile);
    s_ca->add_option("--free", ca.free, "comma-separated free parameters (default depends on model)");
    s_ca->add_option("--a", ca.a, "damping exponent")->capture_default_str()->check(CLI::PositiveNumber);
    s_ca->add_option("--min-mid", ca.min_mid, "drop quotes below this mid")->capture_default_str();
    s_ca->add_option("--starts", ca.starts, "number of starts")->capture_default_str()->check(CLI::PositiveNumber);
    s_ca->add_option("--max-iter", ca.max_iter, "simplex iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
    add_fft_options(s_ca, ca.fft);
    s_ca->add_option("--params-out", ca.params_out, "write calibrated parameters");
    s_ca->add_option("--residuals-out", ca.residuals_out, "write per-quote residuals as CSV");

    PriceOpts pr;
    auto* s_pr = app.add_subcommand("price", "European calls and puts by the damped Fourier method");
    s_pr->add_option("--params", pr.params, "parameter document")->required()->check(CLI::ExistingFile);
    s_pr->add_option("--s0", pr.s0, "spot price")->required()->check(CLI::PositiveNumber);
    s_pr->add_option("--r", pr.r, "annualised risk-free rate")->required();
    s_pr->add_option("--expiry-days", pr.days, "maturity in trading days")->required()->check(CLI::PositiveNumber);
    s_pr->add_option("--strikes", pr.strikes, "comma-separated strikes")->required()->delimiter(',');
    s_pr->add_option("--a", pr.a, "damping exponent")->capture_default_str()->check(CLI::PositiveNumber);
    add_fft_options(s_pr, pr.fft);
    s_pr->add_option("--csv-out", pr.csv_out, "write strike,call,put CSV ('-' for stdout)");

    PwfOpts pw;
    auto* s_pw = app.add_subcommand("pwf", "implied probability weighting function and its shape");
    s_pw->add_option("--spot-params", pw.spot, "physical-measure parameters")->required()->check(CLI::ExistingFile);
    s_pw->add_option("--rn-params", pw.rn, "option-implied parameters")->required()->check(CLI::ExistingFile);
    s_pw->add_option("--r", pw.r, "annualised risk-free rate")->capture_default_str();
    s_pw->add_option("--horizon-days", pw.days, "comparison horizon in trading days")->capture_default_str()->check(CLI::PositiveNumber);
    s_pw->add_option("--rn-dynamics", pw.dynamics, "risk-neutral (mean-corrected) or as-given")
        ->capture_default_str()
        ->check(CLI::IsMember({"risk-neutral", "as-given"}));
    s_pw->add_option("--points", pw.points, "u-grid size")->capture_default_str();
    s_pw->add_option("--fft-n", pw.fft_n, "FFT size for the two distributions")->capture_default_str();
    s_pw->add_option("--curve-out", pw.curve_out, "write u,w,w_raw CSV");

    SimulateOpts si;
    auto* s_si = app.add_subcommand("simulate", "Monte Carlo draws as returns or volatility-index CSV");
    s_si->add_option("--kind", si.kind, "returns or vix")->capture_default_str()->check(CLI::IsMember({"returns", "vix"}));
    s_si->add_option("--params", si.params, "model parameters (returns)")->check(CLI::ExistingFile);
    s_si->add_option("--ig", si.ig, "IG parameters (vix)")->check(CLI::ExistingFile);
    s_si->add_option("--n", si.n, "number of rows")->capture_default_str()->check(CLI::PositiveNumber);
    s_si->add_option("--horizon-days", si.days, "increment horizon in trading days")->capture_default_str()->check(CLI::PositiveNumber);
    s_si->add_option("--scale", si.scale, "levels = draws / scale (vix)")->capture_default_str()->check(CLI::PositiveNumber);
    s_si->add_option("--start-date", si.start_date, "first date")->capture_default_str();
    s_si->add_option("--csv-out", si.csv_out, "CSV path ('-' for stdout)")->required();

    for (auto* s : {s_fv, s_fr, s_ca, s_pr, s_pw, s_si}) s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what());
        return kExitUsage;
    }

    try {
        ctx.output(ctx.g.out);
        if (s_fv->parsed()) {
            ctx.doc.command = "fit-vix";
            run_fit_vix(ctx, fv);
        } else if (s_fr->parsed()) {
            ctx.doc.command = "fit-returns";
            run_fit_returns(ctx, fr);
        } else if (s_ca->parsed()) {
            ctx.doc.command = "calibrate";
            run_calibrate(ctx, ca);
        } else if (s_pr->parsed()) {
            ctx.doc.command = "price";
            run_price(ctx, pr);
        } else if (s_pw->parsed()) {
            ctx.doc.command = "pwf";
            run_pwf(ctx, pw);
        } else if (s_si->parsed()) {
            ctx.doc.command = "simulate";
            run_simulate(ctx, si);
        }
        ctx.emit();
    } catch (const UsageError& e) {
        print_error(e.category(), e.what());
        return kExitUsage;
    } catch (const Error& e) {
        print_error(e.category(), e.what());
        return kExitError;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return kExitInternal;
    }
    return 0;
}
