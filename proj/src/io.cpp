#include "mlsm/io.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include "mlsm/errors.hpp"

namespace mlsm::io {

namespace {

struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string where(const fs::path& path, std::size_t line, std::size_t col) {
    std::ostringstream os;
    os << path.string() << ":" << line;
    if (col > 0) os << ":" << col;
    return os.str();
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string() + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Reads a CSV whose header must be one of `headers` (exact column names).
// Returns the index of the matching header and the data rows.
std::pair<std::size_t, std::vector<CsvRow>> read_csv(const fs::path& path,
                                                     const std::vector<std::vector<std::string>>& headers) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    std::optional<std::size_t> which;
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto fields = split(line);
        if (!which) {
            for (std::size_t h = 0; h < headers.size(); ++h)
                if (fields == headers[h]) which = h;
            if (!which) {
                std::string expected;
                for (const auto& h : headers) {
                    std::string s;
                    for (const auto& f : h) s += (s.empty() ? "" : ",") + f;
                    expected += (expected.empty() ? "" : " or ") + s;
                }
                throw ParseError(where(path, lineno, 0) + ": expected header " + expected);
            }
            continue;
        }
        if (fields.size() != headers[*which].size()) {
            throw ParseError(where(path, lineno, 0) + ": expected " + std::to_string(headers[*which].size()) +
                             " fields, found " + std::to_string(fields.size()));
        }
        rows.push_back({lineno, std::move(fields)});
    }
    if (!which) throw ParseError(path.string() + ": empty file");
    return {*which, std::move(rows)};
}

double parse_number(const fs::path& path, const CsvRow& row, std::size_t col) {
    const std::string& s = row.fields[col];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ParseError(where(path, row.line, col + 1) + ": invalid number '" + s + "'");
    }
    return v;
}

Date parse_date_at(const fs::path& path, const CsvRow& row, std::size_t col) {
    try {
        return parse_date(row.fields[col]);
    } catch (const ParseError& e) {
        throw ParseError(where(path, row.line, col + 1) + ": " + e.what());
    }
}

void check_increasing(const fs::path& path, const std::vector<CsvRow>& rows, const std::vector<Date>& dates) {
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (!(dates[i - 1] < dates[i])) {
            throw ParseError(where(path, rows[i].line, 1) + ": dates must be strictly increasing");
        }
    }
}

}  // namespace

inference::ReturnSeries load_returns(const fs::path& path) {
    const auto [_, rows] = read_csv(path, {{"date", "log_return"}});
    inference::ReturnSeries s;
    for (const auto& r : rows) {
        s.dates.push_back(parse_date_at(path, r, 0));
        s.values.push_back(parse_number(path, r, 1));
    }
    check_increasing(path, rows, s.dates);
    s.validate();
    return s;
}

inference::VixSeries load_vix(const fs::path& path) {
    const auto [_, rows] = read_csv(path, {{"date", "level"}});
    inference::VixSeries s;
    for (const auto& r : rows) {
        s.dates.push_back(parse_date_at(path, r, 0));
        const double v = parse_number(path, r, 1);
        if (!(v > 0.0)) throw DomainError(where(path, r.line, 2) + ": level must be positive");
        s.levels.push_back(v);
    }
    check_increasing(path, rows, s.dates);
    return s;
}

calibration::OptionChain load_chain(const fs::path& path, double s0, double r_ann) {
    const auto [which, rows] = read_csv(
        path, {{"quote_date", "expiry_date", "strike", "mid"}, {"quote_date", "expiry_date", "strike", "mid", "bid", "ask"}});
    calibration::OptionChain chain;
    chain.s0 = s0;
    chain.r_ann = r_ann;
    std::optional<Date> quote_date;
    for (const auto& r : rows) {
        const Date qd = parse_date_at(path, r, 0);
        if (quote_date && *quote_date != qd) throw ParseError(where(path, r.line, 1) + ": mixed quote dates");
        quote_date = qd;
        calibration::OptionQuote q;
        q.expiry = parse_date_at(path, r, 1);
        if (!(q.expiry > qd)) throw DomainError(where(path, r.line, 2) + ": expiry must follow the quote date");
        q.strike = parse_number(path, r, 2);
        if (!(q.strike > 0.0)) {
            throw DomainError(where(path, r.line, 3) + ": strike must be positive, got " + r.fields[2]);
        }
        const bool has_quotes = which == 1 && !r.fields[4].empty() && !r.fields[5].empty();
        if (has_quotes) {
            const double bid = parse_number(path, r, 4);
            const double ask = parse_number(path, r, 5);
            if (bid < 0.0 || ask < bid) throw DomainError(where(path, r.line, 5) + ": need 0 <= bid <= ask");
            q.mid = 0.5 * (bid + ask);
        } else {
            q.mid = parse_number(path, r, 3);
        }
        if (!(q.mid >= 0.0)) throw DomainError(where(path, r.line, 4) + ": mid must be nonnegative");
        chain.quotes.push_back(q);
    }
    if (!quote_date) throw ParseError(path.string() + ": no quotes");
    chain.quote_date = *quote_date;
    chain.validate();
    return chain;
}

// ---------------------------------------------------------------- params

Json params_to_json(const ModelParams& p) {
    Json j = Json::object();
    for (int i = 0; i < kParamCount; ++i) {
        const auto id = static_cast<ParamId>(i);
        if (has_slot(kind_of(p), id)) j[std::string(kParamNames[static_cast<std::size_t>(i)])] = get(p, id);
    }
    return j;
}

Json params_to_json(const IgParams& p) {
    Json j = Json::object();
    j["h"] = p.h;
    j["l"] = p.l;
    return j;
}

namespace {

const Json& parameter_block(const Json& j) {
    if (!j.is_object()) throw ParseError("parameter document must be an object");
    if (j.contains("schema_version")) {
        if (!j.contains("parameters")) throw ParseError("result document has no parameters block");
        return j.at("parameters");
    }
    return j;
}

std::map<std::string, double> numeric_fields(const Json& j) {
    std::map<std::string, double> out;
    for (const auto& [k, v] : j.items()) {
        if (!param_id_from_name(k)) throw ParseError("unknown parameter key '" + k + "'");
        if (!v.is_number()) throw ParseError("parameter '" + k + "' must be a number");
        out[k] = v.get<double>();
    }
    return out;
}

}  // namespace

ModelParams params_from_json(const Json& doc) {
    const auto f = numeric_fields(parameter_block(doc));
    for (const char* k : {"mu", "rho", "sigma", "m", "alpha", "beta", "d"}) {
        if (!f.contains(k)) throw ParseError(std::string("missing parameter '") + k + "'");
    }
    const bool h = f.contains("h");
    const bool l = f.contains("l");
    if (h != l) throw ParseError("h and l must be given together");
    const NigParams nig{f.at("m"), f.at("alpha"), f.at("beta"), f.at("d")};
    ModelParams p = h ? ModelParams{MlsmParams{f.at("mu"), f.at("rho"), f.at("sigma"), nig, {f.at("h"), f.at("l")}}}
                      : ModelParams{BlmParams{f.at("mu"), f.at("rho"), f.at("sigma"), nig}};
    validate(p);
    return p;
}

IgParams ig_from_json(const Json& doc) {
    const auto f = numeric_fields(parameter_block(doc));
    if (!f.contains("h") || !f.contains("l")) throw ParseError("IG document needs h and l");
    if (f.size() != 2) {
        // A full subordinated-model document also carries the IG pair.
        params_from_json(doc);
    }
    const IgParams p{f.at("h"), f.at("l")};
    validate(p);
    return p;
}

Json read_json(const fs::path& path) {
    const std::string text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

ModelParams load_params(const fs::path& path) {
    try {
        return params_from_json(read_json(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

IgParams load_ig(const fs::path& path) {
    try {
        return ig_from_json(read_json(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------- results

Json ResultDocument::to_json() const {
    Json j = Json::object();
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    Json in = Json::object();
    for (const auto& [label, digest] : inputs) in[label] = "sha256:" + digest;
    j["inputs"] = in;
    j["parameters"] = parameters;
    j["diagnostics"] = diagnostics;
    j["warnings"] = warnings;
    if (timestamp) j["timestamp"] = *timestamp;
    return j;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("io", "SHA-256 digest failed");
    }
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

std::string timestamp_now() {
    std::time_t t = std::time(nullptr);
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env != nullptr && *env != '\0') {
        long long v = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("SOURCE_DATE_EPOCH is not an integer");
        t = static_cast<std::time_t>(v);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const fs::path& path, std::string_view text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("io", path.string() + ": cannot write");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw Error("io", path.string() + ": write failed");
    }
    fs::rename(tmp, path);
}

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) throw Error("io", "cannot format number");
    return std::string(buf, ptr);
}

std::string CsvTable::to_string() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& f) {
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (i > 0) out += ',';
            out += f[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

}  // namespace mlsm::io
