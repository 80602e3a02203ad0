#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mlsm/calibration.hpp"
#include "mlsm/inference.hpp"
#include "mlsm/params.hpp"

namespace mlsm::io {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// CSV inputs. Errors are ParseError ("path:line:column: reason") or
// DomainError for values that parse but violate an invariant.
inference::ReturnSeries load_returns(const fs::path& path);
inference::VixSeries load_vix(const fs::path& path);

/// Chain CSV `quote_date,expiry_date,strike,mid[,bid,ask]`. When bid and ask
/// are both present the mid is recomputed as their average. All rows must
/// share one quote date.
calibration::OptionChain load_chain(const fs::path& path, double s0, double r_ann);

// Flat parameter documents: keys mu, rho, sigma, m, alpha, beta, d and,
// for the subordinated model, h and l. A document holding only h and l is
// an IG pair. A result document is accepted through its "parameters" block.
Json params_to_json(const ModelParams& p);
Json params_to_json(const IgParams& p);
ModelParams params_from_json(const Json& j);
IgParams ig_from_json(const Json& j);
Json read_json(const fs::path& path);
ModelParams load_params(const fs::path& path);
IgParams load_ig(const fs::path& path);

inline constexpr int kSchemaVersion = 1;

struct ResultDocument {
    std::string command;
    std::vector<std::pair<std::string, std::string>> inputs;  // label -> sha256 of the file
    Json parameters = Json::object();
    Json diagnostics = Json::object();
    std::vector<std::string> warnings;
    std::optional<std::string> timestamp;

    Json to_json() const;
};

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const fs::path& path);

/// UTC ISO-8601 time; SOURCE_DATE_EPOCH (seconds) overrides the clock.
std::string timestamp_now();

/// Writes `text` atomically enough for a CLI: temp file then rename.
void write_text(const fs::path& path, std::string_view text);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string to_string() const;
};

}  // namespace mlsm::io
