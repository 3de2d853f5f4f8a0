#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "plab/asymptotic_space.hpp"

namespace plab::cli {

/// Malformed or incomplete configuration; raised before any compute.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum ExitCode : int {
    kOk = 0,
    kConfigFailure = 1,
    kNotConverged = 2,
    kCheckFailed = 3,
};

/// Command-line values that override keys of the config file.
struct Overrides {
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::optional<unsigned> threads;
    bool halve_stability_constant = false;
    std::optional<std::string> suite;
};

/// Parses a JSON config file; a missing path yields an empty object.
nlohmann::json load_config(const std::optional<std::filesystem::path>& path);

/// Writes the overrides into the config object under their key names.
nlohmann::json apply_overrides(nlohmann::json config, const Overrides& o);

/// Each command validates the whole config first, then computes, then
/// writes artifacts and manifest.json into config["out"].
int cmd_solve(const nlohmann::json& config, std::ostream& log);
int cmd_pipeline(const nlohmann::json& config, std::ostream& log);
int cmd_confinement(const nlohmann::json& config, std::ostream& log);
int cmd_compactness(const nlohmann::json& config, std::ostream& log);
int cmd_verify(const nlohmann::json& config, std::ostream& log);

/// Dispatches by name; converts ConfigError and argument errors to kConfigFailure.
int run(const std::string& subcommand, const nlohmann::json& config, std::ostream& log);

struct SuiteResult {
    std::string name;
    std::vector<EstimateReport> reports;
    bool pass() const;
};

/// Suite names in execution order.
const std::vector<std::string>& suite_names();

/// Runs one verification suite. Randomized suites draw from `seed`.
SuiteResult run_suite(const std::string& name, std::uint64_t seed, double tol, unsigned threads);

}  // namespace plab::cli
