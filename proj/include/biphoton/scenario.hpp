#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "biphoton/domain_types.hpp"
#include "biphoton/spectral.hpp"

namespace biphoton {

/// Invalid configuration; the message starts with the offending key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key_path, const std::string& what)
      : std::runtime_error(key_path + ": " + what), key_path_(key_path) {}
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

struct GateWidthScan {
  double tau_g = 0.0;
  std::vector<double> widths;
};

struct GateDelayScan {
  std::vector<double> delays;
  double w = 0.0;
};

struct SpectrumScan {
  std::vector<double> t_cuts;  // +inf allowed
  std::optional<EnergyGrid> grid;
};

using ScanSpec = std::variant<GateWidthScan, GateDelayScan, SpectrumScan>;

struct AnalyticEngine {};
struct MonteCarloEngine {
  std::uint64_t n_pairs = 0;
  std::uint64_t seed = 0;
};
using Engine = std::variant<AnalyticEngine, MonteCarloEngine>;

struct ScenarioConfig {
  SourceModel source;
  std::optional<ScanSpec> scan;
  Engine engine = AnalyticEngine{};
  std::string output;
};

/// Parses and fully validates a config document. Unknown keys and
/// out-of-range values raise ConfigError before any computation.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::string& path);

/// Canonical document; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ScenarioConfig& config);

enum class Command { scan_width, scan_delay, spectrum, simulate };

/// Command-line overrides applied on top of the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> pairs;
  std::optional<std::string> out;
  std::optional<std::string> engine;  // "analytic" or "mc"
};

/// Applies overrides, then re-validates. Throws ConfigError.
ScenarioConfig apply_overrides(ScenarioConfig config, const Overrides& overrides);

/// Runs the command and returns the files written, manifest last. On failure
/// every file already written is removed before the exception propagates.
std::vector<std::string> run_scenario(const ScenarioConfig& config, Command command,
                                      unsigned threads = 0);

/// Output file names for a prefix.
std::string width_scan_path(const std::string& prefix);
std::string delay_scan_path(const std::string& prefix);
std::string spectrum_path(const std::string& prefix, double t_cut);
std::string timetags_path(const std::string& prefix);
std::string manifest_path(const std::string& prefix);

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Loads the config, runs the command and maps failures to exit codes,
/// reporting them on `err`.
int execute(Command command, const std::string& config_path, const Overrides& overrides,
            unsigned threads, std::ostream& out, std::ostream& err);

/// `analyze` subcommand: report on `out`, and in `<prefix>_analysis.csv` when
/// a prefix is given.
int execute_analyze(const std::string& input, double tau_g, double width,
                    const std::optional<std::string>& out_prefix, std::ostream& out,
                    std::ostream& err);

}  // namespace biphoton
