#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace magpeel::cli {

inline constexpr const char* kToolName = "magpeel";
inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr const char* kOutDirEnv = "MAGPEEL_OUT_DIR";

enum class Command { Validate, Classify, MagnitudeProfile, Diversity, Peel, Product, Paths };

std::string to_string(Command c);
Command command_from_string(const std::string& s);

struct Tolerances {
  double tri = 1e-9;
  double eig = 1e-10;
  double neg = 1e-12;
  double kkt = 1e-8;
  std::optional<double> res;  // default 1e-8 * n
};

struct RunConfig {
  Command command = Command::Peel;
  std::vector<std::string> inputs;      // product takes >= 2
  std::string format = "auto";          // csv | json | auto
  std::string kind = "matrix";          // matrix | points
  std::string metric = "euclidean";     // for points: euclidean | spherical
  double norm_p = 2;
  double antipode_tol = 1e-8;
  bool merge_duplicates = false;
  Tolerances tol;
  std::optional<double> t;
  std::string t_grid;                   // "lo:hi:count" (log-spaced) or comma list
  std::vector<double> q{1, 2, std::numeric_limits<double>::infinity()};
  std::string p_vector = "uniform";     // path or "uniform"
  double p_exponent = 2;
  int stops = 2;
  std::size_t k = 500;
  std::uint64_t seed = 2025;
  std::string nodes, features, config_file;
  std::string source, target;
  bool synthetic = false;
  std::optional<int> max_layers;
  std::string out_dir;
  bool svg = false;
  bool csv = false;
  bool skip_certify = false;
  bool iterate = false;

  nlohmann::json to_json() const;
};

/// Everything a run produces: the canonical JSON result plus extra
/// artifacts keyed by file name (CSV, SVG, GeoJSON).
struct RunResult {
  int exit_code = 0;
  nlohmann::json result;
  std::map<std::string, std::string> artifacts;
};

/// Executes one command. Never throws for module errors: they become an
/// error JSON and a namespaced exit code (2 input, 3 numerical, 4 certification).
RunResult run(const RunConfig& config);

/// Parses argv into a config (CLI11). Returns nullopt and sets exit_code on
/// --help or parse failure.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, int& exit_code);

/// Writes the result to `<out>/<command>.json` plus artifacts, or prints the
/// JSON on stdout when no output directory is configured.
int emit(const RunConfig& config, const RunResult& result);

}  // namespace magpeel::cli
