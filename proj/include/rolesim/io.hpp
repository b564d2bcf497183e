#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rolesim/egta.hpp"
#include "rolesim/simulation.hpp"
#include "rolesim/sweep.hpp"

namespace rolesim {

inline constexpr const char* kVersion = "0.1.0";

/// Output schema identifiers recorded in the manifest. Bump on any column change.
inline constexpr const char* kMetricsSchema = "metrics/1";
inline constexpr const char* kRoundsSchema = "rounds/1";
inline constexpr const char* kSweepSchema = "sweep/1";
inline constexpr const char* kHptSchema = "hpt/1";
inline constexpr const char* kAlphaRankSchema = "alpharank/1";
inline constexpr const char* kPoolsSchema = "pools/1";
inline constexpr const char* kVerifySchema = "verify-analytic/1";

/// Parses a numeric grid:
///   "0.5"            single value
///   "0,0.1,0.7"      explicit list
///   "0:1:0.1"        start:stop:step, inclusive of stop up to rounding
///   "0.1:100:log30"  30 log-spaced values from start to stop (both > 0)
/// Throws ConfigError on anything else.
std::vector<double> parse_grid(std::string_view spec);

/// Shortest round-trip decimal form; empty for NaN.
std::string format_number(double x);

std::string metrics_csv(const MetricsSeries& m, std::size_t ma_window);
std::string rounds_csv(const std::vector<RoundRecord>& records, std::size_t n_builders);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string hpt_csv(const std::vector<HeuristicPayoffTable>& tables);
std::vector<HeuristicPayoffTable> parse_hpt_csv(const std::string& text);

struct AlphaRankRow {
  double conflict_probability = 0.0;
  AlphaRankResult result;
};
std::string alpharank_csv(const std::vector<AlphaRankRow>& rows);
std::string pools_json(const std::vector<PoolSnapshot>& snapshots);

std::string read_text_file(const std::filesystem::path& path);
/// Throws IoError when the file cannot be written completely.
void write_text_file(const std::filesystem::path& path, const std::string& content);
/// Creates the directory (and parents) or throws IoError.
void ensure_directory(const std::filesystem::path& dir);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Per-invocation record of what was run and what was written.
class RunManifest {
 public:
  RunManifest(std::string command, std::uint64_t seed, std::string config_json);

  /// Writes `content` to dir/name and records its checksum and schema.
  void write_output(const std::filesystem::path& dir, const std::string& name,
                    const std::string& content, const std::string& schema);

  /// Writes manifest.json into dir, including the elapsed wall-clock time.
  void finish(const std::filesystem::path& dir, double seconds) const;

  const std::map<std::string, std::pair<std::string, std::string>>& outputs() const {
    return outputs_;
  }

 private:
  std::string command_;
  std::uint64_t seed_;
  std::string config_json_;
  std::map<std::string, std::pair<std::string, std::string>> outputs_;  // name -> (sha, schema)
};

/// Verifies every checksum listed in dir/manifest.json; returns mismatching names.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

}  // namespace rolesim
