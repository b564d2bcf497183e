#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rolesim/simulation.hpp"

namespace rolesim {

/// Raw key/value settings with the place each value came from
/// ("run.yaml:4" or "--rounds"), so validation errors can point at it.
class Settings {
 public:
  struct Entry {
    std::string value;
    std::string origin;
  };

  void set(const std::string& key, std::string value, std::string origin);
  /// Entries of `over` replace ours.
  void merge(const Settings& over);
  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  const Entry* find(const std::string& key) const;

  std::optional<std::string> text(const std::string& key) const;
  std::optional<double> real(const std::string& key) const;
  /// Accepts integral reals such as "1e6"; rejects negatives and fractions.
  std::optional<std::size_t> count(const std::string& key, std::size_t min = 0) const;
  std::optional<std::uint64_t> seed(const std::string& key) const;
  std::optional<double> probability(const std::string& key) const;
  std::optional<bool> flag(const std::string& key) const;
  std::optional<std::vector<double>> grid(const std::string& key) const;

 private:
  std::map<std::string, Entry> entries_;
};

/// Keys accepted in configuration files (flags use the same names with
/// dashes, e.g. ma_window <-> --ma-window).
const std::vector<std::string>& known_setting_keys();

/// Loads a YAML mapping of known keys. Sequences become comma lists.
/// Errors read "path:line: message".
Settings load_settings_file(const std::filesystem::path& path);

/// Simulation parameters from settings on top of the defaults.
SimConfig sim_config_from(const Settings& s, SimConfig base = {});

/// Output directory: "out" setting, else $ROLESIM_OUT_DIR, else "rolesim-out".
std::filesystem::path output_directory(const Settings& s);

int cmd_simulate(const Settings& s);
int cmd_sweep(const Settings& s);
int cmd_egta(const Settings& s);
int cmd_verify_analytic(const Settings& s);

/// Parses arguments and dispatches. Exit codes: 0 success, 2 configuration
/// error, 3 IO error, 4 numerical failure.
int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace rolesim
