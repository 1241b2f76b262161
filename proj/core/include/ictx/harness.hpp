// Experiment driver behind the command line tool: flat dotted-key
// configuration, deterministic suite execution, and JSON reports with
// plot-ready CSV tables beside them.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ictx/verify.hpp"

namespace ictx {

inline constexpr const char* kVersion = "0.1.0";

enum class Mode { verify, fit, realize, ot, probe, eval };

Mode mode_from_string(const std::string& name);
std::string mode_to_string(Mode mode);

/// Invalid configuration; the CLI maps this to exit code 2.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
  Mode mode = Mode::verify;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::string out_dir;
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_real(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  std::vector<double> get_reals(const std::string& key,
                                const std::vector<double>& fallback) const;
  std::vector<long> get_ints(const std::string& key,
                             const std::vector<long>& fallback) const;

  /// Throws UsageError naming the first invalid field.
  void validate() const;
};

/// `key = value` lines with '#' comments; later keys win.
void load_config_file(const std::string& path, ExperimentConfig& config);

struct Report {
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, std::string>> fixture_digests;
  std::vector<std::pair<std::string, std::string>> artifacts;
  std::vector<std::string> lines;  // human-readable output, also printed
  double timing_ms = 0.0;
  std::string library_version = kVersion;

  bool all_pass() const;
};

/// Executes the configured suite deterministically given the seed and
/// writes report.json (and any CSV tables) under the output directory.
Report run(const ExperimentConfig& config);

std::string report_to_json(const Report& report);
void write_report_files(const ExperimentConfig& config, const Report& report);

/// FNV-1a digest, used to pin fixture identity inside reports.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace ictx
