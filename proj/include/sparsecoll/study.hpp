#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsecoll/models.hpp"
#include "sparsecoll/random_inputs.hpp"
#include "sparsecoll/univariate_rules.hpp"

namespace sparsecoll {

/// Invalid study configuration. The message names the file and line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& study_kinds() {
  static const std::vector<std::string> kinds{"nodes",   "quad-1d", "interp-1d", "adapt",
                                              "moments", "sobol",   "cv-error"};
  return kinds;
}

struct ReferenceSpec {
  enum class Source { None, Values, Gauss, Adaptive };
  Source source = Source::None;
  std::optional<double> mean;
  std::optional<double> variance;
  std::optional<double> skewness;
  int gauss_points = 30;
  double adaptive_tolerance = 1e-14;
  std::size_t adaptive_budget = 50000;
};

struct StudyConfig {
  std::string study;
  std::string model_name;  // empty when the study needs no model
  double frequency_ghz = 6.0;
  std::map<std::string, double> fixed;
  std::vector<std::string> input_names;
  std::vector<BoundedDistribution> inputs;
  std::vector<BoundedDistribution> cv_inputs;  // defaults to inputs
  RuleFamily rule = RuleFamily::ClenshawCurtis;
  int max_level = 4;
  std::optional<std::size_t> budget;
  double tolerance = 0.0;
  int max_level_per_dim = 30;
  std::size_t samples = 0;
  std::size_t cv_samples = 0;
  ReferenceSpec reference;
  std::uint64_t seed = 0;
  std::string surrogate_file;  // resolved path; empty when not given
  bool save_surrogate = false;
  nlohmann::json raw;
};

/// Parses and validates a JSON study configuration for `study`.
/// `source_name` prefixes error messages ("<source_name>:<line>: ...").
StudyConfig parse_study_config(const std::string& study, const std::string& text, const std::string& source_name,
                               const std::string& base_dir = ".");

/// Model named in the config, restricted to the configured inputs.
ParametricModel make_model(const StudyConfig& config);

struct StudyOutput {
  std::string csv;
  nlohmann::json report;
  std::optional<nlohmann::json> surrogate;
};

/// Runs one study. Throws ConfigError for configuration problems and other
/// exceptions for runtime failures.
StudyOutput run_study(const StudyConfig& config, unsigned threads);

struct CliOptions {
  std::string study;
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

/// Reads the config, runs the study and writes the artifacts. Returns the
/// process exit code: 0 success, 2 configuration error, 3 runtime failure.
/// Nothing is written unless the study completes.
int run_cli(const CliOptions& options, std::ostream& out, std::ostream& err);

}  // namespace sparsecoll
