#pragma once

// Declarative experiment configs, the runners behind `qlp run`, run manifests and
// long-format plot data.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlp/quadrature.hpp"
#include "qlp/testfn.hpp"

namespace qlp::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "0.4.0";

enum ExitCode : int { exit_pass = 0, exit_contract = 1, exit_validation = 2, exit_tolerance = 3 };

/// A config error; `field` is the JSON path of the offending entry.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(const std::string& field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ExperimentId {
  modlp_verify,
  thermal_l4,
  thermal_l2,
  liouville_check,
  rindler_equiv,
  rindler_l4,
  rindler_l2,
  qei_bound,
  purification,
};

std::string to_string(ExperimentId id);
ExperimentId experiment_from_string(const std::string& s);
const std::vector<ExperimentId>& all_experiments();

struct OutputSpec {
  std::string dir = "out";
  std::string prefix;  ///< defaults to the experiment id
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  ExperimentId experiment = ExperimentId::modlp_verify;
  double beta = 1.0;
  double mass = 1.0;
  std::map<std::string, PacketSpec> packets;
  std::vector<double> lambdas;
  QuadratureSpec quadrature;
  std::uint64_t seed = 1;
  OutputSpec output;
  /// Experiment-specific knobs (corpus sizes, grid sizes, offsets).
  nlohmann::json params = nlohmann::json::object();

  /// Throws ValidationError naming the field.
  void validate() const;
  double param(const std::string& key, double fallback) const;
  std::vector<double> param_list(const std::string& key, const std::vector<double>& fallback) const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

/// The config each experiment runs with when nothing is overridden; these are the
/// desk-scale renderings checked by the acceptance binary.
ExperimentConfig default_config(ExperimentId id);

enum class CheckKind { contract, tolerance };

struct CheckResult {
  std::string name;
  int criterion = 0;
  CheckKind kind = CheckKind::contract;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string detail;
  bool timing = false;  ///< wall-clock budgets stay out of the digested outputs
};

struct OutputFile {
  std::string name;  ///< file name inside the output directory
  std::string contents;
};

struct ExperimentOutcome {
  std::vector<CheckResult> checks;
  std::vector<OutputFile> files;
  double seconds = 0.0;
  bool passed() const;
  int exit_code() const;
};

/// Runs the experiment in memory. Throws ValidationError and ToleranceNotMet.
ExperimentOutcome execute(const ExperimentConfig& c);

struct OutputDigest {
  std::string path;
  std::string fnv1a;  ///< 16 hex digits
  std::size_t bytes = 0;
};

struct RunManifest {
  std::string config_hash;
  std::string artifact_version = kArtifactVersion;
  std::string experiment;
  std::string status;  ///< pass | contract-failure | validation-failure | tolerance-failure
  int exit_code = exit_pass;
  double wall_clock = 0.0;
  std::vector<CheckResult> checks;
  std::vector<OutputDigest> outputs;
  std::string error;
};

nlohmann::json to_json(const RunManifest& m);
/// name,criterion,kind,value,threshold,passed,detail (timing checks omitted).
std::string checks_csv(const std::vector<CheckResult>& checks);

std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);
/// Hash of the canonical (sorted-key) JSON dump of the config.
std::string config_hash(const ExperimentConfig& c);

/// execute + writes every output file and `<prefix>_manifest.json` into the output
/// directory. Validation and tolerance errors become manifest statuses.
RunManifest run(const ExperimentConfig& c);

/// run() on a config file, with optional output overrides. A config that fails to
/// load or validate still gets a validation-failure manifest, written to the
/// override directory or to the directory the file names.
RunManifest run_file(const std::string& path, const std::string& dir_override = "",
                     const std::string& prefix_override = "");

/// Long-format (series, x, y, yerr) rows from a CSV report. Throws
/// std::invalid_argument listing the available columns when one is missing.
std::string plotdata(const std::string& report_csv, const std::string& x, const std::vector<std::string>& ys,
                     const std::string& yerr = "", const std::string& series = "");

/// QLP_THREADS, clamped to at least 1 (default 1).
int thread_count();

}  // namespace qlp::cli
