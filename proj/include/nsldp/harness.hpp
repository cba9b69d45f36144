#pragma once

// Experiment configuration, orchestration and persistence.
//
// A config is a JSON document with a versioned schema. Every section is optional
// except "kind"; omitted keys take defaults, unknown keys are rejected. The config
// hash is FNV-1a over the canonical dump (defaults filled, keys sorted, io.output_dir
// excluded) and names the run directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsldp/noise.hpp"

namespace nsldp {

inline constexpr int kSchemaVersion = 1;

enum class ExperimentKind { ou_checks, renorm, lemma_ca50, lemma_a1, theorem1, theorem2, instanton, laplace, tube };
std::string to_string(ExperimentKind k);
ExperimentKind kind_from_string(const std::string& name);

/// Thrown for malformed configs (unknown keys, wrong types, bad values).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::ou_checks;
  /// Full canonical document, defaults filled in.
  nlohmann::json doc;

  const nlohmann::json& numerics() const { return doc.at("numerics"); }
  const nlohmann::json& noise() const { return doc.at("noise"); }
  const nlohmann::json& statistics() const { return doc.at("statistics"); }
  const nlohmann::json& io() const { return doc.at("io"); }
  const nlohmann::json& params() const { return doc.at("params"); }
  const nlohmann::json& acceptance() const { return doc.at("acceptance"); }

  std::uint64_t seed() const { return doc.at("statistics").at("seed").get<std::uint64_t>(); }
  int replicas() const { return doc.at("statistics").at("replicas").get<int>(); }
};

/// Parse and fill defaults; throws ConfigError on schema problems.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const nlohmann::json& doc);
/// Module-level parameter constraints (e.g. the Besov window for theorem2); throws ValidationError.
void validate(const ExperimentConfig& cfg);

std::uint64_t fnv1a64(const std::string& bytes);
std::string config_hash(const ExperimentConfig& cfg);

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct RunRecord {
  std::string kind;
  std::string config_hash;
  std::string output_dir;
  std::string started;
  std::string finished;
  std::string version;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> replica_seeds;
  std::vector<std::string> result_files;
  std::vector<Check> checks;
  bool pass = false;
  std::string error;  ///< set for failed sweep members
};

/// Run one experiment. Results go to <root>/<kind>-<hash prefix>/ where root is
/// `output_root` if given, else io.output_dir.
RunRecord run(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& output_root = std::nullopt);

/// Set the value at a dotted path ("noise.epsilon", "params.epsilons") and re-parse.
ExperimentConfig with_value(const ExperimentConfig& base, const std::string& axis, const nlohmann::json& value);

struct SweepResult {
  std::vector<RunRecord> members;
  std::string merged_csv;
  bool pass = false;
};
/// Independent runs along one axis; a failing member is recorded and the others continue.
SweepResult sweep(const ExperimentConfig& base, const std::string& axis, const std::vector<nlohmann::json>& values,
                  const std::optional<std::filesystem::path>& output_root = std::nullopt, int workers = 1);

struct ReportDocument {
  std::string kind;
  std::string csv;   ///< x,y,stderr
  std::string text;
  bool pass = false;
};
/// Summarize run directories of one kind; writes report.csv and report.txt into `out`.
ReportDocument report(const std::vector<std::filesystem::path>& run_dirs,
                      const std::optional<std::filesystem::path>& out = std::nullopt);

std::string toolkit_version();

}  // namespace nsldp
