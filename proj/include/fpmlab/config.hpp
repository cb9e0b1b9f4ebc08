#pragma once

#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpmlab/operators.hpp"
#include "fpmlab/nonlinearity.hpp"
#include "fpmlab/solver.hpp"

namespace fpm {

using Json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DatumSpec {
  std::string family;          // bump | eigen_power | singular | raw
  double amplitude = 1.0;
  double center = 0.0;         // bump
  double width = 0.0;          // bump
  double power = 1.0;          // eigen_power
  double exponent = 0.0;       // singular
  double cap = 0.0;            // singular
  std::vector<double> values;  // raw
};

struct SnapshotSpec {
  std::string mode = "every_step";  // every_step | stride | list
  int stride = 1;
  std::vector<double> times;
};

struct AuditSpec {
  std::string name;
  bool expected_fail = false;
  Json params;  // audit-specific, validated by the dispatcher
};

struct SweepSpec {
  std::string parameter;  // currently: datum.amplitude
  std::vector<double> values;
};

struct ExperimentConfig {
  int version = 1;
  std::string label = "run";
  bool deterministic = true;
  OperatorSpec op;
  std::vector<PowerTerm> terms;
  DatumSpec datum;
  TimeGrid time;
  SnapshotSpec snapshots;
  std::vector<AuditSpec> audits;
  std::optional<SweepSpec> sweep;
  std::string out_dir = "out";
  std::optional<std::string> input_trajectory;

  Json resolved;  // the fully resolved config, as persisted in manifests
};

/// Names of the audits the experiment driver can dispatch.
const std::vector<std::string>& known_audit_names();

/// Strict parse: unknown keys are fatal, the schema is versioned.
ExperimentConfig parse_config(const Json& j, bool strict = true);

/// Reads a config file; a manifest (object with a "config" key) re-runs the
/// embedded resolved config.
ExperimentConfig load_config_file(const std::string& path, bool strict = true);

std::vector<double> snapshot_times(const ExperimentConfig& cfg);

}  // namespace fpm
