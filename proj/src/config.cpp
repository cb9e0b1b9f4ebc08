#include "fpmlab/config.hpp"

#include <fstream>
#include <algorithm>
#include <set>

namespace fpm {

namespace {

void expect_keys(const Json& obj, const std::string& where,
                 const std::set<std::string>& allowed, bool strict) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  if (!strict) return;
  for (const auto& el : obj.items())
    if (!allowed.count(el.key()))
      throw ConfigError(where + ": unknown key '" + el.key() + "'");
}

double need_number(const Json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  if (!obj[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return obj[key].get<double>();
}

double number_or(const Json& obj, const std::string& key, double fallback) {
  return obj.contains(key) ? obj[key].get<double>() : fallback;
}

}  // namespace

const std::vector<std::string>& known_audit_names() {
  static const std::vector<std::string> names = {
      "benilan_crandall", "weighted_l1_identity", "weighted_l1_reverse",
      "lp_nonexpansion",  "contraction",
      "minimal_monotone", "delta_bracket",        "absolute_upper",  "smoothing",
      "ghp_upper",        "ghp_lower",            "supersolution",   "small_data_decay",
      "boundary_exponent", "harnack",             "propagation",     "kernel_bounds",
      "kernel_form",      "eigen_accuracy",       "self_convergence"};
  return names;
}

ExperimentConfig parse_config(const Json& j, bool strict) {
  ExperimentConfig cfg;
  expect_keys(j, "config",
              {"version", "label", "deterministic", "operator", "nonlinearity", "datum",
               "time", "snapshots", "audits", "sweep", "output", "input_trajectory"},
              strict);
  if (!j.contains("version") || !j["version"].is_number_integer())
    throw ConfigError("config: missing integer 'version'");
  cfg.version = j["version"].get<int>();
  if (cfg.version != 1) throw ConfigError("config: unsupported version");
  if (j.contains("label")) cfg.label = j["label"].get<std::string>();
  if (j.contains("deterministic")) cfg.deterministic = j["deterministic"].get<bool>();
  if (!cfg.deterministic) throw ConfigError("config: runs are always deterministic");

  if (!j.contains("operator")) throw ConfigError("config: missing 'operator'");
  const Json& opj = j["operator"];
  expect_keys(opj, "operator", {"kind", "s", "a", "b", "n"}, strict);
  if (!opj.contains("kind")) throw ConfigError("operator: missing 'kind'");
  cfg.op.kind = operator_kind_from_string(opj["kind"].get<std::string>());
  cfg.op.s = number_or(opj, "s", cfg.op.kind == OperatorKind::classical ? 1.0 : 0.5);
  cfg.op.grid.a = need_number(opj, "operator", "a");
  cfg.op.grid.b = need_number(opj, "operator", "b");
  if (!opj.contains("n") || !opj["n"].is_number_integer())
    throw ConfigError("operator: missing integer 'n'");
  cfg.op.grid.n = opj["n"].get<int>();
  cfg.op.validate();

  if (!j.contains("nonlinearity")) throw ConfigError("config: missing 'nonlinearity'");
  const Json& fj = j["nonlinearity"];
  expect_keys(fj, "nonlinearity", {"terms"}, strict);
  if (!fj.contains("terms") || !fj["terms"].is_array() || fj["terms"].empty())
    throw ConfigError("nonlinearity: needs a non-empty 'terms' array");
  for (const Json& t : fj["terms"]) {
    expect_keys(t, "nonlinearity.terms[]", {"coeff", "exponent"}, strict);
    cfg.terms.push_back({need_number(t, "term", "coeff"), need_number(t, "term", "exponent")});
  }
  PowerSum{cfg.terms};  // validates coefficients and exponents

  if (!j.contains("datum")) throw ConfigError("config: missing 'datum'");
  const Json& dj = j["datum"];
  if (!dj.contains("family")) throw ConfigError("datum: missing 'family'");
  cfg.datum.family = dj["family"].get<std::string>();
  if (cfg.datum.family == "bump") {
    expect_keys(dj, "datum", {"family", "amplitude", "center", "width"}, strict);
    cfg.datum.amplitude = need_number(dj, "datum", "amplitude");
    cfg.datum.center = need_number(dj, "datum", "center");
    cfg.datum.width = need_number(dj, "datum", "width");
    if (!(cfg.datum.width > 0.0)) throw ConfigError("datum: bump width must be positive");
  } else if (cfg.datum.family == "eigen_power") {
    expect_keys(dj, "datum", {"family", "amplitude", "power"}, strict);
    cfg.datum.amplitude = need_number(dj, "datum", "amplitude");
    cfg.datum.power = need_number(dj, "datum", "power");
  } else if (cfg.datum.family == "singular") {
    expect_keys(dj, "datum", {"family", "amplitude", "exponent", "cap"}, strict);
    cfg.datum.amplitude = need_number(dj, "datum", "amplitude");
    cfg.datum.exponent = need_number(dj, "datum", "exponent");
    cfg.datum.cap = need_number(dj, "datum", "cap");
  } else if (cfg.datum.family == "raw") {
    expect_keys(dj, "datum", {"family", "values"}, strict);
    if (!dj.contains("values") || !dj["values"].is_array())
      throw ConfigError("datum: raw family needs a 'values' array");
    for (const Json& v : dj["values"]) cfg.datum.values.push_back(v.get<double>());
  } else {
    throw ConfigError("datum: unknown family '" + cfg.datum.family +
                      "' (bump|eigen_power|singular|raw)");
  }
  if (!(cfg.datum.amplitude >= 0.0)) throw ConfigError("datum: amplitude must be nonnegative");

  if (!j.contains("time")) throw ConfigError("config: missing 'time'");
  const Json& tj = j["time"];
  expect_keys(tj, "time", {"t_final", "steps"}, strict);
  cfg.time.t_final = need_number(tj, "time", "t_final");
  if (!tj.contains("steps") || !tj["steps"].is_number_integer())
    throw ConfigError("time: missing integer 'steps'");
  cfg.time.steps = tj["steps"].get<int>();
  cfg.time.validate();

  if (j.contains("snapshots")) {
    const Json& sj = j["snapshots"];
    expect_keys(sj, "snapshots", {"mode", "stride", "times"}, strict);
    if (sj.contains("mode")) cfg.snapshots.mode = sj["mode"].get<std::string>();
    if (sj.contains("stride")) cfg.snapshots.stride = sj["stride"].get<int>();
    if (sj.contains("times"))
      for (const Json& v : sj["times"]) cfg.snapshots.times.push_back(v.get<double>());
    if (cfg.snapshots.mode != "every_step" && cfg.snapshots.mode != "stride" &&
        cfg.snapshots.mode != "list")
      throw ConfigError("snapshots: unknown mode '" + cfg.snapshots.mode + "'");
    if (cfg.snapshots.mode == "stride" && cfg.snapshots.stride < 1)
      throw ConfigError("snapshots: stride must be >= 1");
    if (cfg.snapshots.mode == "list" && cfg.snapshots.times.empty())
      throw ConfigError("snapshots: list mode needs 'times'");
  }

  if (j.contains("audits")) {
    if (!j["audits"].is_array()) throw ConfigError("config: 'audits' must be an array");
    for (const Json& a : j["audits"]) {
      if (!a.is_object() || !a.contains("name"))
        throw ConfigError("audits[]: each entry needs a 'name'");
      AuditSpec spec;
      spec.name = a["name"].get<std::string>();
      const auto& known = known_audit_names();
      if (std::find(known.begin(), known.end(), spec.name) == known.end()) {
        std::string names;
        for (const auto& k : known) names += (names.empty() ? "" : " ") + k;
        throw ConfigError("audits[]: unknown audit '" + spec.name + "'; available: " + names);
      }
      spec.params = Json::object();
      for (const auto& el : a.items()) {
        if (el.key() == "name") continue;
        if (el.key() == "expected_fail")
          spec.expected_fail = el.value().get<bool>();
        else
          spec.params[el.key()] = el.value();
      }
      cfg.audits.push_back(std::move(spec));
    }
  }

  if (j.contains("sweep")) {
    const Json& sw = j["sweep"];
    expect_keys(sw, "sweep", {"parameter", "values"}, strict);
    SweepSpec sweep;
    if (!sw.contains("parameter")) throw ConfigError("sweep: missing 'parameter'");
    sweep.parameter = sw["parameter"].get<std::string>();
    if (sweep.parameter != "datum.amplitude")
      throw ConfigError("sweep: only 'datum.amplitude' is supported");
    if (!sw.contains("values") || !sw["values"].is_array() || sw["values"].size() < 2)
      throw ConfigError("sweep: needs >= 2 'values'");
    for (const Json& v : sw["values"]) sweep.values.push_back(v.get<double>());
    cfg.sweep = std::move(sweep);
  }

  if (j.contains("output")) {
    const Json& oj = j["output"];
    expect_keys(oj, "output", {"dir"}, strict);
    if (oj.contains("dir")) cfg.out_dir = oj["dir"].get<std::string>();
  }
  if (j.contains("input_trajectory"))
    cfg.input_trajectory = j["input_trajectory"].get<std::string>();

  cfg.resolved = j;
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("config parse error in '" + path + "': " + e.what());
  }
  if (j.is_object() && j.contains("config")) return parse_config(j["config"], strict);
  return parse_config(j, strict);
}

std::vector<double> snapshot_times(const ExperimentConfig& cfg) {
  if (cfg.snapshots.mode == "every_step") return cfg.time.all_step_times();
  if (cfg.snapshots.mode == "stride") return cfg.time.strided_times(cfg.snapshots.stride);
  return cfg.snapshots.times;
}

}  // namespace fpm
