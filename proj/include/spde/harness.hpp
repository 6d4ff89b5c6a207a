#pragma once

#include "spde/ensemble.hpp"
#include "spde/registry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace spde::harness {

using Json = nlohmann::json;

struct CheckRecord {
  std::string name;
  double theoretical = 0.0;
  double empirical = 0.0;
  double se = 0.0;
  bool pass = false;
  std::string note;
};

struct RunReport {
  std::string scenario;
  std::string target;
  Json config;                          // fully resolved, re-runnable
  std::vector<CheckRecord> checks;
  Json extra = Json::object();          // target-specific blocks (certificate, ratios, ...)
  std::optional<std::string> failure;   // mid-run error, checks so far are kept
  double wall_seconds = 0.0;
  std::string version;
  std::vector<std::string> artifacts;

  bool pass() const;
  Json to_json() const;
};

/// Targets accepted in the "target" key.
std::vector<std::string> targets();

/// Validates keys and fills defaults; schema errors list every offending key.
Json resolve_config(const Json& config);

struct RunOptions {
  EnsembleOptions ensemble;
  bool write_artifacts = true;
  std::string output_dir;  // overrides the config when set
};

RunReport run_scenario(const Json& config, const RunOptions& opt = {});

struct SuiteReport {
  std::string suite;
  std::vector<RunReport> runs;
  bool nothing_to_run = false;

  bool pass() const;
  Json to_json() const;
};

std::vector<std::string> suite_names();
/// Curated scenario configs of a suite; unknown names raise an error listing the available ones.
std::vector<Json> suite_configs(const std::string& name);
SuiteReport run_suite(const std::string& name, const RunOptions& opt = {});
/// Every *.json file of a directory, in name order.
SuiteReport run_directory(const std::string& dir, const RunOptions& opt = {});

/// JSON number, or "inf" / "-inf" / "nan" for non-finite values.
Json number(double v);
/// Closed-form E|X(T)|^q for the scalar Gaussian law N(m, v).
double gaussian_abs_moment(double m, double v, double q);

std::string version();

}  // namespace spde::harness
