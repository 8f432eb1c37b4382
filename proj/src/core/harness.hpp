// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

// Experiment orchestration: JSON configuration with defaults and derived
// scaling fields, seeded runs of every experiment kind, parameter sweeps,
// the invariant suite and summary reports over stored records.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/common.hpp"

namespace qdlab::harness {

using Json = nlohmann::json;

inline constexpr const char* kExperimentKinds[] = {
    "msd", "kinetic-compare", "diffusive-compare", "graphs", "dos", "boltzmann", "rung", "crossing"};

/// Validated configuration with every default filled in. Derived fields:
/// epsilon = lambda^{2 + kappa/2}, kinetic time lambda^2 t, diffusive time
/// lambda^{kappa + 2} t, for t the last sampled time.
class ExperimentConfig {
 public:
  /// Throws kConfigInvalid on unknown keys, wrong types or out-of-range values.
  static ExperimentConfig parse(const Json& raw);
  static ExperimentConfig parse_text(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);

  const Json& resolved() const { return resolved_; }
  const std::string& kind() const { return kind_; }
  /// 16 hex digits over the canonical resolved config.
  std::string hash() const;
  std::filesystem::path output() const;

  /// Copy with a sweep axis (lambda, L, kappa, t) set to a value.
  ExperimentConfig with_axis(const std::string& axis, double value) const;
  /// Copy with the output directory replaced.
  ExperimentConfig with_output(const std::filesystem::path& dir) const;

 private:
  Json resolved_;
  std::string kind_;
};

struct InvariantResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunRecord {
  std::string config_hash;
  Json config;
  std::string kind;
  /// Per-observation rows; reproducible bit for bit for a given build.
  Json rows = Json::array();
  Json summary = Json::object();
  std::vector<InvariantResult> invariants;
  double wall_clock = 0.0;
  std::string software_version;
  std::string rng_algorithm;
  /// Files written next to the record.
  std::vector<std::string> artifacts;

  bool passed() const;
  /// The record without rows, as stored in runs.jsonl.
  Json header() const;
  Json to_json() const;
};

/// Runs an experiment and persists the record under config.output():
/// runs.jsonl (appended), <kind>-<hash>.jsonl rows and CSV exports.
RunRecord run(const ExperimentConfig& config, bool persist = true);

struct SweepResult {
  std::string axis;
  std::vector<double> values;
  std::vector<RunRecord> records;
  /// One row per value: value, config hash, primary metric, passed.
  Json table = Json::array();
  /// Trend statistics of the primary metric.
  Json summary = Json::object();

  bool passed() const;
  Json to_json() const;
};

/// Axis is one of lambda, L, kappa, t. An empty value list gives an empty
/// summary.
SweepResult sweep(const ExperimentConfig& base, const std::string& axis,
                  const std::vector<double>& values, bool persist = true);

struct ValidationReport {
  std::vector<InvariantResult> checks;
  double wall_clock = 0.0;

  bool passed() const;
  Json to_json() const;
};

/// Fast invariant suite over every module.
ValidationReport validate();

struct Report {
  std::vector<Json> records;
  std::string table;
  bool passed = true;
};

/// Reads <dir>/runs.jsonl and writes <dir>/report.csv.
Report report(const std::filesystem::path& dir);

/// Fixed-width text table of a sweep or a report.
std::string format_table(const Json& rows, const std::vector<std::string>& columns);

}  // namespace qdlab::harness
