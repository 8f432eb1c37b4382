// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

// qdlab command line: run, sweep, validate, report.
// Exit status is 0 only when every asserted invariant passed, 1 when one
// failed and 2 on errors.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qdlab/qdlab.h"

namespace {

int report_error(qdlab_status st) {
  std::fprintf(stderr, "qdlab: %s: %s\n", qdlab_status_string(st), qdlab_last_error());
  return 2;
}

int finish(qdlab_result* r, bool json) {
  char* text = nullptr;
  const qdlab_status st = json ? qdlab_result_json(r, &text) : qdlab_result_summary(r, &text);
  if (st != QDLAB_OK) {
    qdlab_result_free(r);
    return report_error(st);
  }
  std::fputs(text, stdout);
  if (json) std::fputc('\n', stdout);
  qdlab_string_free(text);
  const int passed = qdlab_result_passed(r);
  qdlab_result_free(r);
  return passed ? 0 : 1;
}

int load(const std::string& path, const std::string& output, qdlab_config** cfg) {
  qdlab_status st = qdlab_config_load(path.c_str(), cfg);
  if (st != QDLAB_OK) return report_error(st);
  if (!output.empty() && (st = qdlab_config_set_output(*cfg, output.c_str())) != QDLAB_OK) {
    qdlab_config_free(*cfg);
    return report_error(st);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qdlab: quantum diffusion experiments on the Anderson lattice"};
  app.set_version_flag("--version", std::string(qdlab_version()));
  app.require_subcommand(1);
  int workers = 0;
  bool json = false;
  app.add_option("-w,--workers", workers, "Worker threads (default: QDLAB_WORKERS or all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--json", json, "Print the full result as JSON");

  std::string config_path, output, axis;
  std::vector<double> values;
  bool no_persist = false;

  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("-c,--config", config_path, "Configuration file (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", output, "Override the output directory");
  run->add_flag("--no-persist", no_persist, "Do not write records");

  auto* sw = app.add_subcommand("sweep", "Run an experiment over a parameter axis");
  sw->add_option("-c,--config", config_path, "Configuration file (JSON)")->required()->check(CLI::ExistingFile);
  sw->add_option("--axis", axis, "lambda, L, kappa or t")
      ->required()
      ->check(CLI::IsMember({"lambda", "L", "kappa", "t"}));
  sw->add_option("--values", values, "Comma-separated values")->delimiter(',');
  sw->add_option("-o,--output", output, "Override the output directory");
  sw->add_flag("--no-persist", no_persist, "Do not write records");

  auto* val = app.add_subcommand("validate", "Run the invariant suite");

  std::string dir;
  auto* rep = app.add_subcommand("report", "Summarize stored run records");
  rep->add_option("dir", dir, "Output directory holding runs.jsonl")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  if (workers > 0) {
    if (const qdlab_status st = qdlab_set_workers(workers); st != QDLAB_OK) return report_error(st);
  }

  qdlab_result* result = nullptr;
  qdlab_status st = QDLAB_OK;
  if (*run || *sw) {
    qdlab_config* cfg = nullptr;
    if (int rc = load(config_path, output, &cfg); rc != 0) return rc;
    st = *run ? qdlab_run(cfg, no_persist ? 0 : 1, &result)
              : qdlab_sweep(cfg, axis.c_str(), values.data(), values.size(), no_persist ? 0 : 1, &result);
    qdlab_config_free(cfg);
  } else if (*val) {
    st = qdlab_validate(&result);
  } else if (*rep) {
    st = qdlab_report(dir.c_str(), &result);
  }
  if (st != QDLAB_OK) return report_error(st);
  return finish(result, json);
}
