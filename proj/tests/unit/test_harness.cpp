// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "core/harness.hpp"

using namespace qdlab;
using namespace qdlab::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qdlab-unit-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

const char* kFree = R"({"kind": "msd", "lambda": 0.0, "side": 32, "ensemble": 1,
  "times": {"t_end": 8, "step": 0.5}, "msd": {"windows": [[2, 8]]}})";

}  // namespace

TEST_CASE("defaults, derived scaling fields and hashing") {
  const auto c = ExperimentConfig::parse_text(R"({"kind": "msd", "lambda": 0.5, "kappa": 2})");
  const auto& r = c.resolved();
  CHECK(r["side"] == 32);
  CHECK(r["disorder"] == "gaussian");
  CHECK(r["derived"]["epsilon"].get<double>() == doctest::Approx(std::pow(0.5, 3.0)));
  CHECK(r["derived"]["kinetic_time"].get<double>() == doctest::Approx(0.25 * 10.0));
  CHECK(r["derived"]["diffusive_time"].get<double>() == doctest::Approx(std::pow(0.5, 4.0) * 10.0));
  CHECK_FALSE(r.contains("graphs"));
  CHECK(c.hash().size() == 16);
  CHECK(c.hash() == ExperimentConfig::parse(r).hash());
  CHECK(c.hash() != ExperimentConfig::parse_text(R"({"kind": "msd", "lambda": 0.4})").hash());
  CHECK(c.hash() == c.with_output("/elsewhere").hash());
}

TEST_CASE("schema violations") {
  auto bad = [](const char* text) { return code_of([&] { ExperimentConfig::parse_text(text); }); };
  CHECK(bad(R"({"kind": "msd", "lamda": 0.3})") == ErrorCode::kConfigInvalid);
  CHECK(bad(R"({"kind": "msd", "side": "big"})") == ErrorCode::kConfigInvalid);
  CHECK(bad(R"({"kind": "msd", "side": 31})") == ErrorCode::kConfigInvalid);
  CHECK(bad(R"({"kind": "warp"})") == ErrorCode::kConfigInvalid);
  CHECK(bad(R"({"lambda": 0.3})") == ErrorCode::kConfigInvalid);
  CHECK(bad(R"({"kind": "msd", "graphs": {"n": 3}})") == ErrorCode::kConfigInvalid);
  CHECK(bad(R"({"kind": "graphs", "graphs": {"sampler": "sobol"}})") == ErrorCode::kConfigInvalid);
  CHECK(bad(R"({"kind": "kinetic-compare", "kinetic-compare": {"coarse": 5}})") == ErrorCode::kConfigInvalid);
  CHECK(bad(R"({"kind": "msd", "expect": {"exponent": "two"}})") == ErrorCode::kConfigInvalid);
  CHECK(bad("{not json") == ErrorCode::kConfigInvalid);
  CHECK(code_of([] { ExperimentConfig::load("/nonexistent/qdlab.json"); }) == ErrorCode::kIo);
}

TEST_CASE("free msd run: exponent 2, determinism and persistence") {
  const auto dir = scratch("run");
  const auto c = ExperimentConfig::parse_text(kFree).with_output(dir);
  const auto a = run(c);
  const auto b = run(c);
  CHECK(a.passed());
  CHECK(a.summary["exponent"].get<double>() == doctest::Approx(2.0).epsilon(0.05));
  CHECK(a.rows == b.rows);
  CHECK(a.rows[0].contains("realization_hash"));
  CHECK(a.software_version == kSoftwareVersion);
  CHECK(fs::exists(dir / "runs.jsonl"));
  CHECK(fs::exists(dir / ("msd-" + a.config_hash + ".jsonl")));
  CHECK(fs::exists(dir / ("msd-" + a.config_hash + "-series.csv")));
  const auto rep = report(dir);
  CHECK(rep.records.size() == 2);
  CHECK(rep.passed);
  CHECK(fs::exists(dir / "report.csv"));
  fs::remove_all(dir);
}

TEST_CASE("expectations become invariants") {
  auto raw = Json::parse(kFree);
  raw["expect"] = {{"exponent", {0.9, 1.1}}};
  const auto r = run(ExperimentConfig::parse(raw), false);
  CHECK_FALSE(r.passed());
  raw["expect"] = {{"missing_field", {0, 1}}};
  CHECK_FALSE(run(ExperimentConfig::parse(raw), false).passed());
}

TEST_CASE("sweeps") {
  const auto dos = ExperimentConfig::parse_text(R"({"kind": "dos"})");
  const auto empty = sweep(dos, "L", {}, false);
  CHECK(empty.records.empty());
  CHECK(empty.summary.empty());
  const auto s = sweep(dos, "L", {16, 24, 32}, false);
  CHECK(s.records.size() == 3);
  CHECK(s.summary["metric"] == "phi_1");
  CHECK(s.summary["diffs_shrinking"].get<bool>());
  CHECK(code_of([&] { sweep(dos, "mass", {1.0}, false); }) == ErrorCode::kConfigInvalid);
  CHECK(code_of([&] { sweep(dos, "L", {16.5}, false); }) == ErrorCode::kConfigInvalid);
  const auto g = ExperimentConfig::parse_text(R"({"kind": "graphs", "lambda": 0.5})");
  CHECK(g.with_axis("lambda", 0.25).resolved()["graphs"]["t"].get<double>() == doctest::Approx(16.0));
}

TEST_CASE("resource budget") {
  ::setenv("QDLAB_MEMORY_MB", "1", 1);
  const auto c = ExperimentConfig::parse_text(R"({"kind": "msd", "side": 128})");
  CHECK(code_of([&] { run(c, false); }) == ErrorCode::kResourceExceeded);
  ::unsetenv("QDLAB_MEMORY_MB");
}

TEST_CASE("every kind runs at toy size") {
  const char* configs[] = {
      R"({"kind": "dos", "side": 16})",
      R"({"kind": "kinetic-compare", "lambda": 0.5, "side": 8, "ensemble": 2, "kinetic-compare": {"coarse": 2}})",
      R"({"kind": "diffusive-compare", "lambda": 1.0, "side": 32, "ensemble": 2, "times": {"t_end": 8, "step": 0.5}})",
      R"({"kind": "graphs", "lambda": 0.3, "graphs": {"n": 2, "samples": 512, "replicates": 4}})",
      R"({"kind": "boltzmann", "boltzmann": {"vside": 8, "x_points": 16, "T_end": 2, "fit": [1, 2]}})",
      R"({"kind": "rung", "lambda": 0.3, "rung": {"bare_etas": [0.1, 0.01]}})",
      R"({"kind": "crossing", "crossing": {"energies": [3.0], "q_scales": [0.5], "etas": [0.3, 0.1], "ray_scales": [0.2, 0.8], "panels": 4}})",
  };
  for (const char* text : configs) {
    const auto r = run(ExperimentConfig::parse_text(text), false);
    std::string failed;
    for (const auto& i : r.invariants)
      if (!i.passed) failed += i.name + ": " + i.detail + "; ";
    CAPTURE(std::string(text));
    CAPTURE(failed);
    CHECK(r.passed());
    CHECK(r.summary.contains(r.summary["primary"].get<std::string>()));
  }
}

TEST_CASE("validation suite passes") {
  const auto v = validate();
  for (const auto& c : v.checks) {
    CAPTURE(c.name);
    CAPTURE(c.detail);
    CHECK(c.passed);
  }
}

TEST_CASE("table formatting") {
  const Json rows = Json::array({{{"a", 1}, {"b", "x"}}, {{"a", 22}}});
  const auto t = format_table(rows, {"a", "b"});
  CHECK(t == "a   b\n1   x\n22\n");
}
