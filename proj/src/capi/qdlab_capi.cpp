// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "qdlab/qdlab.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/harness.hpp"
#include "core/parallel.hpp"

struct qdlab_config {
  qdlab::harness::ExperimentConfig config;
};

struct qdlab_result {
  qdlab::harness::Json payload;
  std::string summary;
  bool passed = false;
};

namespace {

using qdlab::harness::Json;

thread_local std::string g_last_error;

qdlab_status map(qdlab::ErrorCode code) {
  using qdlab::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return QDLAB_ERR_INVALID_ARGUMENT;
    case ErrorCode::kConfigInvalid: return QDLAB_ERR_CONFIG_INVALID;
    case ErrorCode::kEmptyShell: return QDLAB_ERR_EMPTY_SHELL;
    case ErrorCode::kToleranceExceeded: return QDLAB_ERR_TOLERANCE_EXCEEDED;
    case ErrorCode::kQuadratureDivergence: return QDLAB_ERR_QUADRATURE_DIVERGENCE;
    case ErrorCode::kCflViolation: return QDLAB_ERR_CFL_VIOLATION;
    case ErrorCode::kExtrapolationUnstable: return QDLAB_ERR_EXTRAPOLATION_UNSTABLE;
    case ErrorCode::kBoundViolated: return QDLAB_ERR_BOUND_VIOLATED;
    case ErrorCode::kInsufficientSamples: return QDLAB_ERR_INSUFFICIENT_SAMPLES;
    case ErrorCode::kResourceExceeded: return QDLAB_ERR_RESOURCE_EXCEEDED;
    case ErrorCode::kGridMismatch: return QDLAB_ERR_GRID_MISMATCH;
    case ErrorCode::kIo: return QDLAB_ERR_IO;
  }
  return QDLAB_ERR_INTERNAL;
}

template <class F>
qdlab_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return QDLAB_OK;
  } catch (const qdlab::Error& e) {
    g_last_error = e.what();
    return map(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return QDLAB_ERR_RESOURCE_EXCEEDED;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QDLAB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return QDLAB_ERR_INTERNAL;
  }
}

qdlab_status null_argument(const char* what) {
  g_last_error = std::string(what) + " must not be null";
  return QDLAB_ERR_INVALID_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

std::string describe_run(const qdlab::harness::RunRecord& r) {
  std::ostringstream os;
  os << r.kind << " " << r.config_hash << "  (" << r.wall_clock << " s)\n";
  for (auto it = r.summary.begin(); it != r.summary.end(); ++it) {
    if (it->is_number() || it->is_boolean() || it->is_string()) os << "  " << it.key() << " = " << it->dump() << '\n';
  }
  for (const auto& i : r.invariants)
    os << (i.passed ? "  PASS " : "  FAIL ") << i.name << (i.detail.empty() ? "" : ": " + i.detail) << '\n';
  return os.str();
}

}  // namespace

extern "C" {

const char* qdlab_version(void) { return qdlab::kSoftwareVersion; }

const char* qdlab_status_string(qdlab_status status) {
  switch (status) {
    case QDLAB_OK: return "ok";
    case QDLAB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case QDLAB_ERR_CONFIG_INVALID: return "invalid configuration";
    case QDLAB_ERR_EMPTY_SHELL: return "empty energy shell";
    case QDLAB_ERR_TOLERANCE_EXCEEDED: return "tolerance exceeded";
    case QDLAB_ERR_QUADRATURE_DIVERGENCE: return "quadrature divergence";
    case QDLAB_ERR_CFL_VIOLATION: return "CFL violation";
    case QDLAB_ERR_EXTRAPOLATION_UNSTABLE: return "extrapolation unstable";
    case QDLAB_ERR_BOUND_VIOLATED: return "bound violated";
    case QDLAB_ERR_INSUFFICIENT_SAMPLES: return "insufficient samples";
    case QDLAB_ERR_RESOURCE_EXCEEDED: return "resource exceeded";
    case QDLAB_ERR_GRID_MISMATCH: return "grid mismatch";
    case QDLAB_ERR_IO: return "i/o error";
    case QDLAB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* qdlab_last_error(void) { return g_last_error.c_str(); }

qdlab_status qdlab_set_workers(int workers) {
  if (workers < 0) {
    g_last_error = "worker count must be nonnegative";
    return QDLAB_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] { qdlab::set_worker_count(workers); });
}

int qdlab_get_workers(void) { return qdlab::worker_count(); }

qdlab_status qdlab_config_load(const char* path, qdlab_config** out) {
  if (path == nullptr) return null_argument("path");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new qdlab_config{qdlab::harness::ExperimentConfig::load(path)}; });
}

qdlab_status qdlab_config_parse(const char* json_text, qdlab_config** out) {
  if (json_text == nullptr) return null_argument("json_text");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new qdlab_config{qdlab::harness::ExperimentConfig::parse_text(json_text)}; });
}

qdlab_status qdlab_config_set_output(qdlab_config* config, const char* dir) {
  if (config == nullptr) return null_argument("config");
  if (dir == nullptr) return null_argument("dir");
  return guarded([&] { config->config = config->config.with_output(dir); });
}

qdlab_status qdlab_config_json(const qdlab_config* config, char** out) {
  if (config == nullptr) return null_argument("config");
  if (out == nullptr) return null_argument("out");
  return guarded([&] { *out = copy_string(config->config.resolved().dump(2)); });
}

qdlab_status qdlab_config_hash(const qdlab_config* config, char** out) {
  if (config == nullptr) return null_argument("config");
  if (out == nullptr) return null_argument("out");
  return guarded([&] { *out = copy_string(config->config.hash()); });
}

void qdlab_config_free(qdlab_config* config) { delete config; }

qdlab_status qdlab_run(const qdlab_config* config, int persist, qdlab_result** out) {
  if (config == nullptr) return null_argument("config");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const auto rec = qdlab::harness::run(config->config, persist != 0);
    *out = new qdlab_result{rec.to_json(), describe_run(rec), rec.passed()};
  });
}

qdlab_status qdlab_sweep(const qdlab_config* config, const char* axis, const double* values,
                         size_t count, int persist, qdlab_result** out) {
  if (config == nullptr) return null_argument("config");
  if (axis == nullptr) return null_argument("axis");
  if (values == nullptr && count > 0) return null_argument("values");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const std::vector<double> v(values, values + count);
    const auto s = qdlab::harness::sweep(config->config, axis, v, persist != 0);
    std::ostringstream os;
    const std::string metric = s.summary.value("metric", "");
    os << qdlab::harness::format_table(s.table, {"value", "config_hash", metric, "passed"});
    for (auto it = s.summary.begin(); it != s.summary.end(); ++it)
      if (it->is_boolean()) os << it.key() << " = " << it->dump() << '\n';
    for (const auto& r : s.records)
      for (const auto& i : r.invariants)
        if (!i.passed) os << "FAIL " << r.config_hash << ' ' << i.name << ": " << i.detail << '\n';
    *out = new qdlab_result{s.to_json(), os.str(), s.passed()};
  });
}

qdlab_status qdlab_validate(qdlab_result** out) {
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const auto rep = qdlab::harness::validate();
    std::ostringstream os;
    for (const auto& c : rep.checks)
      os << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
    *out = new qdlab_result{rep.to_json(), os.str(), rep.passed()};
  });
}

qdlab_status qdlab_report(const char* dir, qdlab_result** out) {
  if (dir == nullptr) return null_argument("dir");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const auto rep = qdlab::harness::report(dir);
    Json recs = Json::array();
    for (const auto& r : rep.records) recs.push_back(r);
    *out = new qdlab_result{Json{{"records", recs}, {"passed", rep.passed}}, rep.table, rep.passed};
  });
}

int qdlab_result_passed(const qdlab_result* result) { return result != nullptr && result->passed ? 1 : 0; }

qdlab_status qdlab_result_json(const qdlab_result* result, char** out) {
  if (result == nullptr) return null_argument("result");
  if (out == nullptr) return null_argument("out");
  return guarded([&] { *out = copy_string(result->payload.dump()); });
}

qdlab_status qdlab_result_summary(const qdlab_result* result, char** out) {
  if (result == nullptr) return null_argument("result");
  if (out == nullptr) return null_argument("out");
  return guarded([&] { *out = copy_string(result->summary); });
}

void qdlab_result_free(qdlab_result* result) { delete result; }

void qdlab_string_free(char* s) { std::free(s); }

}  // extern "C"
