// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <string>

#include "qdlab/qdlab.h"

TEST_CASE("version and status strings") {
  CHECK(std::string(qdlab_version()) == "0.1.0");
  CHECK(std::string(qdlab_status_string(QDLAB_ERR_CONFIG_INVALID)) == "invalid configuration");
}

TEST_CASE("configuration errors map to status codes") {
  qdlab_config* c = nullptr;
  CHECK(qdlab_config_parse("{\"kind\": \"msd\", \"nope\": 1}", &c) == QDLAB_ERR_CONFIG_INVALID);
  CHECK(c == nullptr);
  CHECK(std::strstr(qdlab_last_error(), "nope") != nullptr);
  CHECK(qdlab_config_parse(nullptr, &c) == QDLAB_ERR_INVALID_ARGUMENT);
  CHECK(qdlab_config_load("/nonexistent.json", &c) == QDLAB_ERR_IO);
  CHECK(qdlab_set_workers(-1) == QDLAB_ERR_INVALID_ARGUMENT);
}

TEST_CASE("run through opaque handles") {
  qdlab_config* c = nullptr;
  REQUIRE(qdlab_config_parse("{\"kind\": \"dos\", \"side\": 16}", &c) == QDLAB_OK);
  CHECK(std::string(qdlab_last_error()).empty());
  char* hash = nullptr;
  REQUIRE(qdlab_config_hash(c, &hash) == QDLAB_OK);
  CHECK(std::strlen(hash) == 16);
  qdlab_string_free(hash);
  qdlab_result* r = nullptr;
  REQUIRE(qdlab_run(c, 0, &r) == QDLAB_OK);
  CHECK(qdlab_result_passed(r) == 1);
  char* json = nullptr;
  REQUIRE(qdlab_result_json(r, &json) == QDLAB_OK);
  CHECK(std::strstr(json, "\"phi_1\"") != nullptr);
  qdlab_string_free(json);
  char* text = nullptr;
  REQUIRE(qdlab_result_summary(r, &text) == QDLAB_OK);
  CHECK(std::strstr(text, "PASS") != nullptr);
  qdlab_string_free(text);
  qdlab_result_free(r);

  const double values[] = {8, 16};
  REQUIRE(qdlab_sweep(c, "L", values, 2, 0, &r) == QDLAB_OK);
  CHECK(qdlab_result_passed(r) == 1);
  qdlab_result_free(r);
  CHECK(qdlab_sweep(c, "L", nullptr, 0, 0, &r) == QDLAB_OK);
  qdlab_result_free(r);
  qdlab_config_free(c);
}

TEST_CASE("workers") {
  REQUIRE(qdlab_set_workers(2) == QDLAB_OK);
  CHECK(qdlab_get_workers() == 2);
  REQUIRE(qdlab_set_workers(0) == QDLAB_OK);
  CHECK(qdlab_get_workers() >= 1);
}
