// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <set>

#include "core/disorder.hpp"

using namespace qdlab;
using namespace qdlab::disorder;

TEST_CASE("realizations are reproducible and indexed") {
  const DisorderSpec spec{DisorderKind::kGaussian, 0.3, 17};
  const auto a = sample_potential(spec, 8, 4);
  const auto b = sample_potential(spec, 8, 4);
  const auto c = sample_potential(spec, 8, 5);
  CHECK(a.values == b.values);
  CHECK(a.hash() == b.hash());
  CHECK(a.values != c.values);
  CHECK(a.hash() != c.hash());
  CHECK(a.values.size() == 512);
  CHECK(a.derived_seed == derive_seed(17, 4));
}

TEST_CASE("derived seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 8; ++m)
    for (std::uint64_t i = 0; i < 256; ++i) seen.insert(derive_seed(m, i));
  CHECK(seen.size() == 8 * 256);
}

TEST_CASE("Bernoulli potential is exactly +-1") {
  const auto r = sample_potential({DisorderKind::kSymmetricBernoulli, 1.0, 2}, 8, 0);
  for (double v : r.values) CHECK(std::abs(v) == 1.0);
}

TEST_CASE("moments match m1 = m3 = m5 = 0, m2 = 1") {
  for (auto kind : {DisorderKind::kGaussian, DisorderKind::kSymmetricBernoulli}) {
    const auto rep = moment_report({kind, 1.0, 9}, 16, 16);
    for (int k : {1, 3, 5}) CHECK(std::abs(rep.moment[k]) < 5 * rep.stderr_[k] + 1e-12);
    CHECK(std::abs(rep.moment[2] - 1.0) < 5 * rep.stderr_[2] + 1e-12);
    const double m4 = kind == DisorderKind::kGaussian ? 3.0 : 1.0;
    CHECK(std::abs(rep.moment[4] - m4) < 5 * rep.stderr_[4] + 1e-12);
    CHECK(std::abs(rep.neighbor_cov) < 5 * rep.neighbor_cov_stderr);
  }
}

TEST_CASE("disorder names round trip") {
  CHECK(parse_kind("gaussian") == DisorderKind::kGaussian);
  CHECK(parse_kind(to_string(DisorderKind::kSymmetricBernoulli)) == DisorderKind::kSymmetricBernoulli);
  CHECK_THROWS_AS(parse_kind("uniform"), Error);
}
