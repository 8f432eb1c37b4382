// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "core/compare.hpp"

using namespace qdlab;
using namespace qdlab::compare;

TEST_CASE("coarse L1 sums differences per cell") {
  std::vector<double> a(64, 0.0), b(64, 0.0);
  a[0] = 0.5;
  b[1] = 0.5;  // same 2x2x2 cell as index 0
  a[63] = 0.25;
  CHECK(coarse_l1(a, b, 4, 2) == doctest::Approx(0.25));
  CHECK(coarse_l1(a, b, 4, 4) == doctest::Approx(1.25));
  CHECK_THROWS_AS(coarse_l1(a, b, 4, 3), Error);
}

TEST_CASE("kinetic comparison at zero kinetic time") {
  KineticCompareConfig c;
  c.side = 8;
  c.count = 2;
  c.kinetic_time = 0.0;
  c.coarse = 2;
  const auto r = kinetic_compare(c);
  CHECK(r.l1 < 1e-12);
  CHECK(r.l1_fine < 1e-12);
  CHECK(r.l1_initial < 1e-12);
  CHECK(r.realization_hashes.size() == 2);
}

TEST_CASE("kinetic comparison marginals are probability vectors") {
  KineticCompareConfig c;
  c.side = 8;
  c.count = 3;
  c.coarse = 2;
  c.lambda = 0.5;
  const auto r = kinetic_compare(c);
  double sw = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < r.wigner_marginal.size(); ++i) {
    sw += r.wigner_marginal[i];
    sb += r.boltzmann_marginal[i];
  }
  CHECK(sw == doctest::Approx(1.0));
  CHECK(sb == doctest::Approx(1.0));
  CHECK(r.l1 > 0.0);
  CHECK(r.l1 <= 2.0);
  CHECK(r.t == doctest::Approx(4.0));
}
