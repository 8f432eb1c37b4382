// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>

#include "core/common.hpp"
#include "core/permutation.hpp"

using namespace qdlab;
using namespace qdlab::graphs;

namespace {

int degree_direct(const std::vector<int>& s) {
  int d = 0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    if (s[i + 1] != s[i] + 1 && s[i + 1] != s[i] - 1) ++d;
  return d;
}

std::map<int, std::uint64_t> counts_direct(int n) {
  std::vector<int> s(n);
  std::iota(s.begin(), s.end(), 1);
  std::map<int, std::uint64_t> c;
  do ++c[degree_direct(s)];
  while (std::next_permutation(s.begin(), s.end()));
  return c;
}

}  // namespace

TEST_CASE("degree of small permutations") {
  CHECK(PermutationPairing::identity(5).degree() == 0);
  CHECK(PermutationPairing::reversal(5).degree() == 0);
  CHECK(PermutationPairing({1, 3, 2}).degree() == 1);
  CHECK(PermutationPairing({2, 4, 1, 3}).degree() == 3);
  CHECK(PermutationPairing({1, 3, 2}).index_class(1) == IndexClass::kOther);
  CHECK(PermutationPairing({1, 3, 2}).index_class(2) == IndexClass::kAntiladder);
  CHECK(PermutationPairing({3, 1, 2}).to_string() == "3 1 2");
  CHECK(PermutationPairing::identity(0).degree() == 0);
  CHECK_THROWS_AS(PermutationPairing({1, 1, 2}), qdlab::Error);
}

TEST_CASE("S_3 histogram") {
  const auto c = count_by_degree(3);
  CHECK(c.at(0) == 2);
  CHECK(c.at(1) == 4);
  CHECK(c.count(2) == 0);
}

TEST_CASE("exhaustive counts: n! and direct enumeration") {
  std::uint64_t fact = 1;
  for (int n = 1; n <= 8; ++n) {
    fact *= n;
    const auto c = count_by_degree(n);
    std::uint64_t total = 0;
    for (const auto& [d, k] : c) total += k;
    CHECK(total == fact);
    if (n <= 7) CHECK(c == counts_direct(n));
  }
}

TEST_CASE("degree one count is 6n - 14") {
  // Degree one: two monotone runs of +-1 steps glued at a single break.
  for (int n = 3; n <= 9; ++n) CHECK(count_by_degree(n).at(1) == static_cast<std::uint64_t>(6 * n - 14));
  // Hence N_{n,1} exceeds 2 (2n) = 4n from n = 8 on.
  CHECK(count_by_degree(7).at(1) <= degree_count_bound(7, 1));
  CHECK(count_by_degree(8).at(1) > degree_count_bound(8, 1));
}

TEST_CASE("2 (2n)^D bound holds for every bin up to n = 7") {
  for (int n = 1; n <= 7; ++n)
    for (const auto& [d, k] : count_by_degree(n)) CHECK(static_cast<double>(k) <= degree_count_bound(n, d));
}

TEST_CASE("degree symmetries") {
  for (int n = 1; n <= 6; ++n)
    for (const auto& s : all_permutations(n)) {
      CHECK(s.inverse().degree() == s.degree());
      CHECK(s.reverse_values().degree() == s.degree());
      CHECK(s.reverse_positions().degree() == s.degree());
      CHECK(degree_direct(s.one_line()) == s.degree());
    }
}

TEST_CASE("boundary convention") {
  CHECK(PermutationPairing::identity(4).degree_with_boundary() == 0);
  // Reversal is antiladder inside but breaks at both ends.
  CHECK(PermutationPairing::reversal(4).degree_with_boundary() == 2);
}

TEST_CASE("enumeration and sampling") {
  const auto all = all_permutations(4);
  CHECK(all.size() == 24);
  CHECK(std::is_sorted(all.begin(), all.end(),
                       [](const auto& a, const auto& b) { return a.one_line() < b.one_line(); }));
  const auto a = sample_permutations(5, 50, 7), b = sample_permutations(5, 50, 7);
  CHECK(a == b);
  CHECK(a.size() == 50);
}
