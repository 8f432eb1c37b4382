// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/permutation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "core/common.hpp"

namespace qdlab::graphs {
namespace {

IndexClass classify(int a, int b) {
  if (b == a + 1) return IndexClass::kLadder;
  if (b == a - 1) return IndexClass::kAntiladder;
  return IndexClass::kOther;
}

}  // namespace

PermutationPairing::PermutationPairing(std::vector<int> one_line) : sigma_(std::move(one_line)) {
  const int n = static_cast<int>(sigma_.size());
  require(n >= 0, "permutation order must be >= 0");
  std::vector<bool> seen(n + 1, false);
  for (int v : sigma_) {
    require(v >= 1 && v <= n && !seen[v], "not a permutation of 1..n");
    seen[v] = true;
  }
  for (int i = 0; i + 1 < n; ++i) {
    classes_.push_back(classify(sigma_[i], sigma_[i + 1]));
    degree_ += classes_.back() == IndexClass::kOther;
  }
}

PermutationPairing PermutationPairing::identity(int n) {
  std::vector<int> s(n);
  std::iota(s.begin(), s.end(), 1);
  return PermutationPairing(std::move(s));
}

PermutationPairing PermutationPairing::reversal(int n) {
  std::vector<int> s(n);
  for (int i = 0; i < n; ++i) s[i] = n - i;
  return PermutationPairing(std::move(s));
}

int PermutationPairing::degree_with_boundary() const {
  const int n = order();
  std::vector<int> ext(n + 2);
  ext[0] = 0;
  ext[n + 1] = n + 1;
  std::copy(sigma_.begin(), sigma_.end(), ext.begin() + 1);
  int d = 0;
  for (int i = 0; i <= n; ++i) d += classify(ext[i], ext[i + 1]) == IndexClass::kOther;
  return d;
}

PermutationPairing PermutationPairing::inverse() const {
  std::vector<int> inv(sigma_.size());
  for (std::size_t i = 0; i < sigma_.size(); ++i) inv[sigma_[i] - 1] = static_cast<int>(i) + 1;
  return PermutationPairing(std::move(inv));
}

PermutationPairing PermutationPairing::reverse_values() const {
  const int n = order();
  std::vector<int> s(sigma_);
  for (auto& v : s) v = n + 1 - v;
  return PermutationPairing(std::move(s));
}

PermutationPairing PermutationPairing::reverse_positions() const {
  std::vector<int> s(sigma_.rbegin(), sigma_.rend());
  return PermutationPairing(std::move(s));
}

std::string PermutationPairing::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < sigma_.size(); ++i) os << (i ? " " : "") << sigma_[i];
  return os.str();
}

std::map<int, std::uint64_t> count_by_degree(int n) {
  require(n >= 1 && n <= 10, "exhaustive degree count supports 1 <= n <= 10");
  std::vector<int> s(n);
  std::iota(s.begin(), s.end(), 1);
  std::map<int, std::uint64_t> hist;
  do {
    int d = 0;
    for (int i = 0; i + 1 < n; ++i) d += classify(s[i], s[i + 1]) == IndexClass::kOther;
    ++hist[d];
  } while (std::next_permutation(s.begin(), s.end()));
  return hist;
}

double degree_count_bound(int n, int D) { return 2.0 * std::pow(2.0 * n, D); }

std::vector<PermutationPairing> all_permutations(int n) {
  require(n >= 1 && n <= 8, "permutation listing supports 1 <= n <= 8");
  std::vector<int> s(n);
  std::iota(s.begin(), s.end(), 1);
  std::vector<PermutationPairing> out;
  do {
    out.emplace_back(s);
  } while (std::next_permutation(s.begin(), s.end()));
  return out;
}

std::vector<PermutationPairing> sample_permutations(int n, int count, std::uint64_t seed) {
  require(n >= 1 && count >= 0, "invalid permutation sample request");
  std::mt19937_64 gen(mix64(seed));
  std::vector<PermutationPairing> out;
  out.reserve(count);
  std::vector<int> s(n);
  for (int c = 0; c < count; ++c) {
    std::iota(s.begin(), s.end(), 1);
    for (int i = n - 1; i > 0; --i) {
      std::uniform_int_distribution<int> pick(0, i);
      std::swap(s[i], s[pick(gen)]);
    }
    out.emplace_back(s);
  }
  return out;
}

}  // namespace qdlab::graphs
