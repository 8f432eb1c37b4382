// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

// Up-down pairings as permutations of {1..n} and their degree: the number
// of indices i in 1..n-1 that are neither ladder (sigma(i+1) = sigma(i) + 1)
// nor antiladder (sigma(i+1) = sigma(i) - 1).

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qdlab::graphs {

enum class IndexClass { kLadder, kAntiladder, kOther };

class PermutationPairing {
 public:
  /// `one_line` holds sigma(1..n) in one-line notation.
  explicit PermutationPairing(std::vector<int> one_line);
  static PermutationPairing identity(int n);
  static PermutationPairing reversal(int n);

  int order() const { return static_cast<int>(sigma_.size()); }
  /// sigma(i) for i in 1..n.
  int operator()(int i) const { return sigma_[i - 1]; }
  const std::vector<int>& one_line() const { return sigma_; }
  /// Class of index i in 1..n-1.
  IndexClass index_class(int i) const { return classes_[i - 1]; }
  int degree() const { return degree_; }
  /// Degree with the boundary convention sigma(0) = 0, sigma(n+1) = n+1,
  /// classifying i in 0..n instead of 1..n-1.
  int degree_with_boundary() const;

  PermutationPairing inverse() const;
  /// Values reversed: i -> n + 1 - sigma(i).
  PermutationPairing reverse_values() const;
  /// Positions reversed: i -> sigma(n + 1 - i).
  PermutationPairing reverse_positions() const;

  /// "1 2 3" style one-line notation.
  std::string to_string() const;

  bool operator==(const PermutationPairing& o) const { return sigma_ == o.sigma_; }

 private:
  std::vector<int> sigma_;
  std::vector<IndexClass> classes_;
  int degree_ = 0;
};

inline int degree(const PermutationPairing& s) { return s.degree(); }

/// Exhaustive histogram D -> N_{n,D}; n <= 10.
std::map<int, std::uint64_t> count_by_degree(int n);

/// Upper bound 2 (2n)^D on the number of permutations of degree D.
double degree_count_bound(int n, int D);

/// All permutations of {1..n} in lexicographic order; n <= 8.
std::vector<PermutationPairing> all_permutations(int n);

/// `count` uniformly random permutations (with repetition) from a seed.
std::vector<PermutationPairing> sample_permutations(int n, int count, std::uint64_t seed);

}  // namespace qdlab::graphs
