// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

// I.i.d. on-site random potentials with m1 = m3 = m5 = 0 and m2 = 1.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "core/common.hpp"

namespace qdlab::disorder {

enum class DisorderKind { kGaussian, kSymmetricBernoulli };

const char* to_string(DisorderKind kind) noexcept;
DisorderKind parse_kind(const std::string& name);

/// Recorded in run metadata next to every seed.
inline constexpr const char* kRngAlgorithm = "mt19937_64/splitmix64-derived-seed";

struct DisorderSpec {
  DisorderKind kind = DisorderKind::kGaussian;
  double lambda = 0.0;
  std::uint64_t master_seed = 0;
};

struct DisorderRealization {
  std::vector<double> values;  // site order matches lattice::MomentumGrid
  std::uint64_t index = 0;
  std::uint64_t derived_seed = 0;

  /// 64-bit content hash of the field, for audit trails.
  std::uint64_t hash() const;
};

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

DisorderRealization sample_potential(const DisorderSpec& spec, int side,
                                     std::uint64_t index);

struct MomentReport {
  int count = 0;
  std::array<double, 7> moment{};  // index k holds m_k, k = 1..6
  std::array<double, 7> stderr_{};
  /// Empirical covariance of nearest neighbours along the first axis.
  double neighbor_cov = 0.0;
  double neighbor_cov_stderr = 0.0;
};

/// Moments from `count` realizations. Standard errors come from the spread
/// of per-realization means, which are independent.
MomentReport moment_report(const DisorderSpec& spec, int side, int count);

}  // namespace qdlab::disorder
