// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

// Monte Carlo values of up-down pairing graphs for Gaussian disorder.
//
// With q_0..q_n the momenta on the psi line and p_0..p_n those on the
// conjugate line, the pairing constraints p_j - p_{j-1} = q_sigma(j) -
// q_sigma(j)-1 together with p_0 = q_0 - xi leave q_0..q_n free, and
//   Val = lambda^{2n} int dq conj(O^(xi, p_n + xi/2)) conj(psi0^(p_0)) psi0^(q_0)
//         conj(D_n(omega(p))) D_n(omega(q)),
// where D_n(x_0..x_n) = int_{s_0+..+s_n=t} prod e^{-i s_j x_j} is the
// simplex time integral. D_n = i^n f[x_0..x_n] for f(z) = e^{-izt}, the
// divided difference, read off the exponential of a bidiagonal matrix. The
// alpha/beta contour integrals of the propagator representation are thereby
// done exactly, with no eta dependence.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/permutation.hpp"
#include "core/self_energy.hpp"

namespace qdlab::graphs {

/// Simplex time integral of prod_j exp(-i s_j x_j) over s_0 + .. + s_n = t.
/// At most 12 energies.
cplx simplex_propagator(std::span<const cplx> x, double t);

/// Same integral through the exponential of the (n+1)x(n+1) bidiagonal
/// matrix. Slower; kept as a reference.
cplx simplex_propagator_dense(std::span<const cplx> x, double t);

enum class SamplerKind { kQuasiRandom, kPseudoRandom };

struct GraphValueConfig {
  double lambda = 0.2;
  double t = 25.0;
  /// Microscopic xi.
  Vec3 xi{};
  bool renormalized = false;
  const SelfEnergy* self_energy = nullptr;  // required when renormalized
  /// Defaults to 1 (a site-localized initial state).
  std::function<cplx(const Vec3&)> psi0_hat;
  /// Defaults to 1.
  std::function<cplx(const Vec3& xi, const Vec3& v)> o_hat;
  long samples = 1 << 14;  // per replicate
  int replicates = 16;
  SamplerKind sampler = SamplerKind::kQuasiRandom;
  std::uint64_t seed = 1;
  /// Weight of the uniform component in the energy proposals.
  double uniform_mix = 0.1;
  long min_samples = 256;
};

struct GraphValueEstimate {
  int n = 0;
  std::string sigma;
  int degree = 0;
  double lambda = 0.0;
  double t = 0.0;
  /// Regulator of the propagator representation, 1/t. The residue
  /// evaluation does not depend on it; it is kept for the record.
  double eta = 0.0;
  Vec3 xi{};
  bool renormalized = false;
  cplx mean = 0.0;
  double stderr_ = 0.0;
  long samples = 0;
  std::vector<cplx> replicate_means;
};

/// Throws kInsufficientSamples when samples < min_samples or fewer than two
/// replicates are requested.
GraphValueEstimate graph_value(const PermutationPairing& sigma, const GraphValueConfig& cfg);

/// Values for several permutations of the same order from one shared set of
/// sample points (common random numbers).
std::vector<GraphValueEstimate> graph_values(std::span<const PermutationPairing> sigmas,
                                             const GraphValueConfig& cfg);

}  // namespace qdlab::graphs
