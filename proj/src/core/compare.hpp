// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

// Finite-lambda comparisons between disorder-averaged wave dynamics and the
// limiting equations: the velocity marginal against the linear Boltzmann
// equation at kinetic time T = lambda^2 t, and the spread of the wave packet
// against the energy-shell diffusion constants.

#pragma once

#include <cstdint>
#include <vector>

#include "core/common.hpp"
#include "core/disorder.hpp"
#include "core/evolution.hpp"
#include "core/kinetics.hpp"
#include "core/wigner.hpp"

namespace qdlab::compare {

struct KineticCompareConfig {
  double lambda = 0.3;
  int side = 32;
  int count = 200;
  double kinetic_time = 1.0;
  double width = 1.5;
  Vec3 k0{kPi / 2, kPi / 2, kPi / 2};
  /// Coarse cells per axis for the L1 distance; must divide side.
  int coarse = 4;
  std::uint64_t seed = 1;
  disorder::DisorderKind kind = disorder::DisorderKind::kGaussian;
  evolution::PropagatorConfig propagator{};
  kinetics::KernelConfig kernel{};
};

struct KineticComparison {
  double lambda = 0.0;
  double t = 0.0;
  double kinetic_time = 0.0;
  int count = 0;
  /// Probability per momentum grid point, summing to one.
  std::vector<double> wigner_marginal;
  std::vector<double> wigner_stderr;
  std::vector<double> boltzmann_marginal;
  std::vector<double> initial_marginal;
  /// sum over coarse cells |P_W - P_B|.
  double l1 = 0.0;
  double l1_fine = 0.0;
  /// Same distance for the initial distribution, a scale for l1.
  double l1_initial = 0.0;
  std::vector<std::uint64_t> realization_hashes;
  /// The xi = 0 slice of the ensemble Wigner transform.
  wigner::EnsembleWigner ensemble;
};

KineticComparison kinetic_compare(const KineticCompareConfig& cfg);

/// sum over coarse cells |a - b| for two functions on the side^3 grid.
double coarse_l1(std::span<const double> a, std::span<const double> b, int side, int coarse);

struct DiffusiveCompareConfig {
  double lambda = 0.5;
  int side = 64;
  int count = 50;
  double t_end = 32.0;
  double dt_sample = 1.0;
  /// Late window, in units of the kinetic time 1/lambda^2.
  double window_lo = 3.0;
  double window_hi = 7.0;
  double width = 1.5;
  Vec3 k0{kPi / 2, kPi / 2, kPi / 2};
  std::uint64_t seed = 1;
  disorder::DisorderKind kind = disorder::DisorderKind::kGaussian;
  evolution::PropagatorConfig propagator{};
};

struct DiffusiveComparison {
  evolution::MsdScalingReport report;
  double late_exponent = 0.0;
  double late_ci95 = 0.0;
  int late_points = 0;
  /// Least-squares slope of the mean excess spread on the late window.
  double spread_rate = 0.0;
  /// 6 <D11(e(p))> / lambda^2 weighted by the initial momentum density.
  double predicted_rate = 0.0;
};

DiffusiveComparison diffusive_compare(const DiffusiveCompareConfig& cfg);

}  // namespace qdlab::compare
