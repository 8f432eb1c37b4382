// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

// Self-energy Theta(alpha) = lim_{eps -> 0+} int dq 1 / (alpha - e(q) + i eps),
// the renormalized dispersion omega(p) = e(p) + lambda^2 Theta(e(p)) and the
// Im omega lower bound in terms of the triple norm.

#pragma once

#include <vector>

#include "core/common.hpp"
#include "core/lattice.hpp"

namespace qdlab::graphs {

/// Distance from p to the set where every component lies in {0, +-pi}.
double triple_norm(const Vec3& p);

struct SelfEnergyConfig {
  int side = 64;
  /// Positive and decreasing. The limit is extrapolated linearly from the
  /// last two values; the preceding pair serves as a stability check.
  std::vector<double> eps_ladder{0.2, 0.1, 0.05};
  int points = 1401;
  double emin = -1.0;
  double emax = 7.0;
  /// Largest allowed difference between the two extrapolations on the band
  /// interior, relative to max |Theta| there.
  double stability_tolerance = 0.1;
};

/// Theta_eps(alpha) on an L^3 grid.
cplx theta_eps(const lattice::EnergyLevels& levels, double alpha, double eps);

class SelfEnergy {
 public:
  /// Throws kExtrapolationUnstable when the two extrapolations disagree.
  static SelfEnergy build(double lambda, const SelfEnergyConfig& cfg = {});

  double lambda() const { return lambda_; }
  SelfEnergy with_lambda(double lambda) const;

  const std::vector<double>& energies() const { return energies_; }
  const std::vector<cplx>& table() const { return theta_; }
  /// Largest positive Im Theta removed by clamping to zero.
  double clamp_max() const { return clamp_max_; }
  /// Max |Theta_a - Theta_b| between the two extrapolations on [0.5, 5.5].
  double extrapolation_spread() const { return spread_; }

  /// Linear interpolation in the table; clamped at the table ends.
  cplx Theta(double alpha) const;
  cplx theta(const Vec3& p) const { return Theta(lattice::dispersion(p)); }
  cplx omega(const Vec3& p) const;
  /// -Im Theta(E) / pi, the density of states implied by the table.
  double dos(double energy) const { return -Theta(energy).imag() / kPi; }

  /// max |Theta(a) - Theta(b)| / |a - b|^{1/2} over table points in [lo, hi].
  double holder_half_modulus(double lo = 0.05, double hi = 5.95) const;

 private:
  double lambda_ = 0.0;
  std::vector<double> energies_;
  std::vector<cplx> theta_;
  double clamp_max_ = 0.0;
  double spread_ = 0.0;
};

struct DispersionBoundFit {
  /// Largest c with Im omega(p) <= -c lambda^2 |||p||| on the grid.
  double c = 0.0;
  /// Maximum of Im omega over the grid (must be <= 0).
  double max_im_omega = 0.0;
  Vec3 argmin{};
  std::size_t points = 0;
};

/// Scans the momentum grid of the given side. Throws kBoundViolated when no
/// positive c exists.
DispersionBoundFit renormalized_dispersion_check(const SelfEnergy& se, int side = 64);

}  // namespace qdlab::graphs
