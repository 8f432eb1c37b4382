// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

// Momentum-space geometry of the periodic cubic lattice: the tight-binding
// dispersion e(k) = sum_i (1 - cos k_i), its broadened density of states,
// energy-shell averages and the shell diffusion matrix.
//
// Momentum integrals use the normalized measure on the torus, so a grid sum
// is (1/L^3) sum_k and the density of states integrates to one.

#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "core/common.hpp"

namespace qdlab::lattice {

inline constexpr int kDim = 3;
inline constexpr double kBandMin = 0.0;
inline constexpr double kBandMax = 2.0 * kDim;

inline constexpr double kDefaultBroadening = 0.05;
inline constexpr int kDefaultShellSide = 64;
inline constexpr int kDefaultEnergyPoints = 512;
inline constexpr double kDefaultEnergyMin = -0.5;
inline constexpr double kDefaultEnergyMax = 6.5;
/// Shells with a broadened density below this are treated as empty.
inline constexpr double kEmptyShellTolerance = 1e-8;

/// Periodic momentum grid k = (2 pi / L) n, n in {0..L-1}^3, reported on
/// the torus [-pi, pi)^3. Sites are ordered with the last axis fastest.
class MomentumGrid {
 public:
  explicit MomentumGrid(int side);

  int side() const { return side_; }
  std::size_t size() const { return size_; }

  Index3 coords(std::size_t idx) const;
  std::size_t index(const Index3& n) const;
  /// Momentum component for integer coordinate n, wrapped onto [-pi, pi).
  double component(int n) const;
  Vec3 momentum(std::size_t idx) const;
  /// Index of -k.
  std::size_t negate(std::size_t idx) const;

 private:
  int side_;
  std::size_t size_;
};

double dispersion(const Vec3& k);
Vec3 dispersion_gradient(const Vec3& k);

/// Normalized Gaussian (2 pi h^2)^{-1/2} exp(-u^2 / 2h^2).
double gaussian_delta(double u, double h);

/// Distinct dispersion values of a grid with their weights. Every lattice
/// quantity that depends on k only through e(k) can be summed over these
/// levels instead of over all L^3 points.
class EnergyLevels {
 public:
  explicit EnergyLevels(const MomentumGrid& grid);

  std::size_t count() const { return energy_.size(); }
  std::span<const double> energies() const { return energy_; }
  /// Fraction of grid points on each level; sums to one.
  std::span<const double> weights() const { return weight_; }
  std::span<const std::size_t> multiplicities() const { return mult_; }
  /// Level mean of (sin^2 k_1 + sin^2 k_2 + sin^2 k_3) / 3.
  std::span<const double> mean_velocity_sq() const { return vel_sq_; }
  /// Level index of every grid point.
  std::span<const int> level_of() const { return level_of_; }

  double dos(double energy, double h) const;
  /// D_11 from the level sums; equals the diagonal of diffusion_matrix by
  /// cubic symmetry.
  double diffusion_11(double energy, double h) const;

 private:
  std::vector<double> energy_;
  std::vector<double> weight_;
  std::vector<std::size_t> mult_;
  std::vector<double> vel_sq_;
  std::vector<int> level_of_;
};

/// Phi(E) with Gaussian broadening h on an L^3 grid.
double dos(const MomentumGrid& grid, double energy, double h);

/// <F>_E = Phi(E)^{-1} (1/L^3) sum_k F(k) delta_h(E - e(k)).
/// Throws kEmptyShell when Phi(E) is below kEmptyShellTolerance.
double shell_average(const MomentumGrid& grid,
                     const std::function<double(const Vec3&)>& f, double energy,
                     double h);

/// D_ij(E) = <d_i e d_j e>_E / (2 pi Phi(E)). Throws kEmptyShell.
Mat3 diffusion_matrix(const MomentumGrid& grid, double energy, double h);

/// The rigorous heat-equation regime is E in (0, 3); the lab evaluates the
/// whole band and uses this to flag results inside it.
bool in_proven_regime(double energy);

/// Immutable table of Phi and D_11 over a uniform energy grid.
class EnergyShellTable {
 public:
  EnergyShellTable(int side, double h, int points = kDefaultEnergyPoints,
                   double emin = kDefaultEnergyMin, double emax = kDefaultEnergyMax);

  int side() const { return side_; }
  double broadening() const { return h_; }
  std::span<const double> energies() const { return energies_; }
  std::span<const double> dos() const { return dos_; }
  /// NaN where the shell is empty.
  std::span<const double> diffusion_11() const { return d11_; }

  /// Trapezoid integral of Phi over the table's energy range.
  double dos_integral() const;

  /// CSV with header "E,Phi,D11".
  void write_csv(std::ostream& os) const;

 private:
  int side_;
  double h_;
  std::vector<double> energies_;
  std::vector<double> dos_;
  std::vector<double> d11_;
};

}  // namespace qdlab::lattice
