// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

// Reference solvers for the limiting equations: the linear Boltzmann
// equation
//   dF/dT + grad e(V) . grad_X F = 2 pi int dU delta_h(e(U) - e(V)) [F(U) - F(V)]
// on a position grid times the momentum grid, the heat equation with the
// energy-shell diffusion matrix, and the Fourier-space asymptotic formula.

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "core/common.hpp"
#include "core/lattice.hpp"

namespace qdlab::kinetics {

/// How the energy delta in the collision kernel is resolved. kGaussian uses
/// the same broadening as the density of states. kBinned replaces it by
/// indicator bins of fixed width, under which a state uniform on one bin is
/// exactly stationary.
enum class ShellModel { kGaussian, kBinned };

struct KernelConfig {
  double h = lattice::kDefaultBroadening;
  ShellModel shell = ShellModel::kGaussian;
  double bin_width = 0.1;
  /// Multiplies the whole kernel (a lambda^2 rescale).
  double rate_scale = 1.0;
};

/// Collision operator (C F)(V) = (1/N) sum_U K(U, V) [F(U) - F(V)] with
/// K(U, V) = 2 pi delta_h(e(U) - e(V)) |B^(U - V)|^2, B^ = 1. The kernel
/// depends on U, V only through their energies, so the dynamics reduces to
/// level means (coupled) plus deviations from them (each decaying at the
/// level's loss rate). The level block is diagonalized once.
class CollisionOperator {
 public:
  CollisionOperator(int vside, const KernelConfig& cfg = {});

  const lattice::MomentumGrid& grid() const { return grid_; }
  const lattice::EnergyLevels& levels() const { return levels_; }
  const KernelConfig& config() const { return cfg_; }
  std::size_t size() const { return grid_.size(); }

  /// K(U, V) for grid indices.
  double kernel(std::size_t u, std::size_t v) const;
  /// Loss rate per level, (1/N) sum_U K(U, V).
  std::span<const double> loss_rates() const { return rate_; }
  /// Smallest nonzero decay rate of the full operator.
  double spectral_gap() const;

  void apply(std::span<const double> f, std::span<double> out) const;

  /// exp(T C) in reduced form: a propagator for the level means and a decay
  /// factor per level for the deviations from them.
  struct StepMap {
    Eigen::MatrixXd level;
    std::vector<double> decay;
  };
  StepMap step_map(double T) const;
  void apply_map(const StepMap& map, std::span<double> f) const;
  /// Column j of `cols` is a function of V.
  void apply_map(const StepMap& map, Eigen::MatrixXcd& cols) const;
  void apply_map(const StepMap& map, Eigen::MatrixXd& cols) const;

  /// f <- exp(T C) f, exactly.
  void exponentiate(double T, std::span<double> f) const;

 private:

  lattice::MomentumGrid grid_;
  lattice::EnergyLevels levels_;
  KernelConfig cfg_;
  Eigen::MatrixXd coupling_;  // G(l, m)
  std::vector<double> rate_;
  Eigen::VectorXd sqrt_w_;
  Eigen::VectorXd eigval_;
  Eigen::MatrixXd eigvec_;
};

/// Periodic position grid; axes of size 1 are integrated out.
struct PositionGrid {
  std::array<int, 3> n{1, 1, 1};
  double spacing = 1.0;

  std::size_t size() const { return static_cast<std::size_t>(n[0]) * n[1] * n[2]; }
  int resolved_axes() const { return (n[0] > 1) + (n[1] > 1) + (n[2] > 1); }
  double cell_volume() const;
  /// Centered coordinate of grid index i along `axis`.
  double coord(int axis, int i) const;
  Index3 coords(std::size_t idx) const;
};

/// F(X, V) stored as f[x * Nv + v].
struct PhaseSpaceDensity {
  PositionGrid x;
  int vside = 0;
  double time = 0.0;
  std::vector<double> f;

  std::size_t nv() const { return static_cast<std::size_t>(vside) * vside * vside; }
  /// int dX int dV F with the normalized momentum measure.
  double mass() const;
  /// int dX F(X, V).
  std::vector<double> velocity_marginal() const;
  /// int dV F(X, V).
  std::vector<double> density() const;
  Vec3 variance() const;
  /// Shannon entropy of the normalized velocity marginal.
  double velocity_entropy() const;
  double min_value() const;
};

enum class TransportScheme { kSpectral, kUpwind };

struct BoltzmannConfig {
  double dT = 0.05;
  TransportScheme transport = TransportScheme::kSpectral;
  KernelConfig kernel;
};

/// One sample of the time series.
struct BoltzmannSample {
  double T = 0.0;
  Vec3 variance{};
  double mass = 0.0;
  double entropy = 0.0;
};

/// Strang splitting: half transport, exact collision, half transport.
/// Spectral transport multiplies X-Fourier modes by exact phases; upwind
/// transport throws kCflViolation when max|v| dT / dx > 1.
class BoltzmannSolver {
 public:
  BoltzmannSolver(const PhaseSpaceDensity& f0, const BoltzmannConfig& cfg);
  BoltzmannSolver(const PhaseSpaceDensity& f0, const BoltzmannConfig& cfg,
                  const CollisionOperator& op);
  ~BoltzmannSolver();
  BoltzmannSolver(const BoltzmannSolver&) = delete;
  BoltzmannSolver& operator=(const BoltzmannSolver&) = delete;

  double time() const { return time_; }
  void advance(double T);
  PhaseSpaceDensity state() const;
  BoltzmannSample sample() const;

 private:
  struct Impl;
  Impl* impl_;
  double time_ = 0.0;
};

PhaseSpaceDensity solve_boltzmann(const PhaseSpaceDensity& f0, double T,
                                  const BoltzmannConfig& cfg = {});

/// Velocity-only problem (no X dependence): F(V, T) = exp(T C) F0.
std::vector<double> solve_collisions(const CollisionOperator& op, std::span<const double> f0,
                                     double T);

struct VarianceStudyConfig {
  double energy = 3.0;
  int vside = 32;
  int x_points = 64;
  double x_spacing = 1.0;
  double x_width = 2.0;
  double T_end = 10.0;
  double fit_lo = 5.0;
  double fit_hi = 10.0;
  double sample_every = 0.5;
  BoltzmannConfig solver;
};

struct VarianceStudy {
  std::vector<BoltzmannSample> series;
  /// Fitted d Var_x / dT over the fit window and its standard error.
  double rate = 0.0;
  double rate_stderr = 0.0;
};

/// Shell data F0(X, V) = G_w(X) delta_h(E - e(V)) / Phi(E) with X resolved
/// along the first axis only, evolved to T_end.
VarianceStudy boltzmann_longtime_variance(const VarianceStudyConfig& cfg);

void write_series_csv(std::ostream& os, std::span<const BoltzmannSample> series);

/// f(T, X, E) = w N(0, 2 T D(E)): the heat semigroup applied to w delta(X).
struct HeatSolution {
  double energy = 0.0;
  Mat3 diffusion;
  double weight = 0.0;
  double T = 0.0;

  double value(const Vec3& x) const;
  cplx fourier(const Vec3& xi) const;
  double variance(int axis) const { return 2.0 * diffusion(axis, axis) * T; }
};

HeatSolution solve_heat(double energy, const Mat3& diffusion, double weight, double T);

/// Weight <|psi0^|^2>_E on the momentum grid of psi0's lattice.
double shell_weight(const lattice::MomentumGrid& grid, std::span<const double> density,
                    double energy, double h);

/// max |d_T f - div(D grad f)| over interior points of a cubic X panel,
/// by centred differences with step `step`.
double heat_pde_residual(const HeatSolution& sol, double half_width, int points, double step);

enum class DecayConvention { kPaperHalf, kPdeFull };

/// exp(-(T/2) xi.D xi) or exp(-T xi.D xi).
double asymptotic_decay(DecayConvention conv, double T, const Vec3& xi, const Mat3& d);

struct AsymptoticOptions {
  int side = 32;  // momentum grid for the shell averages
  double h = lattice::kDefaultBroadening;
  int energy_points = 281;
  double emin = -0.5;
  double emax = 6.5;
};

/// int dxi int Phi(E) dE exp(-c T xi.D(E) xi) <O^(xi, .)>_E <W^_psi0(eps xi, .)>_E,
/// with the xi integral given as nodes and weights.
cplx asymptotic_wigner(const std::function<cplx(const Vec3& xi, const Vec3& v)>& o_hat,
                       const std::function<cplx(const Vec3& k)>& psi0_hat,
                       std::span<const Vec3> xi_nodes, std::span<const double> xi_weights,
                       double T, double eps, DecayConvention conv,
                       const AsymptoticOptions& opt = {});

}  // namespace qdlab::kinetics
