// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

// Time evolution psi(t) = exp(-itH) psi0 for H = -Delta/2 + lambda V on the
// periodic L^3 lattice, position-space observables and the truncated
// Duhamel expansion with its remainder.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/common.hpp"
#include "core/disorder.hpp"

namespace qdlab::evolution {

enum class Representation { kPosition, kMomentum };

/// Complex amplitudes on L^3 sites in one of two representations related
/// by the unitary FFT.
class WaveFunction {
 public:
  WaveFunction() = default;
  explicit WaveFunction(int side, Representation rep = Representation::kPosition);

  int side() const { return side_; }
  std::size_t size() const { return amp_.size(); }
  Representation representation() const { return rep_; }

  cplx* data() { return amp_.data(); }
  const cplx* data() const { return amp_.data(); }
  std::span<cplx> values() { return amp_; }
  std::span<const cplx> values() const { return amp_; }
  cplx& operator[](std::size_t i) { return amp_[i]; }
  const cplx& operator[](std::size_t i) const { return amp_[i]; }

  void to_momentum();
  void to_position();
  WaveFunction in(Representation rep) const;

  double norm() const;
  void normalize();

 private:
  int side_ = 0;
  Representation rep_ = Representation::kPosition;
  std::vector<cplx> amp_;
};

/// L2 distance; both arguments are compared in the first one's representation.
double distance(const WaveFunction& a, const WaveFunction& b);

/// Normalized packet exp(-|d|^2 / 4 w^2 + i k0.d) with d the minimal-image
/// displacement from `center`; |psi|^2 has standard deviation w per axis.
WaveFunction gaussian_packet(int side, const Vec3& center, double width, const Vec3& k0);
WaveFunction point_mass(int side, const Index3& site);

enum class Scheme { kStrangSplit, kChebyshev };

struct PropagatorConfig {
  double dt = 0.05;
  Scheme scheme = Scheme::kStrangSplit;
  /// Allowed drift of the norm.
  double tolerance = 1e-8;
};

/// Reusable propagator for one (potential, lambda, config). An empty
/// potential or lambda = 0 selects exact momentum-space phases.
class Propagator {
 public:
  Propagator(int side, std::span<const double> potential, double lambda,
             const PropagatorConfig& cfg);

  /// Evolves psi in place by time t >= 0. Throws kToleranceExceeded when
  /// the norm drifts by more than cfg.tolerance.
  void advance(WaveFunction& psi, double t) const;

  /// H psi, returned in position representation.
  WaveFunction apply_hamiltonian(const WaveFunction& psi) const;
  /// <psi, H psi> / <psi, psi>.
  double energy(const WaveFunction& psi) const;

  bool is_free() const { return free_; }

 private:
  void advance_free(WaveFunction& psi, double t) const;
  void advance_strang(WaveFunction& psi, double t) const;
  void advance_chebyshev(WaveFunction& psi, double t) const;
  void apply_h_position(const cplx* in, cplx* out) const;

  int side_;
  double lambda_;
  PropagatorConfig cfg_;
  bool free_;
  std::vector<double> potential_;
  std::vector<double> kinetic_;  // e(k) per momentum index
  double spec_lo_ = 0.0, spec_hi_ = 0.0;
};

WaveFunction evolve(const WaveFunction& psi0, const disorder::DisorderRealization& realization,
                    double lambda, double t, const PropagatorConfig& cfg);

/// Second moment of |psi|^2 about its circular-mean centroid using
/// minimal-image displacements, summed over the three axes.
double msd(const WaveFunction& psi);
Vec3 centroid(const WaveFunction& psi);

struct MsdSample {
  std::uint64_t realization = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  int side = 0;
  double t = 0.0;
  double msd = 0.0;
  double norm = 0.0;
  double energy = 0.0;
};

/// Samples msd, norm and energy at the ascending `times`; stops after the
/// first sample whose msd exceeds (L/4)^2.
std::vector<MsdSample> msd_time_series(const disorder::DisorderSpec& spec,
                                       const WaveFunction& psi0, std::uint64_t index,
                                       std::span<const double> times,
                                       const PropagatorConfig& cfg,
                                       std::uint64_t* realization_hash = nullptr);

struct MsdWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

struct MsdWindowFit {
  MsdWindow window;
  int points = 0;
  double exponent = 0.0;
  /// 95% half width from the jackknife over realizations.
  double ci95 = 0.0;
};

struct MsdScalingReport {
  int count = 0;
  std::vector<double> times;        // common pre-wrap times
  std::vector<double> mean_msd;     // ensemble mean <X^2>_t
  std::vector<double> mean_excess;  // <X^2>_t - <X^2>_0
  std::vector<double> stderr_msd;
  std::vector<MsdWindowFit> fits;
  std::vector<std::vector<MsdSample>> series;
  std::vector<std::uint64_t> realization_hashes;
};

/// Power-law exponent of the excess spread <X^2>_t - <X^2>_0 per window.
/// The excess removes the initial packet width, which would otherwise bias
/// early-time slopes downward.
MsdScalingReport msd_scaling_report(const disorder::DisorderSpec& spec,
                                    const WaveFunction& psi0, std::span<const double> times,
                                    int count, std::span<const MsdWindow> windows,
                                    const PropagatorConfig& cfg);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct DuhamelOptions {
  int resolution = 256;   // time steps on [0, t] at the coarsest level
  int refinements = 3;    // additional doublings of the resolution
  double tolerance = 1e-6;
};

struct DuhamelDecomposition {
  int order = 0;
  int resolution = 0;  // finest resolution used
  double t = 0.0;
  std::vector<WaveFunction> terms;  // psi^(n)(t), n < order, position rep
  WaveFunction remainder;           // Psi_N(t) by independent quadrature
  WaveFunction exact;
  /// ||sum_n psi^(n) + Psi_N - psi_exact|| per resolution level.
  std::vector<double> reconstruction_errors;
  double reconstruction_error = 0.0;
  /// ||psi_exact - sum_n psi^(n)||, the remainder by subtraction.
  double remainder_by_difference = 0.0;
  /// ||Psi_N||^2 and t lambda^2 int_0^t ||V psi^(N-1)(s)||^2 ds.
  double unitarity_lhs = 0.0;
  double unitarity_rhs = 0.0;
};

/// Duhamel terms psi^(n)(t) = -i lambda int_0^t e^{-i(t-s)H0} V psi^(n-1)(s) ds
/// and the remainder Psi_N(t) = -i lambda int_0^t e^{-i(t-s)H} V psi^(N-1)(s) ds,
/// both by trapezoid quadrature on a uniform grid. Throws
/// kQuadratureDivergence if a refinement fails to reduce the reconstruction
/// error while it is still above tolerance.
DuhamelDecomposition duhamel_terms(const WaveFunction& psi0,
                                   const disorder::DisorderRealization& realization,
                                   double lambda, double t, int order,
                                   const DuhamelOptions& opt = {});

}  // namespace qdlab::evolution
