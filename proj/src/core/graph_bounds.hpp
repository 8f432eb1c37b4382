// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

// Numerical checks of the graph estimates: the ladder rung with and without
// renormalization, the crossing integral bound and the suppression of graph
// values with the degree of the pairing. Every constant here is a fit.

#pragma once

#include <map>
#include <optional>
#include <vector>

#include "core/common.hpp"
#include "core/graph_value.hpp"
#include "core/self_energy.hpp"

namespace qdlab::graphs {

struct TorusQuadrature {
  /// Gauss-Legendre panels per axis for the two outer momenta.
  int panels = 16;
  /// Relative tolerance of the adaptive inner integral.
  double inner_tolerance = 1e-7;
  int inner_max_depth = 6;
};

/// lambda^2 int dp 1 / ((alpha - conj(w(p + r)) - i eta) (beta - w(p - r) + i eta))
/// with w = omega from `se` when renormalized, w = e otherwise. At r = 0 the
/// momentum integral reduces to an energy integral against the density of
/// states implied by the self-energy table.
cplx ladder_rung(double alpha, double beta, const Vec3& r, double lambda, double eta,
                 const SelfEnergy& se, bool renormalized = true, const TorusQuadrature& quad = {});

/// int dp 1 / |alpha - w(p) + i eta| 1 / |beta - conj(w(sign p + q)) - i eta|,
/// w = e by default, omega when `se` is given.
double crossing_integral(double alpha, double beta, const Vec3& q, double eta, int sign,
                         const SelfEnergy* se = nullptr, const TorusQuadrature& quad = {});

struct RungStudy {
  std::vector<double> lambdas;
  std::vector<cplx> values;
  std::vector<double> deviations;  // |rung - 1|
  bool strictly_decreasing = false;
  /// Fit deviation = c0 lambda^exponent.
  double c0 = 0.0;
  double exponent = 0.0;
  double exponent_ci95 = 0.0;
  double residual = 0.0;
};

struct RungStudyConfig {
  std::vector<double> lambdas{0.4, 0.2, 0.1};
  double energy = 3.0;
  /// eta = eta_factor lambda^2.
  double eta_factor = 1e-2;
};

RungStudy renormalized_rung_study(const SelfEnergy& se, const RungStudyConfig& cfg = {});

struct BareRungStudy {
  double lambda = 0.0;
  std::vector<double> etas;
  std::vector<double> magnitudes;
  bool growing = false;
  /// Slope of log |rung| against log(1/eta).
  double slope = 0.0;
};

BareRungStudy bare_rung_study(const SelfEnergy& se, double lambda = 0.2, double energy = 3.0,
                              std::vector<double> etas = {1e-2, 1e-3, 1e-4});

struct CrossingPoint {
  double alpha = 0.0;
  double beta = 0.0;
  int sign = 1;
  Vec3 q{};
  double q_norm = 0.0;
  double eta = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct CrossingSeries {
  double alpha = 0.0;
  double beta = 0.0;
  int sign = 1;
  Vec3 q{};
  /// Slope of log(lhs (|||q||| + eta)) against log(1/eta).
  double exponent = 0.0;
};

struct CrossingConfig {
  std::vector<double> energies{1.5, 3.0, 4.5};
  std::vector<int> signs{1, -1};
  /// Panel momenta q = s (pi/2)(1, 1, 1).
  std::vector<double> q_scales{0.1, 0.5};
  std::vector<double> etas{1e-1, 1e-2, 1e-3};
  /// Ray for the monotonicity check at alpha = beta = ray_energy.
  std::vector<double> ray_scales{0.05, 0.1, 0.2, 0.4, 0.8};
  double ray_energy = 3.0;
  double ray_eta = 1e-2;
  int ray_sign = 1;
  TorusQuadrature quad{};
};

struct CrossingReport {
  std::vector<CrossingPoint> panel;
  std::vector<CrossingSeries> series;
  double max_exponent = 0.0;
  /// Bound C |log eta|^3 eta^{-b} / (|||q||| + eta); b clamped to [1/2, 3/4].
  double b = 0.0;
  double b_unclamped = 0.0;
  double C = 0.0;
  double residual = 0.0;
  bool bound_holds = false;
  std::vector<CrossingPoint> ray;
  bool ray_monotone = false;
};

CrossingReport crossing_bound_check(const CrossingConfig& cfg = {},
                                    const SelfEnergy* se = nullptr);

struct DegreeBin {
  int degree = 0;
  std::size_t count = 0;
  double median = 0.0;
  double median_stderr = 0.0;
  /// Exhaustive count N_{n,d}.
  std::uint64_t population = 0;
};

struct DegreeStudyConfig {
  int n = 5;
  /// Sampled permutations when n > 6 or when set; all of S_n otherwise.
  int sample = 0;
  GraphValueConfig graph{};
};

struct DegreeStudy {
  int n = 0;
  double lambda = 0.0;
  double t = 0.0;
  std::vector<GraphValueEstimate> estimates;
  std::map<int, DegreeBin> bins;
  /// log |Val| = intercept + slope d; gamma = slope / log lambda.
  double slope = 0.0;
  double intercept = 0.0;
  double gamma = 0.0;
  double gamma_ci95 = 0.0;
  double residual = 0.0;
  /// exp(intercept) sum_{d >= 2} lambda^{gamma d} N_{n,d}.
  double remainder = 0.0;
  double ladder = 0.0;
  /// Medians strictly decrease across bins 0, 1, 2.
  bool decreasing_012 = false;
};

DegreeStudy degree_suppression_study(const DegreeStudyConfig& cfg);

struct GraphBoundReport {
  std::optional<double> gamma;
  std::optional<double> gamma_ci95;
  std::optional<double> degree_residual;
  std::optional<double> c0;
  std::optional<double> rung_exponent;
  std::optional<double> rung_exponent_ci95;
  std::optional<double> rung_residual;
  std::optional<double> c;
  std::optional<double> b;
  std::optional<double> C;
  std::optional<double> crossing_residual;
};

GraphBoundReport make_report(const DegreeStudy* degree, const RungStudy* rung,
                             const DispersionBoundFit* dispersion, const CrossingReport* crossing);

}  // namespace qdlab::graphs
