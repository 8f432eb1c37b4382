// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/compare.hpp"

#include <cmath>

#include "core/lattice.hpp"

namespace qdlab::compare {

double coarse_l1(std::span<const double> a, std::span<const double> b, int side, int coarse) {
  require(coarse >= 1 && side % coarse == 0, "coarse cells must divide the lattice side");
  const auto n = static_cast<std::size_t>(side) * side * side;
  require(a.size() == n && b.size() == n, "distributions must live on the side^3 grid");
  const lattice::MomentumGrid grid(side);
  const int per = side / coarse;
  std::vector<double> cells(static_cast<std::size_t>(coarse) * coarse * coarse, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = grid.coords(i);
    const std::size_t cell = (static_cast<std::size_t>(c[0] / per) * coarse + c[1] / per) * coarse + c[2] / per;
    cells[cell] += a[i] - b[i];
  }
  double s = 0.0;
  for (double v : cells) s += std::abs(v);
  return s;
}

KineticComparison kinetic_compare(const KineticCompareConfig& cfg) {
  require(cfg.lambda > 0.0, "kinetic comparison needs lambda > 0");
  require(cfg.kinetic_time >= 0.0, "kinetic time must be nonnegative");
  KineticComparison out;
  out.lambda = cfg.lambda;
  out.kinetic_time = cfg.kinetic_time;
  out.t = cfg.kinetic_time / (cfg.lambda * cfg.lambda);
  out.count = cfg.count;

  const Vec3 center{cfg.side / 2.0, cfg.side / 2.0, cfg.side / 2.0};
  const auto psi0 = evolution::gaussian_packet(cfg.side, center, cfg.width, cfg.k0);
  const auto a0 = psi0.in(evolution::Representation::kMomentum);
  const std::size_t n = a0.size();
  const double norm2 = a0.norm() * a0.norm();
  out.initial_marginal.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.initial_marginal[i] = std::norm(a0[i]) / norm2;

  const disorder::DisorderSpec spec{cfg.kind, cfg.lambda, cfg.seed};
  const auto grid = wigner::DualGrid::subset(cfg.side, {Index3{0, 0, 0}});
  const auto ens = wigner::ensemble_wigner(spec, psi0, out.t, 1.0, cfg.count, grid, cfg.propagator);
  out.realization_hashes = ens.realization_hashes;
  out.wigner_marginal.resize(n);
  out.wigner_stderr.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += ens.mean.slices[0][i].real();
  for (std::size_t i = 0; i < n; ++i) {
    out.wigner_marginal[i] = ens.mean.slices[0][i].real() / total;
    out.wigner_stderr[i] = ens.stderr_[0][i] / total;
  }
  out.ensemble = ens;

  // F is a density for the normalized momentum measure: F = N P.
  const kinetics::CollisionOperator op(cfg.side, cfg.kernel);
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = static_cast<double>(n) * out.initial_marginal[i];
  op.exponentiate(cfg.kinetic_time, f);
  out.boltzmann_marginal.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.boltzmann_marginal[i] = f[i] / static_cast<double>(n);

  out.l1 = coarse_l1(out.wigner_marginal, out.boltzmann_marginal, cfg.side, cfg.coarse);
  out.l1_fine = coarse_l1(out.wigner_marginal, out.boltzmann_marginal, cfg.side, cfg.side);
  out.l1_initial = coarse_l1(out.initial_marginal, out.boltzmann_marginal, cfg.side, cfg.coarse);
  return out;
}

DiffusiveComparison diffusive_compare(const DiffusiveCompareConfig& cfg) {
  require(cfg.lambda > 0.0, "diffusive comparison needs lambda > 0");
  require(cfg.dt_sample > 0.0 && cfg.t_end > cfg.dt_sample, "invalid sampling grid");
  require(cfg.window_hi > cfg.window_lo && cfg.window_lo > 0.0, "invalid late window");
  const double tk = 1.0 / (cfg.lambda * cfg.lambda);
  std::vector<double> times;
  for (int k = 0; k * cfg.dt_sample <= cfg.t_end + 1e-12; ++k) times.push_back(k * cfg.dt_sample);
  const evolution::MsdWindow late{cfg.window_lo * tk, cfg.window_hi * tk};
  const std::vector<evolution::MsdWindow> windows{late};

  const Vec3 center{cfg.side / 2.0, cfg.side / 2.0, cfg.side / 2.0};
  const auto psi0 = evolution::gaussian_packet(cfg.side, center, cfg.width, cfg.k0);
  const disorder::DisorderSpec spec{cfg.kind, cfg.lambda, cfg.seed};

  DiffusiveComparison out;
  out.report = evolution::msd_scaling_report(spec, psi0, times, cfg.count, windows, cfg.propagator);
  const auto& fit = out.report.fits.front();
  out.late_exponent = fit.exponent;
  out.late_ci95 = fit.ci95;
  out.late_points = fit.points;

  std::vector<double> lt, ly;
  for (std::size_t i = 0; i < out.report.times.size(); ++i) {
    const double t = out.report.times[i];
    if (t >= late.t_lo - 1e-12 && t <= late.t_hi + 1e-12) {
      lt.push_back(t);
      ly.push_back(out.report.mean_excess[i]);
    }
  }
  if (lt.size() >= 2) out.spread_rate = fit_line(lt, ly).slope;

  const lattice::MomentumGrid mg(cfg.side);
  const lattice::EnergyLevels levels(mg);
  std::vector<double> d11(levels.count());
  for (std::size_t l = 0; l < levels.count(); ++l)
    d11[l] = levels.diffusion_11(levels.energies()[l], lattice::kDefaultBroadening);
  const auto a0 = psi0.in(evolution::Representation::kMomentum);
  double w = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < a0.size(); ++i) {
    const double p = std::norm(a0[i]);
    w += p;
    acc += p * d11[levels.level_of()[i]];
  }
  out.predicted_rate = 6.0 * (acc / w) * tk;
  return out;
}

}  // namespace qdlab::compare
