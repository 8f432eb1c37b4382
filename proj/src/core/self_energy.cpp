// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/self_energy.hpp"

#include <algorithm>
#include <cmath>

namespace qdlab::graphs {

double triple_norm(const Vec3& p) {
  double s = 0.0;
  for (double c : p) {
    double a = std::abs(wrap_angle(c));
    double d = std::min(a, kPi - a);
    s += d * d;
  }
  return std::sqrt(s);
}

cplx theta_eps(const lattice::EnergyLevels& levels, double alpha, double eps) {
  const auto e = levels.energies();
  const auto w = levels.weights();
  cplx s = 0.0;
  for (std::size_t l = 0; l < e.size(); ++l) s += w[l] / cplx(alpha - e[l], eps);
  return s;
}

SelfEnergy SelfEnergy::build(double lambda, const SelfEnergyConfig& cfg) {
  require(cfg.eps_ladder.size() >= 2, "self-energy needs at least two eps values");
  for (std::size_t i = 0; i < cfg.eps_ladder.size(); ++i) {
    require(cfg.eps_ladder[i] > 0.0, "eps values must be positive");
    if (i) require(cfg.eps_ladder[i] < cfg.eps_ladder[i - 1], "eps values must decrease");
  }
  require(cfg.points >= 2 && cfg.emax > cfg.emin, "invalid energy table");
  lattice::EnergyLevels levels{lattice::MomentumGrid(cfg.side)};
  const std::size_t k = cfg.eps_ladder.size();
  const double e1 = cfg.eps_ladder[k - 2], e2 = cfg.eps_ladder[k - 1];
  SelfEnergy se;
  se.lambda_ = lambda;
  se.energies_.resize(cfg.points);
  se.theta_.resize(cfg.points);
  double spread = 0.0, scale = 0.0;
  for (int i = 0; i < cfg.points; ++i) {
    const double a = cfg.emin + (cfg.emax - cfg.emin) * i / (cfg.points - 1);
    se.energies_[i] = a;
    const cplx t1 = theta_eps(levels, a, e1), t2 = theta_eps(levels, a, e2);
    cplx th = (e1 * t2 - e2 * t1) / (e1 - e2);
    if (k >= 3 && a >= 0.5 && a <= 5.5) {
      const double e0 = cfg.eps_ladder[k - 3];
      const cplx t0 = theta_eps(levels, a, e0);
      const cplx alt = (e0 * t1 - e1 * t0) / (e0 - e1);
      spread = std::max(spread, std::abs(alt - th));
      scale = std::max(scale, std::abs(th));
    }
    if (th.imag() > 0.0) {
      se.clamp_max_ = std::max(se.clamp_max_, th.imag());
      th.imag(0.0);
    }
    se.theta_[i] = th;
  }
  se.spread_ = spread;
  if (scale > 0.0 && spread > cfg.stability_tolerance * scale)
    fail(ErrorCode::kExtrapolationUnstable,
         "eps extrapolation unstable: spread " + std::to_string(spread));
  return se;
}

SelfEnergy SelfEnergy::with_lambda(double lambda) const {
  SelfEnergy s = *this;
  s.lambda_ = lambda;
  return s;
}

cplx SelfEnergy::Theta(double alpha) const {
  const double lo = energies_.front(), hi = energies_.back();
  if (alpha <= lo) return theta_.front();
  if (alpha >= hi) return theta_.back();
  const double pos = (alpha - lo) / (hi - lo) * (energies_.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(pos), energies_.size() - 2);
  const double f = pos - i;
  return (1.0 - f) * theta_[i] + f * theta_[i + 1];
}

cplx SelfEnergy::omega(const Vec3& p) const {
  const double e = lattice::dispersion(p);
  return e + lambda_ * lambda_ * Theta(e);
}

double SelfEnergy::holder_half_modulus(double lo, double hi) const {
  double m = 0.0;
  for (std::size_t i = 0; i < energies_.size(); ++i) {
    if (energies_[i] < lo || energies_[i] > hi) continue;
    for (std::size_t j = i + 1; j < energies_.size(); ++j) {
      if (energies_[j] > hi) break;
      m = std::max(m, std::abs(theta_[i] - theta_[j]) / std::sqrt(energies_[j] - energies_[i]));
    }
  }
  return m;
}

DispersionBoundFit renormalized_dispersion_check(const SelfEnergy& se, int side) {
  lattice::MomentumGrid grid(side);
  DispersionBoundFit fit;
  fit.c = std::numeric_limits<double>::infinity();
  fit.max_im_omega = -std::numeric_limits<double>::infinity();
  const double l2 = se.lambda() * se.lambda();
  require(l2 > 0.0, "dispersion bound needs lambda > 0");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Vec3 p = grid.momentum(i);
    const double im = se.omega(p).imag();
    fit.max_im_omega = std::max(fit.max_im_omega, im);
    const double tn = triple_norm(p);
    if (tn <= 0.0) continue;
    const double c = -im / (l2 * tn);
    if (c < fit.c) {
      fit.c = c;
      fit.argmin = p;
    }
  }
  fit.points = grid.size();
  if (!(fit.c > 0.0) || fit.max_im_omega > 0.0)
    fail(ErrorCode::kBoundViolated, "no positive c in the Im omega bound");
  return fit;
}

}  // namespace qdlab::graphs
