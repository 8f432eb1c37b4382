// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

#include "core/kinetics.hpp"
#include "core/lattice.hpp"

using namespace qdlab;
using namespace qdlab::kinetics;

namespace {

// Generator of dF/dT = C F as a dense matrix, from the kernel entries only.
Eigen::MatrixXd dense_generator(const CollisionOperator& op) {
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index v = 0; v < n; ++v)
    for (Eigen::Index u = 0; u < n; ++u) {
      const double k = op.kernel(u, v) / static_cast<double>(n);
      M(v, u) += k;
      M(v, v) -= k;
    }
  return M;
}

std::vector<double> random_density(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<double> f(n);
  for (auto& x : f) x = u(gen);
  return f;
}

}  // namespace

TEST_CASE("collision semigroup against the dense exponential") {
  for (auto shell : {ShellModel::kGaussian, ShellModel::kBinned}) {
    KernelConfig kc;
    kc.shell = shell;
    kc.h = 0.3;
    const CollisionOperator op(6, kc);
    const auto M = dense_generator(op);
    auto f = random_density(op.size(), 4);
    Eigen::VectorXd f0 = Eigen::Map<Eigen::VectorXd>(f.data(), f.size());
    const Eigen::VectorXd ref = (0.7 * M).exp() * f0;
    op.exponentiate(0.7, f);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i] == doctest::Approx(ref[i]).epsilon(1e-10));

    std::vector<double> g = random_density(op.size(), 5), out(op.size());
    op.apply(g, out);
    const Eigen::VectorXd mg = M * Eigen::Map<Eigen::VectorXd>(g.data(), g.size());
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(mg[i]).epsilon(1e-10).scale(1.0));

    // The loss rate includes the U = V term, which cancels in the generator.
    for (std::size_t v = 0; v < op.size(); ++v) {
      double loss = 0.0;
      for (std::size_t u = 0; u < op.size(); ++u) loss += op.kernel(u, v);
      CHECK(op.loss_rates()[op.levels().level_of()[v]] == doctest::Approx(loss / op.size()).epsilon(1e-12));
    }

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    double gap = 1e300;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (std::abs(es.eigenvalues()[i]) > 1e-9) gap = std::min(gap, std::abs(es.eigenvalues()[i]));
    CHECK(op.spectral_gap() == doctest::Approx(gap).epsilon(1e-8));
  }
}

TEST_CASE("collisions conserve mass and positivity") {
  const CollisionOperator op(10);
  const auto f0 = random_density(op.size(), 8);
  const auto f = solve_collisions(op, f0, 3.0);
  double m0 = 0.0, m1 = 0.0, lo = 1e300;
  for (std::size_t i = 0; i < f.size(); ++i) {
    m0 += f0[i];
    m1 += f[i];
    lo = std::min(lo, f[i]);
  }
  CHECK(m1 == doctest::Approx(m0).epsilon(1e-12));
  CHECK(lo >= 0.0);
}

TEST_CASE("spatially homogeneous Boltzmann reduces to collisions") {
  PhaseSpaceDensity f0;
  f0.vside = 6;
  f0.x.n = {4, 1, 1};
  const auto v = random_density(f0.nv(), 11);
  for (int x = 0; x < 4; ++x) f0.f.insert(f0.f.end(), v.begin(), v.end());
  BoltzmannConfig cfg;
  cfg.dT = 0.1;
  const auto out = solve_boltzmann(f0, 1.0, cfg);
  const CollisionOperator op(6, cfg.kernel);
  const auto ref = solve_collisions(op, v, 1.0);
  for (int x = 0; x < 4; ++x)
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(out.f[x * ref.size() + i] == doctest::Approx(ref[i]).epsilon(1e-10));
  CHECK(out.mass() == doctest::Approx(f0.mass()).epsilon(1e-12));
}

TEST_CASE("upwind transport enforces the CFL condition") {
  PhaseSpaceDensity f0;
  f0.vside = 4;
  f0.x.n = {8, 1, 1};
  f0.x.spacing = 0.1;
  f0.f.assign(8 * 64, 1.0);
  BoltzmannConfig cfg;
  cfg.transport = TransportScheme::kUpwind;
  cfg.dT = 0.5;
  CHECK_THROWS_AS(solve_boltzmann(f0, 1.0, cfg), Error);
}

TEST_CASE("heat solution: mass, variance and PDE residual") {
  Mat3 D;
  D(0, 0) = 0.3;
  D(1, 1) = 0.3;
  D(2, 2) = 0.3;
  const auto sol = solve_heat(3.0, D, 0.7, 2.0);
  CHECK(sol.variance(0) == doctest::Approx(1.2));
  CHECK(std::abs(sol.fourier({0, 0, 0}) - 0.7) < 1e-14);
  CHECK(std::abs(sol.fourier({0.5, 0, 0}) - 0.7 * std::exp(-2.0 * 0.3 * 0.25)) < 1e-12);
  CHECK(heat_pde_residual(sol, 2.0, 9, 1e-3) < 1e-5);
  CHECK(asymptotic_decay(DecayConvention::kPaperHalf, 2.0, {1, 0, 0}, D) ==
        doctest::Approx(std::exp(-0.3)));
  CHECK(asymptotic_decay(DecayConvention::kPdeFull, 2.0, {1, 0, 0}, D) == doctest::Approx(std::exp(-0.6)));
}

TEST_CASE("Boltzmann shell data spreads at twice D11") {
  VarianceStudyConfig c;
  c.vside = 16;
  c.x_points = 64;
  c.T_end = 8.0;
  c.fit_lo = 4.0;
  c.fit_hi = 8.0;
  const auto s = boltzmann_longtime_variance(c);
  const double d11 = lattice::EnergyLevels(lattice::MomentumGrid(16)).diffusion_11(3.0, c.solver.kernel.h);
  CHECK(s.rate > 0.0);
  CHECK(s.rate == doctest::Approx(2.0 * d11).epsilon(0.25));
  for (const auto& x : s.series) CHECK(x.mass == doctest::Approx(s.series.front().mass).epsilon(1e-10));
}
