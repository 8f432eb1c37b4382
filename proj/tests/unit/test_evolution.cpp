// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "core/disorder.hpp"
#include "core/evolution.hpp"
#include "core/lattice.hpp"
#include "oracle.hpp"

using namespace qdlab;
using namespace qdlab::evolution;

namespace {

Eigen::VectorXcd to_eigen(const WaveFunction& psi) {
  const auto p = psi.in(Representation::kPosition);
  Eigen::VectorXcd v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = p[i];
  return v;
}

double diff(const WaveFunction& psi, const Eigen::VectorXcd& ref) { return (to_eigen(psi) - ref).norm(); }

}  // namespace

TEST_CASE("gaussian packet is normalized and centered") {
  const auto psi = gaussian_packet(16, {8, 8, 8}, 1.5, {0.4, 0, 0});
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-14));
  const auto c = centroid(psi);
  for (double x : c) CHECK(x == doctest::Approx(8.0).epsilon(1e-10));
  // Per-axis standard deviation w, summed over three axes, up to lattice sampling.
  CHECK(msd(psi) == doctest::Approx(3 * 1.5 * 1.5).epsilon(1e-4));
  CHECK(msd(point_mass(8, {2, 3, 4})) == doctest::Approx(0.0));
}

TEST_CASE("momentum round trip") {
  auto psi = gaussian_packet(8, {3, 4, 5}, 1.0, {1.0, -0.5, 0.2});
  const auto ref = psi;
  psi.to_momentum();
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-14));
  psi.to_position();
  CHECK(distance(psi, ref) < 1e-14);
}

TEST_CASE("propagators against the dense matrix exponential") {
  const int L = 4;
  const auto real = disorder::sample_potential({disorder::DisorderKind::kGaussian, 0.5, 3}, L, 0);
  const auto psi0 = gaussian_packet(L, {2, 2, 2}, 0.8, {1.0, 0.3, -0.7});
  const auto H = testing::dense_hamiltonian(L, real.values, 0.5);
  const auto ref = testing::dense_evolve(H, to_eigen(psi0), 1.0);

  PropagatorConfig cheb;
  cheb.scheme = Scheme::kChebyshev;
  CHECK(diff(evolve(psi0, real, 0.5, 1.0, cheb), ref) < 1e-11);

  // Strang splitting is second order: halving dt quarters the error.
  PropagatorConfig a, b;
  a.dt = 2e-2;
  b.dt = 1e-2;
  const double ea = diff(evolve(psi0, real, 0.5, 1.0, a), ref);
  const double eb = diff(evolve(psi0, real, 0.5, 1.0, b), ref);
  CHECK(eb < 1e-4);
  CHECK(ea / eb == doctest::Approx(4.0).epsilon(0.05));

  // Free evolution is exact.
  const auto H0 = testing::dense_hamiltonian(L, {}, 0.0);
  const auto ref0 = testing::dense_evolve(H0, to_eigen(psi0), 2.5);
  const disorder::DisorderRealization none;
  CHECK(diff(evolve(psi0, none, 0.0, 2.5, a), ref0) < 1e-12);
}

TEST_CASE("energy of the hamiltonian application") {
  const int L = 4;
  const auto real = disorder::sample_potential({disorder::DisorderKind::kGaussian, 0.7, 8}, L, 1);
  const auto psi = gaussian_packet(L, {1, 2, 3}, 0.9, {0.2, 0.1, 1.3});
  const Propagator prop(L, real.values, 0.7, {});
  const auto H = testing::dense_hamiltonian(L, real.values, 0.7);
  const Eigen::VectorXcd v = to_eigen(psi);
  CHECK(diff(prop.apply_hamiltonian(psi), H * v) < 1e-12);
  CHECK(prop.energy(psi) == doctest::Approx((v.adjoint() * H * v)(0).real()).epsilon(1e-12));
}

TEST_CASE("norm and energy conservation") {
  const auto real = disorder::sample_potential({disorder::DisorderKind::kSymmetricBernoulli, 0.4, 1}, 16, 2);
  const auto psi0 = gaussian_packet(16, {8, 8, 8}, 1.5, {kPi / 2, kPi / 2, kPi / 2});
  const Propagator prop(16, real.values, 0.4, {});
  auto psi = psi0;
  prop.advance(psi, 5.0);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
  PropagatorConfig c;
  c.scheme = Scheme::kChebyshev;
  const Propagator exact(16, real.values, 0.4, c);
  auto phi = psi0;
  exact.advance(phi, 5.0);
  CHECK(exact.energy(phi) == doctest::Approx(exact.energy(psi0)).epsilon(1e-10));
}

TEST_CASE("free ballistic spread equals t^2 Var(v)") {
  const int L = 32;
  const Vec3 k0{kPi / 2, kPi / 3, 0.0};
  const auto psi0 = gaussian_packet(L, {16, 16, 16}, 1.5, k0);
  // Heisenberg: X(t) = X + t sin(k) exactly, and the real envelope makes the
  // cross term vanish, so Var X(t) - Var X(0) = t^2 sum_i Var(sin k_i).
  const auto a = psi0.in(Representation::kMomentum);
  const lattice::MomentumGrid g(L);
  double var = 0.0;
  for (int i = 0; i < 3; ++i) {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double s = std::sin(g.momentum(j)[i]);
      m1 += std::norm(a[j]) * s;
      m2 += std::norm(a[j]) * s * s;
    }
    var += m2 - m1 * m1;
  }
  const std::vector<double> times{0.0, 2.0, 4.0};
  // The circular-mean centroid differs from the arithmetic mean at the 1e-5 level.
  const auto series = msd_time_series({disorder::DisorderKind::kGaussian, 0.0, 1}, psi0, 0, times, {});
  REQUIRE(series.size() == 3);
  for (const auto& s : series)
    CHECK(s.msd - series[0].msd == doctest::Approx(s.t * s.t * var).epsilon(1e-4));
}

TEST_CASE("msd scaling report: free exponent 2 and worker independence") {
  const auto psi0 = gaussian_packet(32, {16, 16, 16}, 1.5, {kPi / 2, kPi / 2, kPi / 2});
  std::vector<double> times;
  for (int k = 0; k <= 16; ++k) times.push_back(0.5 * k);
  const std::vector<MsdWindow> w{{2.0, 8.0}};
  const auto rep = msd_scaling_report({disorder::DisorderKind::kGaussian, 0.0, 1}, psi0, times, 2, w, {});
  CHECK(rep.fits[0].exponent == doctest::Approx(2.0).epsilon(0.01));

  const auto rep2 = msd_scaling_report({disorder::DisorderKind::kGaussian, 0.3, 5}, psi0, times, 3, w, {});
  const auto rep3 = msd_scaling_report({disorder::DisorderKind::kGaussian, 0.3, 5}, psi0, times, 3, w, {});
  CHECK(rep2.mean_msd == rep3.mean_msd);
  CHECK(rep2.realization_hashes == rep3.realization_hashes);
}

TEST_CASE("loglog slope of a power law") {
  const std::vector<double> x{1, 2, 4, 8}, y{3, 3 * std::pow(2, 1.5), 3 * std::pow(4, 1.5), 3 * std::pow(8, 1.5)};
  CHECK(loglog_slope(x, y) == doctest::Approx(1.5));
}

TEST_CASE("Duhamel reconstruction and the unitarity remainder inequality") {
  const auto real = disorder::sample_potential({disorder::DisorderKind::kGaussian, 0.5, 4}, 4, 0);
  const auto psi0 = gaussian_packet(4, {2, 2, 2}, 0.8, {1.0, 0.0, 0.5});
  const auto d = duhamel_terms(psi0, real, 0.5, 1.0, 3);
  CHECK(d.reconstruction_error < 1e-6);
  CHECK(d.terms.size() == 3);
  CHECK(d.unitarity_lhs <= d.unitarity_rhs * (1 + 1e-9));
  // psi^(0) is the free evolution.
  const auto H0 = testing::dense_hamiltonian(4, {}, 0.0);
  CHECK(diff(d.terms[0], testing::dense_evolve(H0, to_eigen(psi0), 1.0)) < 1e-12);
}

TEST_CASE("norm drift beyond tolerance is an error") {
  PropagatorConfig c;
  c.tolerance = -1.0;
  const auto real = disorder::sample_potential({disorder::DisorderKind::kGaussian, 0.5, 4}, 4, 0);
  const Propagator prop(4, real.values, 0.5, c);
  auto psi = gaussian_packet(4, {2, 2, 2}, 0.8, {1.0, 0.0, 0.5});
  CHECK_THROWS_AS(prop.advance(psi, 0.5), Error);
}
