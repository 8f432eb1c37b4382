// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "core/disorder.hpp"
#include "core/evolution.hpp"
#include "core/lattice.hpp"
#include "core/parallel.hpp"
#include "core/wigner.hpp"

using namespace qdlab;
using namespace qdlab::wigner;
using evolution::Representation;
using evolution::WaveFunction;

namespace {

WaveFunction random_state(int L, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n;
  WaveFunction psi(L);
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = {n(gen), n(gen)};
  psi.normalize();
  return psi;
}

}  // namespace

TEST_CASE("dual grid layout") {
  const auto g = DualGrid::full(4);
  CHECK(g.slice_count() == 512);
  const auto s = DualGrid::subset(4, {Index3{0, 0, 0}, Index3{9, 0, 0}, Index3{1, 0, 0}});
  CHECK(s.slice_count() == 2);
  CHECK(s.slot({3, 0, 0}) == -1);
  for (std::size_t p = 0; p < 64; ++p) {
    const Index3 m{3, -1, 2};
    CHECK(g.p_for(m, g.v_index(m, p)) == p);
  }
}

TEST_CASE("Fourier Wigner entries are products of amplitudes") {
  const int L = 4;
  const auto psi = random_state(L, 1);
  const auto a = psi.in(Representation::kMomentum);
  const auto g = DualGrid::full(L);
  const auto w = wigner_fourier(psi, 1.0, g);
  const lattice::MomentumGrid mg(L);
  for (const Index3& m : {Index3{0, 0, 0}, Index3{1, 2, 3}, Index3{-3, 0, 5}}) {
    const long s = g.slot(m);
    for (std::size_t p = 0; p < a.size(); ++p) {
      auto n = mg.coords(p);
      for (int i = 0; i < 3; ++i) n[i] = ((n[i] + m[i]) % L + L) % L;
      CHECK(std::abs(w.slices[s][p] - std::conj(a[p]) * a[mg.index(n)]) < 1e-15);
    }
  }
}

TEST_CASE("marginal identity and observable pairing") {
  const int L = 6;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto psi = random_state(L, 10 + seed);
    const auto a = psi.in(Representation::kMomentum);
    const auto g = DualGrid::subset(L, {Index3{0, 0, 0}, Index3{1, 0, 0}});
    const auto w = wigner_fourier(psi, 1.0, g);
    double total = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) {
      CHECK(std::abs(w.slices[g.slot({0, 0, 0})][p] - std::norm(a[p])) < 1e-15);
      total += w.slices[g.slot({0, 0, 0})][p].real();
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
    // O^ = delta_{xi,0} pairs to the norm.
    const auto o = ObservableSymbol::from_function(g, 1.0, [](const Vec3& xi, const Vec3&) {
      return dot(xi, xi) == 0.0 ? cplx(1.0) : cplx(0.0);
    });
    CHECK(std::abs(pair_observable(w, o) - 1.0) < 1e-13);
  }
}

TEST_CASE("position-space marginals on the half lattice") {
  // sum_x W(x, v) = |a(v)|^2 on grid momenta (u even) and 0 between them;
  // sum_v W(x, v) = |psi(x)|^2 on integer sites (j even) and 0 between them.
  const int L = 4, P = 8;
  const auto psi = random_state(L, 2);
  const auto a = psi.in(Representation::kMomentum);
  const auto pw = wigner_position(wigner_fourier(psi, 1.0, DualGrid::full(L)));
  const lattice::MomentumGrid half(P), mg(L);
  const std::size_t n = pw.points();
  double worst = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += pw.at(j, u);
    const auto c = half.coords(u);
    const bool even = c[0] % 2 == 0 && c[1] % 2 == 0 && c[2] % 2 == 0;
    const double want = even ? std::norm(a[mg.index({c[0] / 2, c[1] / 2, c[2] / 2})]) : 0.0;
    worst = std::max(worst, std::abs(s - want));
  }
  for (std::size_t j = 0; j < n; ++j) {
    cplx s = 0.0;
    for (std::size_t u = 0; u < n; ++u) s += pw.at(j, u);
    const auto c = half.coords(j);
    const bool even = c[0] % 2 == 0 && c[1] % 2 == 0 && c[2] % 2 == 0;
    const double want = even ? std::norm(psi[mg.index({c[0] / 2, c[1] / 2, c[2] / 2})]) : 0.0;
    worst = std::max(worst, std::abs(s - want));
  }
  CHECK(worst < 1e-14);
  double im = 0.0;
  for (const auto& v : pw.values) im = std::max(im, std::abs(v.imag()));
  CHECK(im < 1e-14);
}

TEST_CASE("pairing with a mismatched grid is rejected") {
  const auto psi = random_state(4, 3);
  const auto w = wigner_fourier(psi, 1.0, DualGrid::subset(4, {Index3{0, 0, 0}}));
  const auto o = ObservableSymbol::from_function(DualGrid::subset(4, {Index3{1, 0, 0}}), 1.0,
                                                 [](const Vec3&, const Vec3&) { return cplx(1.0); });
  CHECK_THROWS_AS(pair_observable(w, o), Error);
}

TEST_CASE("L2 continuity bound on random pairs") {
  const auto g = DualGrid::full(4);
  const auto o = ObservableSymbol::from_function(g, 0.5, [](const Vec3& xi, const Vec3& v) {
    return std::exp(-dot(xi, xi)) * cplx(std::cos(v[0] - v[2]), std::sin(2 * v[1]));
  });
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p1 = random_state(4, 100 + 2 * s), p2 = random_state(4, 101 + 2 * s);
    const auto c = wigner_l2_continuity_check(p1, p2, o);
    const double lhs = std::abs(pair_observable(wigner_fourier(p1, 0.5, g), o) -
                                pair_observable(wigner_fourier(p2, 0.5, g), o));
    CHECK(c.lhs == doctest::Approx(lhs).epsilon(1e-12));
    CHECK(c.lhs <= c.rhs_guaranteed);
    CHECK(c.rhs_guaranteed == doctest::Approx(o.xi_sup_integral() * evolution::distance(p1, p2) * 2.0).epsilon(1e-12));
  }
}

TEST_CASE("ensemble Wigner: free members and worker independence") {
  const auto psi0 = evolution::gaussian_packet(8, {4, 4, 4}, 1.0, {1.0, 0.0, 0.0});
  const auto g = DualGrid::subset(8, {Index3{0, 0, 0}, Index3{2, 0, 0}});
  // At lambda = 0 every member is the free evolution.
  const auto e = ensemble_wigner({disorder::DisorderKind::kGaussian, 0.0, 1}, psi0, 1.5, 1.0, 2, g);
  auto psi = psi0;
  evolution::Propagator(8, {}, 0.0, {}).advance(psi, 1.5);
  const auto w = wigner_fourier(psi, 1.0, g);
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t p = 0; p < 512; ++p) CHECK(std::abs(e.mean.slices[s][p] - w.slices[s][p]) < 1e-14);

  const int saved = worker_count();
  set_worker_count(1);
  const auto a = ensemble_wigner({disorder::DisorderKind::kGaussian, 0.4, 3}, psi0, 1.0, 1.0, 9, g);
  set_worker_count(4);
  const auto b = ensemble_wigner({disorder::DisorderKind::kGaussian, 0.4, 3}, psi0, 1.0, 1.0, 9, g);
  set_worker_count(saved);
  CHECK(a.mean.slices == b.mean.slices);
  CHECK(a.stderr_ == b.stderr_);
}

TEST_CASE("slice exports") {
  const auto psi0 = evolution::gaussian_packet(4, {2, 2, 2}, 1.0, {1.0, 0.0, 0.0});
  const auto e = ensemble_wigner({disorder::DisorderKind::kGaussian, 0.2, 3}, psi0, 0.5, 1.0, 3,
                                 DualGrid::subset(4, {Index3{0, 0, 0}}));
  std::ostringstream os;
  write_xi_slice_csv(os, e, {0, 0, 0});
  const std::string s = os.str();
  CHECK(s.rfind("vx,vy,vz,re,im,stderr\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 65);
}
