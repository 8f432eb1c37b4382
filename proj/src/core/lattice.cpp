// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace qdlab::lattice {

MomentumGrid::MomentumGrid(int side) : side_(side) {
  require(side >= 2 && side % 2 == 0, "lattice side must be an even integer >= 2");
  size_ = static_cast<std::size_t>(side) * side * side;
}

Index3 MomentumGrid::coords(std::size_t idx) const {
  const auto L = static_cast<std::size_t>(side_);
  return {static_cast<int>(idx / (L * L)), static_cast<int>((idx / L) % L),
          static_cast<int>(idx % L)};
}

std::size_t MomentumGrid::index(const Index3& n) const {
  const auto L = static_cast<std::size_t>(side_);
  auto wrap = [&](int v) {
    int m = v % side_;
    return static_cast<std::size_t>(m < 0 ? m + side_ : m);
  };
  return (wrap(n[0]) * L + wrap(n[1])) * L + wrap(n[2]);
}

double MomentumGrid::component(int n) const {
  int m = n % side_;
  if (m < 0) m += side_;
  if (m >= side_ / 2) m -= side_;
  return kTwoPi * m / side_;
}

Vec3 MomentumGrid::momentum(std::size_t idx) const {
  auto n = coords(idx);
  return {component(n[0]), component(n[1]), component(n[2])};
}

std::size_t MomentumGrid::negate(std::size_t idx) const {
  auto n = coords(idx);
  return index({-n[0], -n[1], -n[2]});
}

double dispersion(const Vec3& k) {
  return (1.0 - std::cos(k[0])) + (1.0 - std::cos(k[1])) + (1.0 - std::cos(k[2]));
}

Vec3 dispersion_gradient(const Vec3& k) {
  return {std::sin(k[0]), std::sin(k[1]), std::sin(k[2])};
}

double gaussian_delta(double u, double h) {
  static const double inv_sqrt_2pi = 1.0 / std::sqrt(kTwoPi);
  return inv_sqrt_2pi / h * std::exp(-0.5 * (u / h) * (u / h));
}

EnergyLevels::EnergyLevels(const MomentumGrid& grid) {
  const int L = grid.side();
  // 1 - cos and sin^2 per axis coordinate, symmetric in n <-> L - n so
  // that degenerate points produce bit-identical sums.
  std::vector<double> c(L), s2(L);
  for (int n = 0; n < L; ++n) {
    int m = std::min(n, L - n);
    double k = kTwoPi * m / L;
    c[n] = 1.0 - std::cos(k);
    s2[n] = std::sin(k) * std::sin(k);
  }
  const std::size_t N = grid.size();
  std::vector<double> e(N), v(N);
  for (std::size_t i = 0; i < N; ++i) {
    auto n = grid.coords(i);
    std::array<double, 3> cs{c[n[0]], c[n[1]], c[n[2]]};
    std::sort(cs.begin(), cs.end());
    e[i] = (cs[0] + cs[1]) + cs[2];
    v[i] = (s2[n[0]] + s2[n[1]] + s2[n[2]]) / 3.0;
  }
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return e[a] < e[b]; });
  level_of_.assign(N, -1);
  constexpr double merge_tol = 1e-12;
  for (std::size_t pos = 0; pos < N;) {
    std::size_t end = pos;
    double vsum = 0.0;
    while (end < N && e[order[end]] - e[order[pos]] <= merge_tol) {
      level_of_[order[end]] = static_cast<int>(energy_.size());
      vsum += v[order[end]];
      ++end;
    }
    const std::size_t m = end - pos;
    energy_.push_back(e[order[pos]]);
    mult_.push_back(m);
    weight_.push_back(static_cast<double>(m) / static_cast<double>(N));
    vel_sq_.push_back(vsum / static_cast<double>(m));
    pos = end;
  }
}

double EnergyLevels::dos(double energy, double h) const {
  double s = 0.0;
  for (std::size_t l = 0; l < energy_.size(); ++l)
    s += weight_[l] * gaussian_delta(energy - energy_[l], h);
  return s;
}

double EnergyLevels::diffusion_11(double energy, double h) const {
  double phi = 0.0, num = 0.0;
  for (std::size_t l = 0; l < energy_.size(); ++l) {
    double g = weight_[l] * gaussian_delta(energy - energy_[l], h);
    phi += g;
    num += g * vel_sq_[l];
  }
  if (phi < kEmptyShellTolerance)
    fail(ErrorCode::kEmptyShell, "empty energy shell at E=" + std::to_string(energy));
  return num / (kTwoPi * phi * phi);
}

double dos(const MomentumGrid& grid, double energy, double h) {
  require(h > 0.0, "broadening must be positive");
  return EnergyLevels(grid).dos(energy, h);
}

double shell_average(const MomentumGrid& grid,
                     const std::function<double(const Vec3&)>& f, double energy,
                     double h) {
  require(h > 0.0, "broadening must be positive");
  double phi = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Vec3 k = grid.momentum(i);
    double g = gaussian_delta(energy - dispersion(k), h);
    if (g == 0.0) continue;
    phi += g;
    acc += g * f(k);
  }
  phi /= static_cast<double>(grid.size());
  if (phi < kEmptyShellTolerance)
    fail(ErrorCode::kEmptyShell, "empty energy shell at E=" + std::to_string(energy));
  return acc / static_cast<double>(grid.size()) / phi;
}

Mat3 diffusion_matrix(const MomentumGrid& grid, double energy, double h) {
  require(h > 0.0, "broadening must be positive");
  double phi = 0.0;
  Mat3 m;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Vec3 k = grid.momentum(i);
    double g = gaussian_delta(energy - dispersion(k), h);
    if (g == 0.0) continue;
    Vec3 v = dispersion_gradient(k);
    phi += g;
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) m(a, b) += g * v[a] * v[b];
  }
  const double n = static_cast<double>(grid.size());
  phi /= n;
  if (phi < kEmptyShellTolerance)
    fail(ErrorCode::kEmptyShell, "empty energy shell at E=" + std::to_string(energy));
  const double scale = 1.0 / (n * phi * kTwoPi * phi);
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      m(a, b) *= scale;
      m(b, a) = m(a, b);
    }
  return m;
}

bool in_proven_regime(double energy) { return energy > 0.0 && energy < 3.0; }

EnergyShellTable::EnergyShellTable(int side, double h, int points, double emin,
                                   double emax)
    : side_(side), h_(h) {
  require(h > 0.0, "broadening must be positive");
  require(points >= 2 && emax > emin, "energy grid needs >= 2 points and emax > emin");
  EnergyLevels levels{MomentumGrid(side)};
  energies_.resize(points);
  dos_.resize(points);
  d11_.resize(points);
  for (int i = 0; i < points; ++i) {
    double E = emin + (emax - emin) * i / (points - 1);
    energies_[i] = E;
    dos_[i] = levels.dos(E, h);
    d11_[i] = dos_[i] < kEmptyShellTolerance ? std::numeric_limits<double>::quiet_NaN()
                                             : levels.diffusion_11(E, h);
  }
}

double EnergyShellTable::dos_integral() const {
  double s = 0.0;
  for (std::size_t i = 1; i < energies_.size(); ++i)
    s += 0.5 * (dos_[i] + dos_[i - 1]) * (energies_[i] - energies_[i - 1]);
  return s;
}

void EnergyShellTable::write_csv(std::ostream& os) const {
  os << "E,Phi,D11\n";
  os.precision(17);
  for (std::size_t i = 0; i < energies_.size(); ++i)
    os << energies_[i] << ',' << dos_[i] << ',' << d11_[i] << '\n';
}

}  // namespace qdlab::lattice
