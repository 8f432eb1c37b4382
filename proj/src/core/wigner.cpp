// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/wigner.hpp"

#include <cmath>
#include <ostream>

#include "core/fft.hpp"
#include "core/lattice.hpp"
#include "core/parallel.hpp"

namespace qdlab::wigner {
namespace {

int wrap(int v, int n) {
  int m = v % n;
  return m < 0 ? m + n : m;
}

// Component of a Z_{2L} index mapped to a symmetric representative times
// pi / L, i.e. onto [-pi, pi) for velocities or [-2 pi, 2 pi) for xi.
double half_step_angle(int u, int side, int period) {
  int m = wrap(u, period);
  if (m >= period / 2) m -= period;
  return kPi * m / side;
}

}  // namespace

DualGrid DualGrid::full(int side) {
  std::vector<Index3> m;
  const int P = 2 * side;
  m.reserve(static_cast<std::size_t>(P) * P * P);
  for (int a = 0; a < P; ++a)
    for (int b = 0; b < P; ++b)
      for (int c = 0; c < P; ++c) m.push_back({a, b, c});
  return subset(side, m);
}

DualGrid DualGrid::subset(int side, const std::vector<Index3>& m) {
  require(side >= 2 && side % 2 == 0, "lattice side must be an even integer >= 2");
  DualGrid g;
  g.side_ = side;
  for (const auto& x : m) {
    Index3 w{wrap(x[0], 2 * side), wrap(x[1], 2 * side), wrap(x[2], 2 * side)};
    if (g.slot_.contains(w)) continue;
    g.slot_.emplace(w, static_cast<long>(g.xi_.size()));
    g.xi_.push_back(w);
  }
  return g;
}

long DualGrid::slot(const Index3& m) const {
  Index3 w{wrap(m[0], 2 * side_), wrap(m[1], 2 * side_), wrap(m[2], 2 * side_)};
  auto it = slot_.find(w);
  return it == slot_.end() ? -1 : it->second;
}

Vec3 DualGrid::xi(const Index3& m) const {
  // xi = (2 pi / L) m with m in Z_{2L}: period 4 pi.
  Vec3 out;
  for (int a = 0; a < 3; ++a) {
    int w = wrap(m[a], 2 * side_);
    if (w >= side_) w -= 2 * side_;
    out[a] = kTwoPi * w / side_;
  }
  return out;
}

Index3 DualGrid::v_index(const Index3& m, std::size_t p) const {
  const std::size_t L = side_;
  Index3 pc{static_cast<int>(p / (L * L)), static_cast<int>((p / L) % L), static_cast<int>(p % L)};
  return {wrap(2 * pc[0] + m[0], 2 * side_), wrap(2 * pc[1] + m[1], 2 * side_),
          wrap(2 * pc[2] + m[2], 2 * side_)};
}

Vec3 DualGrid::velocity(const Index3& u) const {
  return {half_step_angle(u[0], side_, 2 * side_), half_step_angle(u[1], side_, 2 * side_),
          half_step_angle(u[2], side_, 2 * side_)};
}

std::size_t DualGrid::p_for(const Index3& m, const Index3& u) const {
  std::size_t p = 0;
  for (int a = 0; a < 3; ++a) {
    int d = wrap(u[a] - m[a], 2 * side_);
    require(d % 2 == 0, "velocity index parity does not match xi");
    p = p * side_ + static_cast<std::size_t>(d / 2);
  }
  return p;
}

Vec3 WignerField::macroscopic_xi(const Index3& m) const {
  Vec3 x = grid.xi(m);
  for (auto& c : x) c /= eps;
  return x;
}

ObservableSymbol ObservableSymbol::from_function(
    const DualGrid& grid, double eps, const std::function<cplx(const Vec3&, const Vec3&)>& fn) {
  require(eps > 0.0, "scale must be positive");
  ObservableSymbol o;
  o.grid = grid;
  o.eps = eps;
  o.slices.resize(grid.slice_count());
  for (std::size_t s = 0; s < grid.slice_count(); ++s) {
    const Index3& m = grid.xi_indices()[s];
    Vec3 xi = grid.xi(m);
    for (auto& c : xi) c /= eps;
    auto& sl = o.slices[s];
    sl.resize(grid.slice_size());
    for (std::size_t p = 0; p < sl.size(); ++p) sl[p] = fn(xi, grid.velocity(grid.v_index(m, p)));
  }
  return o;
}

double ObservableSymbol::sup() const {
  double s = 0.0;
  for (const auto& sl : slices)
    for (const auto& x : sl) s = std::max(s, std::abs(x));
  return s;
}

double ObservableSymbol::xi_sup_integral() const {
  double total = 0.0;
  for (const auto& sl : slices) {
    double s = 0.0;
    for (const auto& x : sl) s = std::max(s, std::abs(x));
    total += s;
  }
  return total;
}

WignerField wigner_fourier(const evolution::WaveFunction& psi, double eps, const DualGrid& grid) {
  require(eps > 0.0, "scale must be positive");
  if (psi.side() != grid.side())
    fail(ErrorCode::kGridMismatch, "wave function and dual grid sides differ");
  const double bytes = 16.0 * grid.slice_count() * grid.slice_size();
  if (bytes > 2.0e9) fail(ErrorCode::kResourceExceeded, "Wigner field exceeds memory budget");
  evolution::WaveFunction a = psi.in(evolution::Representation::kMomentum);
  lattice::MomentumGrid mg(psi.side());
  WignerField w;
  w.grid = grid;
  w.eps = eps;
  w.slices.resize(grid.slice_count());
  for (std::size_t s = 0; s < grid.slice_count(); ++s) {
    const Index3& m = grid.xi_indices()[s];
    auto& sl = w.slices[s];
    sl.resize(grid.slice_size());
    for (std::size_t p = 0; p < sl.size(); ++p) {
      auto pc = mg.coords(p);
      std::size_t q = mg.index({pc[0] + m[0], pc[1] + m[1], pc[2] + m[2]});
      sl[p] = std::conj(a[p]) * a[q];
    }
  }
  return w;
}

cplx pair_observable(const WignerField& w, const ObservableSymbol& o) {
  if (w.grid.side() != o.grid.side())
    fail(ErrorCode::kGridMismatch, "Wigner field and observable live on different lattices");
  cplx total = 0.0;
  for (std::size_t s = 0; s < o.grid.slice_count(); ++s) {
    long ws = w.grid.slot(o.grid.xi_indices()[s]);
    if (ws < 0) fail(ErrorCode::kGridMismatch, "observable slice missing from Wigner field");
    const auto& ow = o.slices[s];
    const auto& ww = w.slices[ws];
    cplx acc = 0.0;
    for (std::size_t p = 0; p < ow.size(); ++p) acc += std::conj(ow[p]) * ww[p];
    total += acc;
  }
  return total;
}

namespace {

PositionWigner to_position(const DualGrid& grid, const std::vector<std::vector<cplx>>& slices,
                           double scale_power) {
  const int L = grid.side();
  const int P = 2 * L;
  const std::size_t n = static_cast<std::size_t>(P) * P * P;
  if (grid.slice_count() != n)
    fail(ErrorCode::kGridMismatch, "position transform needs the full dual grid");
  if (16.0 * n * n > 1.0e9) fail(ErrorCode::kResourceExceeded, "position Wigner field too large");
  PositionWigner out;
  out.side = L;
  out.values.assign(n * n, cplx(0.0));
  Fft3 fft(P);
  // Unitary backward transform carries (2L)^{-3/2}; rescale to the wanted
  // normalization (2L)^{3 * scale_power / 2}.
  const double scale = std::pow(static_cast<double>(n), 0.5 * scale_power);
  lattice::MomentumGrid ug(P);
  std::vector<cplx> buf(n);
  for (std::size_t ui = 0; ui < n; ++ui) {
    Index3 u = ug.coords(ui);
    std::fill(buf.begin(), buf.end(), cplx(0.0));
    for (std::size_t mi = 0; mi < n; ++mi) {
      Index3 m = ug.coords(mi);
      if ((m[0] - u[0]) % 2 || (m[1] - u[1]) % 2 || (m[2] - u[2]) % 2) continue;
      buf[mi] = slices[grid.slot(m)][grid.p_for(m, u)];
    }
    fft.backward(buf.data());
    for (std::size_t j = 0; j < n; ++j) out.values[j * n + ui] = scale * buf[j];
  }
  return out;
}

}  // namespace

PositionWigner wigner_position(const WignerField& w) { return to_position(w.grid, w.slices, -1.0); }

PositionWigner observable_position(const ObservableSymbol& o) {
  return to_position(o.grid, o.slices, 1.0);
}

EnsembleWigner ensemble_wigner(const disorder::DisorderSpec& spec,
                               const evolution::WaveFunction& psi0, double t, double eps,
                               int count, const DualGrid& grid,
                               const evolution::PropagatorConfig& cfg) {
  require(count >= 2, "ensemble_wigner needs count >= 2");
  const std::size_t S = grid.slice_count(), N = grid.slice_size();
  std::vector<std::vector<cplx>> sum(S, std::vector<cplx>(N));
  std::vector<std::vector<double>> sum2(S, std::vector<double>(N));
  EnsembleWigner out;
  out.count = count;
  out.realization_hashes.resize(count);
  for (std::size_t b0 = 0; b0 < static_cast<std::size_t>(count); b0 += kReductionBlock) {
    const std::size_t b1 = std::min<std::size_t>(count, b0 + kReductionBlock);
    std::vector<WignerField> fields(b1 - b0);
    parallel_for(b1 - b0, [&](std::size_t k) {
      const std::size_t r = b0 + k;
      std::vector<double> pot;
      if (spec.lambda != 0.0) {
        auto real = disorder::sample_potential(spec, psi0.side(), r);
        out.realization_hashes[r] = real.hash();
        pot = std::move(real.values);
      }
      evolution::Propagator prop(psi0.side(), pot, spec.lambda, cfg);
      evolution::WaveFunction psi = psi0;
      prop.advance(psi, t);
      fields[k] = wigner_fourier(psi, eps, grid);
    });
    std::vector<std::vector<cplx>> bs(S, std::vector<cplx>(N));
    std::vector<std::vector<double>> bs2(S, std::vector<double>(N));
    for (const auto& f : fields)
      for (std::size_t s = 0; s < S; ++s)
        for (std::size_t p = 0; p < N; ++p) {
          bs[s][p] += f.slices[s][p];
          bs2[s][p] += std::norm(f.slices[s][p]);
        }
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t p = 0; p < N; ++p) {
        sum[s][p] += bs[s][p];
        sum2[s][p] += bs2[s][p];
      }
  }
  out.mean.grid = grid;
  out.mean.eps = eps;
  out.mean.slices.assign(S, std::vector<cplx>(N));
  out.stderr_.assign(S, std::vector<double>(N));
  const double n = count;
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t p = 0; p < N; ++p) {
      cplx m = sum[s][p] / n;
      out.mean.slices[s][p] = m;
      double var = std::max(0.0, (sum2[s][p] / n - std::norm(m)) * n / (n - 1.0));
      out.stderr_[s][p] = std::sqrt(var / n);
    }
  return out;
}

ContinuityCheck wigner_l2_continuity_check(const evolution::WaveFunction& psi1,
                                           const evolution::WaveFunction& psi2,
                                           const ObservableSymbol& o) {
  if (psi1.side() != psi2.side() || psi1.side() != o.grid.side())
    fail(ErrorCode::kGridMismatch, "continuity check inputs live on different lattices");
  WignerField w1 = wigner_fourier(psi1, o.eps, o.grid);
  WignerField w2 = wigner_fourier(psi2, o.eps, o.grid);
  ContinuityCheck c;
  c.lhs = std::abs(pair_observable(w1, o) - pair_observable(w2, o));
  const double d = evolution::distance(psi1, psi2);
  const double s = o.xi_sup_integral();
  c.rhs = s * psi1.norm() * d;
  c.rhs_guaranteed = s * d * (psi1.norm() + psi2.norm());
  c.violated = c.lhs > c.rhs;
  return c;
}

void write_xi_slice_csv(std::ostream& os, const EnsembleWigner& w, const Index3& m) {
  long s = w.mean.grid.slot(m);
  if (s < 0) fail(ErrorCode::kGridMismatch, "requested xi slice is not on the grid");
  os << "vx,vy,vz,re,im,stderr\n";
  os.precision(17);
  const auto& g = w.mean.grid;
  for (std::size_t p = 0; p < g.slice_size(); ++p) {
    Vec3 v = g.velocity(g.v_index(g.xi_indices()[s], p));
    const cplx x = w.mean.slices[s][p];
    os << v[0] << ',' << v[1] << ',' << v[2] << ',' << x.real() << ',' << x.imag() << ','
       << w.stderr_[s][p] << '\n';
  }
}

void write_v_slice_csv(std::ostream& os, const EnsembleWigner& w, const Index3& u) {
  os << "xi_x,xi_y,xi_z,re,im,stderr\n";
  os.precision(17);
  const auto& g = w.mean.grid;
  for (std::size_t s = 0; s < g.slice_count(); ++s) {
    const Index3& m = g.xi_indices()[s];
    if ((m[0] - u[0]) % 2 || (m[1] - u[1]) % 2 || (m[2] - u[2]) % 2) continue;
    std::size_t p = g.p_for(m, u);
    Vec3 xi = w.mean.macroscopic_xi(m);
    const cplx x = w.mean.slices[s][p];
    os << xi[0] << ',' << xi[1] << ',' << xi[2] << ',' << x.real() << ',' << x.imag() << ','
       << w.stderr_[s][p] << '\n';
  }
}

}  // namespace qdlab::wigner
