// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/fft.hpp"
#include "core/lattice.hpp"
#include "core/parallel.hpp"

namespace qdlab::evolution {

WaveFunction::WaveFunction(int side, Representation rep) : side_(side), rep_(rep) {
  require(side >= 1, "lattice side must be positive");
  amp_.assign(static_cast<std::size_t>(side) * side * side, cplx(0.0));
}

void WaveFunction::to_momentum() {
  if (rep_ == Representation::kMomentum) return;
  Fft3(side_).forward(amp_.data());
  rep_ = Representation::kMomentum;
}

void WaveFunction::to_position() {
  if (rep_ == Representation::kPosition) return;
  Fft3(side_).backward(amp_.data());
  rep_ = Representation::kPosition;
}

WaveFunction WaveFunction::in(Representation rep) const {
  WaveFunction w = *this;
  if (rep == Representation::kMomentum) w.to_momentum();
  else w.to_position();
  return w;
}

double WaveFunction::norm() const {
  double s = 0.0;
  for (const auto& a : amp_) s += std::norm(a);
  return std::sqrt(s);
}

void WaveFunction::normalize() {
  double n = norm();
  require(n > 0.0, "cannot normalize a zero wave function");
  for (auto& a : amp_) a /= n;
}

double distance(const WaveFunction& a, const WaveFunction& b) {
  require(a.side() == b.side(), "wave functions live on different lattices");
  WaveFunction bb = b.in(a.representation());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - bb[i]);
  return std::sqrt(s);
}

namespace {

double min_image(double d, int side) {
  d = std::fmod(d, static_cast<double>(side));
  if (d >= 0.5 * side) d -= side;
  if (d < -0.5 * side) d += side;
  return d;
}

}  // namespace

WaveFunction gaussian_packet(int side, const Vec3& center, double width, const Vec3& k0) {
  require(width > 0.0, "packet width must be positive");
  WaveFunction psi(side);
  lattice::MomentumGrid grid(side);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    auto n = grid.coords(i);
    double r2 = 0.0, phase = 0.0;
    for (int a = 0; a < 3; ++a) {
      double d = min_image(n[a] - center[a], side);
      r2 += d * d;
      phase += k0[a] * d;
    }
    psi[i] = std::exp(-r2 / (4.0 * width * width)) * std::polar(1.0, phase);
  }
  psi.normalize();
  return psi;
}

WaveFunction point_mass(int side, const Index3& site) {
  WaveFunction psi(side);
  psi[lattice::MomentumGrid(side).index(site)] = 1.0;
  return psi;
}

Propagator::Propagator(int side, std::span<const double> potential, double lambda,
                       const PropagatorConfig& cfg)
    : side_(side), lambda_(lambda), cfg_(cfg) {
  require(cfg.dt > 0.0, "time step must be positive");
  const std::size_t n = static_cast<std::size_t>(side) * side * side;
  require(potential.empty() || potential.size() == n, "potential size does not match lattice");
  free_ = potential.empty() || lambda == 0.0;
  potential_.assign(potential.begin(), potential.end());
  lattice::MomentumGrid grid(side);
  kinetic_.resize(n);
  for (std::size_t i = 0; i < n; ++i) kinetic_[i] = lattice::dispersion(grid.momentum(i));
  spec_lo_ = 0.0;
  spec_hi_ = lattice::kBandMax;
  if (!free_) {
    auto [lo, hi] = std::minmax_element(potential_.begin(), potential_.end());
    spec_lo_ += std::min(lambda * *lo, lambda * *hi);
    spec_hi_ += std::max(lambda * *lo, lambda * *hi);
  }
}

void Propagator::advance(WaveFunction& psi, double t) const {
  require(t >= 0.0, "evolution time must be nonnegative");
  require(psi.side() == side_, "wave function lattice does not match propagator");
  if (t == 0.0) return;
  const double n0 = psi.norm();
  if (free_) advance_free(psi, t);
  else if (cfg_.scheme == Scheme::kStrangSplit) advance_strang(psi, t);
  else advance_chebyshev(psi, t);
  const double drift = std::abs(psi.norm() - n0);
  if (drift > cfg_.tolerance)
    fail(ErrorCode::kToleranceExceeded, "norm drift " + std::to_string(drift) + " exceeds tolerance");
}

void Propagator::advance_free(WaveFunction& psi, double t) const {
  const auto rep = psi.representation();
  psi.to_momentum();
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= std::polar(1.0, -t * kinetic_[i]);
  if (rep == Representation::kPosition) psi.to_position();
}

void Propagator::advance_strang(WaveFunction& psi, double t) const {
  const auto rep = psi.representation();
  const long steps = std::max(1L, static_cast<long>(std::ceil(t / cfg_.dt - 1e-9)));
  const double h = t / static_cast<double>(steps);
  const std::size_t n = psi.size();
  std::vector<cplx> half(n), kin(n);
  for (std::size_t i = 0; i < n; ++i) {
    half[i] = std::polar(1.0, -0.5 * h * lambda_ * potential_[i]);
    kin[i] = std::polar(1.0, -h * kinetic_[i]);
  }
  Fft3 fft(side_);
  psi.to_position();
  cplx* a = psi.data();
  for (long s = 0; s < steps; ++s) {
    for (std::size_t i = 0; i < n; ++i) a[i] *= half[i];
    fft.forward(a);
    for (std::size_t i = 0; i < n; ++i) a[i] *= kin[i];
    fft.backward(a);
    for (std::size_t i = 0; i < n; ++i) a[i] *= half[i];
  }
  if (rep == Representation::kMomentum) psi.to_momentum();
}

void Propagator::apply_h_position(const cplx* in, cplx* out) const {
  const int L = side_;
  const std::size_t LL = static_cast<std::size_t>(L) * L;
  for (int x = 0; x < L; ++x) {
    const int xp = (x + 1) % L, xm = (x + L - 1) % L;
    for (int y = 0; y < L; ++y) {
      const int yp = (y + 1) % L, ym = (y + L - 1) % L;
      for (int z = 0; z < L; ++z) {
        const int zp = (z + 1) % L, zm = (z + L - 1) % L;
        const std::size_t i = x * LL + y * L + z;
        cplx nb = in[xp * LL + y * L + z] + in[xm * LL + y * L + z] +
                  in[x * LL + yp * L + z] + in[x * LL + ym * L + z] +
                  in[x * LL + y * L + zp] + in[x * LL + y * L + zm];
        double diag = 3.0 + (free_ ? 0.0 : lambda_ * potential_[i]);
        out[i] = diag * in[i] - 0.5 * nb;
      }
    }
  }
}

void Propagator::advance_chebyshev(WaveFunction& psi, double t) const {
  const auto rep = psi.representation();
  psi.to_position();
  const double center = 0.5 * (spec_hi_ + spec_lo_);
  const double half = 0.5 * (spec_hi_ - spec_lo_) * 1.01 + 1e-3;
  // Chunks with half*tau <= 20 keep the expansion short and well conditioned.
  const long chunks = std::max(1L, static_cast<long>(std::ceil(half * t / 20.0)));
  const double tau = t / static_cast<double>(chunks);
  const double z = half * tau;
  std::vector<double> coef;
  for (int k = 0;; ++k) {
    double j = std::cyl_bessel_j(static_cast<double>(k), z);
    coef.push_back(j);
    if (k > z + 8 && std::abs(j) < 1e-18) break;
  }
  const std::size_t n = psi.size();
  std::vector<cplx> t0(n), t1(n), t2(n), acc(n);
  const cplx shift = std::polar(1.0, -center * tau);
  auto scaled_h = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
    apply_h_position(in.data(), out.data());
    for (std::size_t i = 0; i < n; ++i) out[i] = (out[i] - center * in[i]) / half;
  };
  for (long c = 0; c < chunks; ++c) {
    std::copy(psi.data(), psi.data() + n, t0.begin());
    for (std::size_t i = 0; i < n; ++i) acc[i] = coef[0] * t0[i];
    scaled_h(t0, t1);
    cplx ik(0.0, -1.0);
    for (std::size_t i = 0; i < n; ++i) acc[i] += 2.0 * ik * coef[1] * t1[i];
    cplx phase = ik;
    for (std::size_t k = 2; k < coef.size(); ++k) {
      scaled_h(t1, t2);
      phase *= cplx(0.0, -1.0);
      const cplx w = 2.0 * phase * coef[k];
      for (std::size_t i = 0; i < n; ++i) {
        t2[i] = 2.0 * t2[i] - t0[i];
        acc[i] += w * t2[i];
      }
      std::swap(t0, t1);
      std::swap(t1, t2);
    }
    for (std::size_t i = 0; i < n; ++i) psi[i] = shift * acc[i];
  }
  if (rep == Representation::kMomentum) psi.to_momentum();
}

WaveFunction Propagator::apply_hamiltonian(const WaveFunction& psi) const {
  WaveFunction in = psi.in(Representation::kPosition);
  WaveFunction out(side_);
  apply_h_position(in.data(), out.data());
  return out;
}

double Propagator::energy(const WaveFunction& psi) const {
  WaveFunction x = psi.in(Representation::kPosition);
  WaveFunction k = psi.in(Representation::kMomentum);
  double kin = 0.0, pot = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    kin += kinetic_[i] * std::norm(k[i]);
    nn += std::norm(x[i]);
    if (!free_) pot += lambda_ * potential_[i] * std::norm(x[i]);
  }
  return (kin + pot) / nn;
}

WaveFunction evolve(const WaveFunction& psi0, const disorder::DisorderRealization& realization,
                    double lambda, double t, const PropagatorConfig& cfg) {
  Propagator prop(psi0.side(), realization.values, lambda, cfg);
  WaveFunction psi = psi0;
  prop.advance(psi, t);
  return psi;
}

Vec3 centroid(const WaveFunction& psi) {
  WaveFunction x = psi.in(Representation::kPosition);
  const int L = x.side();
  lattice::MomentumGrid grid(L);
  std::array<double, 3> c{}, s{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    double rho = std::norm(x[i]);
    if (rho == 0.0) continue;
    auto n = grid.coords(i);
    for (int a = 0; a < 3; ++a) {
      double th = kTwoPi * n[a] / L;
      c[a] += rho * std::cos(th);
      s[a] += rho * std::sin(th);
    }
  }
  Vec3 out;
  for (int a = 0; a < 3; ++a) {
    double th = std::atan2(s[a], c[a]);
    if (th < 0) th += kTwoPi;
    out[a] = th * L / kTwoPi;
  }
  return out;
}

double msd(const WaveFunction& psi) {
  WaveFunction x = psi.in(Representation::kPosition);
  const int L = x.side();
  Vec3 c = centroid(x);
  lattice::MomentumGrid grid(L);
  // Per-axis displacement tables: minimal image of (n - c).
  std::array<std::vector<double>, 3> d2;
  for (int a = 0; a < 3; ++a) {
    d2[a].resize(L);
    for (int n = 0; n < L; ++n) {
      double d = min_image(n - c[a], L);
      d2[a][n] = d * d;
    }
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double rho = std::norm(x[i]);
    auto n = grid.coords(i);
    num += rho * (d2[0][n[0]] + d2[1][n[1]] + d2[2][n[2]]);
    den += rho;
  }
  return num / den;
}

std::vector<MsdSample> msd_time_series(const disorder::DisorderSpec& spec,
                                       const WaveFunction& psi0, std::uint64_t index,
                                       std::span<const double> times,
                                       const PropagatorConfig& cfg,
                                       std::uint64_t* realization_hash) {
  const int L = psi0.side();
  std::vector<double> pot;
  std::uint64_t seed = 0;
  if (spec.lambda != 0.0) {
    auto real = disorder::sample_potential(spec, L, index);
    seed = real.derived_seed;
    if (realization_hash) *realization_hash = real.hash();
    pot = std::move(real.values);
  } else {
    seed = disorder::derive_seed(spec.master_seed, index);
    if (realization_hash) *realization_hash = 0;
  }
  Propagator prop(L, pot, spec.lambda, cfg);
  WaveFunction psi = psi0.in(Representation::kPosition);
  const double cutoff = (L / 4.0) * (L / 4.0);
  std::vector<MsdSample> out;
  double now = 0.0;
  for (double t : times) {
    require(t >= now, "sample times must be ascending and nonnegative");
    prop.advance(psi, t - now);
    now = t;
    MsdSample s{index, seed, spec.lambda, L, t, msd(psi), psi.norm(), prop.energy(psi)};
    out.push_back(s);
    if (s.msd > cutoff) break;
  }
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "slope fit needs >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

MsdScalingReport msd_scaling_report(const disorder::DisorderSpec& spec,
                                    const WaveFunction& psi0, std::span<const double> times,
                                    int count, std::span<const MsdWindow> windows,
                                    const PropagatorConfig& cfg) {
  require(count >= 1, "ensemble count must be positive");
  require(!times.empty() && times.front() == 0.0, "time grid must start at t = 0");
  MsdScalingReport rep;
  rep.count = count;
  rep.series.resize(count);
  rep.realization_hashes.resize(count);
  parallel_for(count, [&](std::size_t r) {
    rep.series[r] = msd_time_series(spec, psi0, r, times, cfg, &rep.realization_hashes[r]);
  });
  std::size_t common = times.size();
  for (const auto& s : rep.series) {
    std::size_t ok = 0;
    const double cutoff = (psi0.side() / 4.0) * (psi0.side() / 4.0);
    while (ok < s.size() && s[ok].msd <= cutoff) ++ok;
    common = std::min(common, ok);
  }
  rep.times.assign(times.begin(), times.begin() + common);
  rep.mean_msd.assign(common, 0.0);
  rep.stderr_msd.assign(common, 0.0);
  rep.mean_excess.assign(common, 0.0);
  for (std::size_t j = 0; j < common; ++j) {
    double s = 0.0, ss = 0.0;
    for (const auto& ser : rep.series) s += ser[j].msd;
    const double m = s / count;
    for (const auto& ser : rep.series) ss += (ser[j].msd - m) * (ser[j].msd - m);
    rep.mean_msd[j] = m;
    rep.stderr_msd[j] = count > 1 ? std::sqrt(ss / (count - 1) / count) : 0.0;
  }
  for (std::size_t j = 0; j < common; ++j) rep.mean_excess[j] = rep.mean_msd[j] - rep.mean_msd[0];

  auto fit_window = [&](const MsdWindow& w, const std::vector<double>& excess) {
    std::vector<double> xs, ys;
    for (std::size_t j = 0; j < common; ++j)
      if (rep.times[j] > 0.0 && rep.times[j] >= w.t_lo && rep.times[j] <= w.t_hi) {
        xs.push_back(rep.times[j]);
        ys.push_back(excess[j]);
      }
    if (xs.size() < 2) return std::make_pair(0, std::nan(""));
    for (double y : ys)
      if (!(y > 0.0)) return std::make_pair(static_cast<int>(xs.size()), std::nan(""));
    return std::make_pair(static_cast<int>(xs.size()), loglog_slope(xs, ys));
  };
  for (const auto& w : windows) {
    MsdWindowFit f;
    f.window = w;
    auto [pts, slope] = fit_window(w, rep.mean_excess);
    f.points = pts;
    f.exponent = slope;
    if (count > 1 && std::isfinite(slope)) {
      std::vector<double> jk(count);
      for (int drop = 0; drop < count; ++drop) {
        std::vector<double> ex(common);
        for (std::size_t j = 0; j < common; ++j) {
          double s = 0.0;
          for (int r = 0; r < count; ++r)
            if (r != drop) s += rep.series[r][j].msd;
          ex[j] = s / (count - 1);
        }
        for (std::size_t j = common; j-- > 0;) ex[j] -= ex[0];
        jk[drop] = fit_window(w, ex).second;
      }
      double mean = std::accumulate(jk.begin(), jk.end(), 0.0) / count, var = 0.0;
      for (double v : jk) var += (v - mean) * (v - mean);
      var *= static_cast<double>(count - 1) / count;
      f.ci95 = 1.96 * std::sqrt(var);
    }
    rep.fits.push_back(f);
  }
  return rep;
}

namespace {

std::vector<cplx> phases(std::span<const double> e, double t) {
  std::vector<cplx> p(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) p[i] = std::polar(1.0, -t * e[i]);
  return p;
}

double norm2(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const auto& a : v) s += std::norm(a);
  return s;
}

}  // namespace

DuhamelDecomposition duhamel_terms(const WaveFunction& psi0,
                                   const disorder::DisorderRealization& realization,
                                   double lambda, double t, int order,
                                   const DuhamelOptions& opt) {
  require(order >= 1, "Duhamel order must be >= 1");
  require(t >= 0.0, "time must be nonnegative");
  require(opt.resolution >= 1 && opt.refinements >= 0, "invalid quadrature resolution");
  const int L = psi0.side();
  const std::size_t n = psi0.size();
  require(realization.values.size() == n, "realization does not match lattice");
  lattice::MomentumGrid grid(L);
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = lattice::dispersion(grid.momentum(i));
  const auto& v = realization.values;
  Fft3 fft(L);

  PropagatorConfig exact_cfg{1.0, Scheme::kChebyshev, 1e-10};
  Propagator full(L, v, lambda, exact_cfg);

  DuhamelDecomposition out;
  out.order = order;
  out.t = t;
  out.exact = psi0.in(Representation::kPosition);
  full.advance(out.exact, t);

  const WaveFunction psi0_k = psi0.in(Representation::kMomentum);
  const std::vector<cplx> a0(psi0_k.values().begin(), psi0_k.values().end());
  double prev_err = -1.0;
  for (int level = 0; level <= opt.refinements; ++level) {
    const long M = std::max(1L, static_cast<long>(std::ceil(opt.resolution * std::max(t, 1e-12)))) << level;
    const std::size_t bytes = static_cast<std::size_t>(M + 1) * n * sizeof(cplx) * 2;
    if (bytes > (std::size_t{3} << 30))
      fail(ErrorCode::kResourceExceeded, "Duhamel grid exceeds memory budget");
    const double dt = t / static_cast<double>(M);
    const auto step = phases(e, dt);

    // prev[j] = psi^(n-1)(s_j) in position representation.
    std::vector<std::vector<cplx>> prev(M + 1, std::vector<cplx>(n));
    {
      std::vector<cplx> a = a0;
      for (long j = 0; j <= M; ++j) {
        if (j > 0)
          for (std::size_t i = 0; i < n; ++i) a[i] *= step[i];
        prev[j] = a;
        fft.backward(prev[j].data());
      }
    }
    std::vector<WaveFunction> terms;
    auto snapshot = [&](const std::vector<cplx>& x) {
      WaveFunction w(L);
      std::copy(x.begin(), x.end(), w.data());
      return w;
    };
    terms.push_back(snapshot(prev[M]));
    std::vector<std::vector<cplx>> cur(M + 1, std::vector<cplx>(n));
    for (int k = 1; k < order; ++k) {
      std::vector<cplx> g0(n), S(n), g(n);
      for (long j = 0; j <= M; ++j) {
        for (std::size_t i = 0; i < n; ++i) g[i] = v[i] * prev[j][i];
        fft.forward(g.data());
        if (j == 0) {
          g0 = g;
          S = g;
          std::fill(cur[0].begin(), cur[0].end(), cplx(0.0));
          continue;
        }
        const auto back = phases(e, j * dt);
        for (std::size_t i = 0; i < n; ++i) {
          S[i] = step[i] * S[i] + g[i];
          cplx integral = dt * (S[i] - 0.5 * back[i] * g0[i] - 0.5 * g[i]);
          cur[j][i] = cplx(0.0, -lambda) * integral;
        }
        fft.backward(cur[j].data());
      }
      std::swap(prev, cur);
      terms.push_back(snapshot(prev[M]));
    }

    // Remainder with the full propagator U(t - s), accumulated as
    // R_j = U(dt) R_{j-1} + h_j.
    WaveFunction R(L), h0(L);
    double bound_integral = 0.0;
    for (long j = 0; j <= M; ++j) {
      std::vector<cplx> h(n);
      for (std::size_t i = 0; i < n; ++i) h[i] = v[i] * prev[j][i];
      const double w = (j == 0 || j == M) ? 0.5 : 1.0;
      bound_integral += w * dt * norm2(h);
      if (j == 0) {
        std::copy(h.begin(), h.end(), R.data());
        std::copy(h.begin(), h.end(), h0.data());
        continue;
      }
      full.advance(R, dt);
      for (std::size_t i = 0; i < n; ++i) R[i] += h[i];
      if (j == M)
        for (std::size_t i = 0; i < n; ++i) R[i] -= 0.5 * h[i];
    }
    full.advance(h0, t);
    WaveFunction rem(L);
    for (std::size_t i = 0; i < n; ++i)
      rem[i] = cplx(0.0, -lambda) * dt * (R[i] - 0.5 * h0[i]);
    if (t == 0.0) rem = WaveFunction(L);

    WaveFunction partial(L);
    for (const auto& term : terms)
      for (std::size_t i = 0; i < n; ++i) partial[i] += term[i];
    double err = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err += std::norm(partial[i] + rem[i] - out.exact[i]);
      diff += std::norm(out.exact[i] - partial[i]);
    }
    err = std::sqrt(err);
    out.reconstruction_errors.push_back(err);
    out.terms = std::move(terms);
    out.remainder = std::move(rem);
    out.resolution = static_cast<int>(M);
    out.reconstruction_error = err;
    out.remainder_by_difference = std::sqrt(diff);
    out.unitarity_lhs = out.remainder.norm() * out.remainder.norm();
    out.unitarity_rhs = t * lambda * lambda * bound_integral;
    if (prev_err >= 0.0 && err >= prev_err && prev_err > opt.tolerance * 1e-3)
      fail(ErrorCode::kQuadratureDivergence,
           "Duhamel reconstruction error did not decrease under refinement");
    prev_err = err;
  }
  return out;
}

}  // namespace qdlab::evolution
