// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/kinetics.hpp"

#include <fftw3.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include "core/fft.hpp"

namespace qdlab::kinetics {

CollisionOperator::CollisionOperator(int vside, const KernelConfig& cfg)
    : grid_(vside), levels_(grid_), cfg_(cfg) {
  require(cfg.h > 0.0, "broadening must be positive");
  require(cfg.rate_scale > 0.0, "rate scale must be positive");
  require(cfg.shell != ShellModel::kBinned || cfg.bin_width > 0.0, "bin width must be positive");
  const auto e = levels_.energies();
  const auto w = levels_.weights();
  const Eigen::Index nl = static_cast<Eigen::Index>(levels_.count());
  const int nbins = static_cast<int>(std::ceil(lattice::kBandMax / cfg.bin_width));
  auto bin = [&](double x) {
    return std::clamp(static_cast<int>(std::floor(x / cfg.bin_width)), 0, nbins - 1);
  };
  coupling_.resize(nl, nl);
  for (Eigen::Index l = 0; l < nl; ++l)
    for (Eigen::Index m = 0; m < nl; ++m) {
      double g = cfg.shell == ShellModel::kGaussian
                     ? lattice::gaussian_delta(e[l] - e[m], cfg.h)
                     : (bin(e[l]) == bin(e[m]) ? 1.0 / cfg.bin_width : 0.0);
      coupling_(l, m) = cfg.rate_scale * kTwoPi * g;
    }
  rate_.assign(nl, 0.0);
  sqrt_w_.resize(nl);
  for (Eigen::Index l = 0; l < nl; ++l) {
    double r = 0.0;
    for (Eigen::Index m = 0; m < nl; ++m) r += coupling_(l, m) * w[m];
    rate_[l] = r;
    sqrt_w_(l) = std::sqrt(w[l]);
  }
  Eigen::MatrixXd S = sqrt_w_.asDiagonal() * coupling_ * sqrt_w_.asDiagonal();
  for (Eigen::Index l = 0; l < nl; ++l) S(l, l) -= rate_[l];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  eigval_ = es.eigenvalues();
  eigvec_ = es.eigenvectors();
}

double CollisionOperator::kernel(std::size_t u, std::size_t v) const {
  const auto lv = levels_.level_of();
  return coupling_(lv[u], lv[v]);
}

double CollisionOperator::spectral_gap() const {
  const double scale = std::max(eigval_.cwiseAbs().maxCoeff(),
                                *std::max_element(rate_.begin(), rate_.end()));
  const double tol = 1e-10 * scale;
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eigval_.size(); ++i)
    if (-eigval_(i) > tol) gap = std::min(gap, -eigval_(i));
  const auto mult = levels_.multiplicities();
  for (std::size_t l = 0; l < rate_.size(); ++l)
    if (mult[l] > 1 && rate_[l] > tol) gap = std::min(gap, rate_[l]);
  return gap;
}

void CollisionOperator::apply(std::span<const double> f, std::span<double> out) const {
  require(f.size() == size() && out.size() == size(), "density size does not match grid");
  const auto lv = levels_.level_of();
  const auto mult = levels_.multiplicities();
  const auto w = levels_.weights();
  const std::size_t nl = levels_.count();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(nl);
  for (std::size_t i = 0; i < f.size(); ++i) mean(lv[i]) += f[i];
  for (std::size_t l = 0; l < nl; ++l) mean(l) *= w[l] / static_cast<double>(mult[l]);
  Eigen::VectorXd gain = coupling_ * mean;
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = gain(lv[i]) - rate_[lv[i]] * f[i];
}

CollisionOperator::StepMap CollisionOperator::step_map(double T) const {
  require(T >= 0.0, "time must be nonnegative");
  StepMap m;
  Eigen::VectorXd ex = (eigval_.array() * T).exp().matrix();
  Eigen::MatrixXd P = eigvec_ * ex.asDiagonal() * eigvec_.transpose();
  m.level = sqrt_w_.cwiseInverse().asDiagonal() * P * sqrt_w_.asDiagonal();
  m.decay.resize(rate_.size());
  for (std::size_t l = 0; l < rate_.size(); ++l) m.decay[l] = std::exp(-rate_[l] * T);
  return m;
}

namespace {

template <class Mat>
void apply_map_cols(const CollisionOperator::StepMap& map, const lattice::EnergyLevels& levels,
                    Mat& cols) {
  const auto lv = levels.level_of();
  const auto mult = levels.multiplicities();
  const Eigen::Index nl = static_cast<Eigen::Index>(levels.count());
  const Eigen::Index n = cols.rows();
  Mat mean = Mat::Zero(nl, cols.cols());
  for (Eigen::Index c = 0; c < cols.cols(); ++c)
    for (Eigen::Index i = 0; i < n; ++i) mean(lv[i], c) += cols(i, c);
  for (Eigen::Index l = 0; l < nl; ++l) mean.row(l) /= static_cast<double>(mult[l]);
  Mat next(nl, cols.cols());
  if constexpr (std::is_same_v<typename Mat::Scalar, cplx>) {
    Eigen::MatrixXd re = map.level * mean.real();
    Eigen::MatrixXd im = map.level * mean.imag();
    next.real() = re;
    next.imag() = im;
  } else {
    next = map.level * mean;
  }
  for (Eigen::Index c = 0; c < cols.cols(); ++c)
    for (Eigen::Index i = 0; i < n; ++i) {
      const int l = lv[i];
      cols(i, c) = next(l, c) + map.decay[l] * (cols(i, c) - mean(l, c));
    }
}

}  // namespace

void CollisionOperator::apply_map(const StepMap& map, Eigen::MatrixXcd& cols) const {
  require(static_cast<std::size_t>(cols.rows()) == size(), "density size does not match grid");
  apply_map_cols(map, levels_, cols);
}

void CollisionOperator::apply_map(const StepMap& map, Eigen::MatrixXd& cols) const {
  require(static_cast<std::size_t>(cols.rows()) == size(), "density size does not match grid");
  apply_map_cols(map, levels_, cols);
}

void CollisionOperator::apply_map(const StepMap& map, std::span<double> f) const {
  require(f.size() == size(), "density size does not match grid");
  Eigen::Map<Eigen::MatrixXd> col(f.data(), static_cast<Eigen::Index>(f.size()), 1);
  Eigen::MatrixXd tmp = col;
  apply_map_cols(map, levels_, tmp);
  col = tmp;
}

void CollisionOperator::exponentiate(double T, std::span<double> f) const {
  apply_map(step_map(T), f);
}

double PositionGrid::cell_volume() const { return std::pow(spacing, resolved_axes()); }

double PositionGrid::coord(int axis, int i) const {
  const int m = n[axis];
  int k = i % m;
  if (k >= (m + 1) / 2) k -= m;
  return k * spacing;
}

Index3 PositionGrid::coords(std::size_t idx) const {
  return {static_cast<int>(idx / (static_cast<std::size_t>(n[1]) * n[2])),
          static_cast<int>((idx / n[2]) % n[1]), static_cast<int>(idx % n[2])};
}

double PhaseSpaceDensity::mass() const {
  double s = 0.0;
  for (double v : f) s += v;
  return s * x.cell_volume() / static_cast<double>(nv());
}

std::vector<double> PhaseSpaceDensity::velocity_marginal() const {
  const std::size_t Nv = nv();
  std::vector<double> m(Nv, 0.0);
  for (std::size_t ix = 0; ix < x.size(); ++ix)
    for (std::size_t v = 0; v < Nv; ++v) m[v] += f[ix * Nv + v];
  for (auto& v : m) v *= x.cell_volume();
  return m;
}

std::vector<double> PhaseSpaceDensity::density() const {
  const std::size_t Nv = nv();
  std::vector<double> rho(x.size(), 0.0);
  for (std::size_t ix = 0; ix < x.size(); ++ix) {
    double s = 0.0;
    for (std::size_t v = 0; v < Nv; ++v) s += f[ix * Nv + v];
    rho[ix] = s / static_cast<double>(Nv);
  }
  return rho;
}

namespace {

Vec3 variance_of(const PositionGrid& g, std::span<const double> rho) {
  Vec3 mean{}, var{};
  double tot = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    auto c = g.coords(i);
    tot += rho[i];
    for (int a = 0; a < 3; ++a) mean[a] += rho[i] * g.coord(a, c[a]);
  }
  for (auto& m : mean) m /= tot;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    auto c = g.coords(i);
    for (int a = 0; a < 3; ++a) {
      double d = g.coord(a, c[a]) - mean[a];
      var[a] += rho[i] * d * d;
    }
  }
  for (auto& v : var) v /= tot;
  return var;
}

double entropy_of(std::span<const double> marginal) {
  double tot = 0.0;
  for (double v : marginal) tot += v;
  double s = 0.0;
  for (double v : marginal) {
    double p = v / tot;
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

}  // namespace

Vec3 PhaseSpaceDensity::variance() const { return variance_of(x, density()); }

double PhaseSpaceDensity::velocity_entropy() const { return entropy_of(velocity_marginal()); }

double PhaseSpaceDensity::min_value() const { return *std::min_element(f.begin(), f.end()); }

struct BoltzmannSolver::Impl {
  std::optional<CollisionOperator> owned;
  const CollisionOperator* op = nullptr;
  BoltzmannConfig cfg;
  PositionGrid xg;
  int vside = 0;
  std::size_t nv = 0, nx = 0;
  CollisionOperator::StepMap map;
  // Spectral path: modes(v, j) for X-Fourier mode j.
  Eigen::MatrixXcd modes;
  Eigen::MatrixXcd half_phase;
  fftw_plan fwd = nullptr, bwd = nullptr;
  fftw_plan rho_bwd = nullptr;
  // Upwind path: values(v, x).
  Eigen::MatrixXd values;
  std::array<std::vector<double>, 3> courant;

  ~Impl() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (rho_bwd) fftw_destroy_plan(rho_bwd);
  }

  void init(const PhaseSpaceDensity& f0) {
    xg = f0.x;
    vside = f0.vside;
    nv = f0.nv();
    nx = xg.size();
    require(op->size() == nv, "collision operator grid does not match density");
    require(f0.f.size() == nv * nx, "density storage has the wrong size");
    require(cfg.dT > 0.0, "time step must be positive");
    map = op->step_map(cfg.dT);
    const auto& vg = op->grid();
    if (cfg.transport == TransportScheme::kSpectral) {
      modes.resize(static_cast<Eigen::Index>(nv), static_cast<Eigen::Index>(nx));
      for (std::size_t i = 0; i < nv * nx; ++i) modes.data()[i] = f0.f[i];
      int dims[3] = {xg.n[0], xg.n[1], xg.n[2]};
      {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        auto* p = reinterpret_cast<fftw_complex*>(modes.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fwd = fftw_plan_many_dft(3, dims, static_cast<int>(nv), p, nullptr, static_cast<int>(nv), 1,
                                 p, nullptr, static_cast<int>(nv), 1, FFTW_FORWARD, flags);
        bwd = fftw_plan_many_dft(3, dims, static_cast<int>(nv), p, nullptr, static_cast<int>(nv), 1,
                                 p, nullptr, static_cast<int>(nv), 1, FFTW_BACKWARD, flags);
        std::vector<cplx> tmp(nx);
        auto* q = reinterpret_cast<fftw_complex*>(tmp.data());
        rho_bwd = fftw_plan_dft(3, dims, q, q, FFTW_BACKWARD, flags);
      }
      if (!fwd || !bwd || !rho_bwd) fail(ErrorCode::kResourceExceeded, "FFTW planning failed");
      fftw_execute_dft(fwd, reinterpret_cast<fftw_complex*>(modes.data()),
                       reinterpret_cast<fftw_complex*>(modes.data()));
      half_phase.resize(modes.rows(), modes.cols());
      for (std::size_t j = 0; j < nx; ++j) {
        auto c = xg.coords(j);
        Vec3 xi{};
        for (int a = 0; a < 3; ++a) {
          int m = xg.n[a];
          int k = c[a];
          if (k >= (m + 1) / 2) k -= m;
          xi[a] = kTwoPi * k / (m * xg.spacing);
        }
        for (std::size_t v = 0; v < nv; ++v) {
          Vec3 vel = lattice::dispersion_gradient(vg.momentum(v));
          half_phase(v, j) = std::polar(1.0, -0.5 * cfg.dT * dot(xi, vel));
        }
      }
    } else {
      values.resize(static_cast<Eigen::Index>(nv), static_cast<Eigen::Index>(nx));
      for (std::size_t i = 0; i < nv * nx; ++i) values.data()[i] = f0.f[i];
      for (int a = 0; a < 3; ++a) {
        if (xg.n[a] == 1) continue;
        courant[a].resize(nv);
        for (std::size_t v = 0; v < nv; ++v) {
          double c = lattice::dispersion_gradient(vg.momentum(v))[a] * 0.5 * cfg.dT / xg.spacing;
          if (std::abs(c) > 1.0)
            fail(ErrorCode::kCflViolation,
                 "upwind Courant number " + std::to_string(std::abs(c)) + " exceeds 1");
          courant[a][v] = c;
        }
      }
    }
  }

  void upwind_half() {
    for (int a = 0; a < 3; ++a) {
      if (xg.n[a] == 1) continue;
      Eigen::MatrixXd next(values.rows(), values.cols());
      for (std::size_t j = 0; j < nx; ++j) {
        auto c = xg.coords(j);
        Index3 lo = c, hi = c;
        lo[a] = (c[a] + xg.n[a] - 1) % xg.n[a];
        hi[a] = (c[a] + 1) % xg.n[a];
        auto flat = [&](const Index3& k) {
          return (static_cast<std::size_t>(k[0]) * xg.n[1] + k[1]) * xg.n[2] + k[2];
        };
        const std::size_t jl = flat(lo), jh = flat(hi);
        for (std::size_t v = 0; v < nv; ++v) {
          double cr = courant[a][v];
          double f = values(v, j);
          next(v, j) = cr > 0 ? f - cr * (f - values(v, jl)) : f - cr * (values(v, jh) - f);
        }
      }
      values.swap(next);
    }
  }

  void step() {
    if (cfg.transport == TransportScheme::kSpectral) {
      modes.array() *= half_phase.array();
      op->apply_map(map, modes);
      modes.array() *= half_phase.array();
    } else {
      upwind_half();
      op->apply_map(map, values);
      upwind_half();
    }
  }

  std::vector<double> real_state() const {
    std::vector<double> f(nv * nx);
    if (cfg.transport == TransportScheme::kSpectral) {
      Eigen::MatrixXcd tmp = modes;
      fftw_execute_dft(bwd, reinterpret_cast<fftw_complex*>(tmp.data()),
                       reinterpret_cast<fftw_complex*>(tmp.data()));
      for (std::size_t i = 0; i < nv * nx; ++i) f[i] = tmp.data()[i].real() / static_cast<double>(nx);
    } else {
      for (std::size_t i = 0; i < nv * nx; ++i) f[i] = values.data()[i];
    }
    return f;
  }
};

BoltzmannSolver::BoltzmannSolver(const PhaseSpaceDensity& f0, const BoltzmannConfig& cfg)
    : impl_(new Impl) {
  impl_->cfg = cfg;
  impl_->owned.emplace(f0.vside, cfg.kernel);
  impl_->op = &*impl_->owned;
  try {
    impl_->init(f0);
  } catch (...) {
    delete impl_;
    throw;
  }
  time_ = f0.time;
}

BoltzmannSolver::BoltzmannSolver(const PhaseSpaceDensity& f0, const BoltzmannConfig& cfg,
                                 const CollisionOperator& op)
    : impl_(new Impl) {
  impl_->cfg = cfg;
  impl_->op = &op;
  try {
    impl_->init(f0);
  } catch (...) {
    delete impl_;
    throw;
  }
  time_ = f0.time;
}

BoltzmannSolver::~BoltzmannSolver() { delete impl_; }

void BoltzmannSolver::advance(double T) {
  require(T >= 0.0, "time must be nonnegative");
  const long steps = static_cast<long>(std::llround(T / impl_->cfg.dT));
  if (std::abs(steps * impl_->cfg.dT - T) > 1e-9 * std::max(1.0, T))
    fail(ErrorCode::kInvalidArgument, "advance time must be a multiple of dT");
  for (long s = 0; s < steps; ++s) impl_->step();
  time_ += T;
}

PhaseSpaceDensity BoltzmannSolver::state() const {
  PhaseSpaceDensity out;
  out.x = impl_->xg;
  out.vside = impl_->vside;
  out.time = time_;
  out.f = impl_->real_state();
  return out;
}

BoltzmannSample BoltzmannSolver::sample() const {
  const auto& I = *impl_;
  BoltzmannSample s;
  s.T = time_;
  if (I.cfg.transport == TransportScheme::kUpwind) {
    auto st = state();
    s.variance = st.variance();
    s.mass = st.mass();
    s.entropy = st.velocity_entropy();
    return s;
  }
  const double vol = I.xg.cell_volume();
  std::vector<double> marginal(I.nv);
  for (std::size_t v = 0; v < I.nv; ++v) marginal[v] = I.modes(v, 0).real() * vol;
  double mass = 0.0;
  for (double m : marginal) mass += m;
  s.mass = mass / static_cast<double>(I.nv);
  s.entropy = entropy_of(marginal);
  std::vector<cplx> rhohat(I.nx);
  for (std::size_t j = 0; j < I.nx; ++j) rhohat[j] = I.modes.col(j).sum() / static_cast<double>(I.nv);
  fftw_execute_dft(I.rho_bwd, reinterpret_cast<fftw_complex*>(rhohat.data()),
                   reinterpret_cast<fftw_complex*>(rhohat.data()));
  std::vector<double> rho(I.nx);
  for (std::size_t j = 0; j < I.nx; ++j) rho[j] = rhohat[j].real() / static_cast<double>(I.nx);
  s.variance = variance_of(I.xg, rho);
  return s;
}

PhaseSpaceDensity solve_boltzmann(const PhaseSpaceDensity& f0, double T,
                                  const BoltzmannConfig& cfg) {
  for (double v : f0.f) require(v >= 0.0, "initial density must be nonnegative");
  BoltzmannSolver solver(f0, cfg);
  solver.advance(T);
  return solver.state();
}

std::vector<double> solve_collisions(const CollisionOperator& op, std::span<const double> f0,
                                     double T) {
  std::vector<double> f(f0.begin(), f0.end());
  op.exponentiate(T, f);
  return f;
}

VarianceStudy boltzmann_longtime_variance(const VarianceStudyConfig& cfg) {
  require(cfg.x_points >= 4 && cfg.x_width > 0.0, "invalid position grid");
  require(cfg.fit_hi > cfg.fit_lo && cfg.fit_hi <= cfg.T_end, "invalid fit window");
  CollisionOperator op(cfg.vside, cfg.solver.kernel);
  PhaseSpaceDensity f0;
  f0.x.n = {cfg.x_points, 1, 1};
  f0.x.spacing = cfg.x_spacing;
  f0.vside = cfg.vside;
  const std::size_t nv = f0.nv();
  std::vector<double> shell(nv);
  double phi = 0.0;
  for (std::size_t v = 0; v < nv; ++v) {
    shell[v] = lattice::gaussian_delta(cfg.energy - lattice::dispersion(op.grid().momentum(v)),
                                       cfg.solver.kernel.h);
    phi += shell[v];
  }
  phi /= static_cast<double>(nv);
  if (phi < lattice::kEmptyShellTolerance)
    fail(ErrorCode::kEmptyShell, "initial shell is empty");
  f0.f.resize(nv * cfg.x_points);
  for (int i = 0; i < cfg.x_points; ++i) {
    double x = f0.x.coord(0, i);
    double g = std::exp(-0.5 * x * x / (cfg.x_width * cfg.x_width)) /
               (std::sqrt(kTwoPi) * cfg.x_width);
    for (std::size_t v = 0; v < nv; ++v) f0.f[i * nv + v] = g * shell[v] / phi;
  }
  BoltzmannSolver solver(f0, cfg.solver, op);
  VarianceStudy out;
  out.series.push_back(solver.sample());
  const long per = std::max(1L, std::lround(cfg.sample_every / cfg.solver.dT));
  const double chunk = per * cfg.solver.dT;
  while (solver.time() + 0.5 * chunk <= cfg.T_end) {
    solver.advance(chunk);
    out.series.push_back(solver.sample());
  }
  std::vector<double> t, y;
  for (const auto& s : out.series)
    if (s.T >= cfg.fit_lo - 1e-12 && s.T <= cfg.fit_hi + 1e-12) {
      t.push_back(s.T);
      y.push_back(s.variance[0]);
    }
  require(t.size() >= 3, "fit window holds fewer than 3 samples");
  const double n = static_cast<double>(t.size());
  double mt = 0, my = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= n;
  my /= n;
  double stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    sty += (t[i] - mt) * (y[i] - my);
  }
  out.rate = sty / stt;
  double rss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double r = y[i] - (my + out.rate * (t[i] - mt));
    rss += r * r;
  }
  out.rate_stderr = std::sqrt(rss / std::max(1.0, n - 2.0) / stt);
  return out;
}

void write_series_csv(std::ostream& os, std::span<const BoltzmannSample> series) {
  os << "T,var_x,var_y,var_z,mass,entropy\n";
  os.precision(17);
  for (const auto& s : series)
    os << s.T << ',' << s.variance[0] << ',' << s.variance[1] << ',' << s.variance[2] << ','
       << s.mass << ',' << s.entropy << '\n';
}

HeatSolution solve_heat(double energy, const Mat3& diffusion, double weight, double T) {
  require(T > 0.0, "heat solution needs T > 0");
  return HeatSolution{energy, diffusion, weight, T};
}

double HeatSolution::value(const Vec3& x) const {
  Eigen::Matrix3d S;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) S(i, j) = 2.0 * T * diffusion(i, j);
  Eigen::Vector3d v(x[0], x[1], x[2]);
  const double q = v.dot(S.ldlt().solve(v));
  return weight * std::exp(-0.5 * q) / std::sqrt(std::pow(kTwoPi, 3) * S.determinant());
}

cplx HeatSolution::fourier(const Vec3& xi) const {
  return weight * std::exp(-T * diffusion.quadratic(xi));
}

double shell_weight(const lattice::MomentumGrid& grid, std::span<const double> density,
                    double energy, double h) {
  require(density.size() == grid.size(), "density size does not match grid");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double g = lattice::gaussian_delta(energy - lattice::dispersion(grid.momentum(i)), h);
    num += g * density[i];
    den += g;
  }
  if (den / static_cast<double>(grid.size()) < lattice::kEmptyShellTolerance)
    fail(ErrorCode::kEmptyShell, "empty energy shell");
  return num / den;
}

double heat_pde_residual(const HeatSolution& sol, double half_width, int points, double step) {
  require(points >= 3 && step > 0.0 && sol.T > step, "invalid residual panel");
  HeatSolution later = sol, earlier = sol;
  later.T += step;
  earlier.T -= step;
  double worst = 0.0;
  for (int a = 1; a < points - 1; ++a)
    for (int b = 1; b < points - 1; ++b)
      for (int c = 1; c < points - 1; ++c) {
        Vec3 x{-half_width + 2 * half_width * a / (points - 1),
               -half_width + 2 * half_width * b / (points - 1),
               -half_width + 2 * half_width * c / (points - 1)};
        const double dt = (later.value(x) - earlier.value(x)) / (2 * step);
        double lap = 0.0;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            auto at = [&](double si, double sj) {
              Vec3 y = x;
              y[i] += si;
              y[j] += sj;
              return sol.value(y);
            };
            double d2;
            if (i == j) d2 = (at(step, 0) - 2 * sol.value(x) + at(-step, 0)) / (step * step);
            else
              d2 = (at(step, step) - at(step, -step) - at(-step, step) + at(-step, -step)) /
                   (4 * step * step);
            lap += sol.diffusion(i, j) * d2;
          }
        worst = std::max(worst, std::abs(dt - lap));
      }
  return worst;
}

double asymptotic_decay(DecayConvention conv, double T, const Vec3& xi, const Mat3& d) {
  const double c = conv == DecayConvention::kPaperHalf ? 0.5 : 1.0;
  return std::exp(-c * T * d.quadratic(xi));
}

cplx asymptotic_wigner(const std::function<cplx(const Vec3& xi, const Vec3& v)>& o_hat,
                       const std::function<cplx(const Vec3& k)>& psi0_hat,
                       std::span<const Vec3> xi_nodes, std::span<const double> xi_weights,
                       double T, double eps, DecayConvention conv, const AsymptoticOptions& opt) {
  require(xi_nodes.size() == xi_weights.size(), "xi nodes and weights differ in length");
  require(opt.energy_points >= 2 && opt.h > 0.0, "invalid energy grid");
  lattice::MomentumGrid grid(opt.side);
  lattice::EnergyLevels levels(grid);
  const auto lv = levels.level_of();
  const auto e = levels.energies();
  const auto mult = levels.multiplicities();
  const std::size_t nl = levels.count();
  const double N = static_cast<double>(grid.size());
  const int ne = opt.energy_points;
  const double dE = (opt.emax - opt.emin) / (ne - 1);
  // Per energy: broadened level weights, Phi and D_11.
  std::vector<std::vector<double>> g(ne, std::vector<double>(nl));
  std::vector<double> phi(ne), d11(ne);
  for (int i = 0; i < ne; ++i) {
    const double E = opt.emin + dE * i;
    double s = 0.0;
    for (std::size_t l = 0; l < nl; ++l) {
      g[i][l] = lattice::gaussian_delta(E - e[l], opt.h);
      s += mult[l] * g[i][l];
    }
    phi[i] = s / N;
    d11[i] = phi[i] < lattice::kEmptyShellTolerance ? 0.0 : levels.diffusion_11(E, opt.h);
  }
  cplx total = 0.0;
  for (std::size_t q = 0; q < xi_nodes.size(); ++q) {
    const Vec3& xi = xi_nodes[q];
    std::vector<cplx> so(nl), sw(nl);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      Vec3 v = grid.momentum(k);
      Vec3 lo = v, hi = v;
      for (int a = 0; a < 3; ++a) {
        lo[a] -= 0.5 * eps * xi[a];
        hi[a] += 0.5 * eps * xi[a];
      }
      so[lv[k]] += o_hat(xi, v);
      sw[lv[k]] += std::conj(psi0_hat(lo)) * psi0_hat(hi);
    }
    cplx acc = 0.0;
    for (int i = 0; i < ne; ++i) {
      if (phi[i] < lattice::kEmptyShellTolerance) continue;
      cplx ao = 0.0, aw = 0.0;
      for (std::size_t l = 0; l < nl; ++l) {
        ao += g[i][l] * so[l];
        aw += g[i][l] * sw[l];
      }
      const double den = phi[i] * N;
      Mat3 D;
      for (int a = 0; a < 3; ++a) D(a, a) = d11[i];
      const double tw = (i == 0 || i == ne - 1) ? 0.5 : 1.0;
      acc += tw * dE * phi[i] * asymptotic_decay(conv, T, xi, D) * (ao / den) * (aw / den);
    }
    total += xi_weights[q] * acc;
  }
  return total;
}

}  // namespace qdlab::kinetics
