// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/graph_value.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "core/disorder.hpp"
#include "core/lattice.hpp"
#include "core/parallel.hpp"

namespace qdlab::graphs {

namespace {

// Divided difference of exp(-itz) for nodes within R/t of their mean:
// t^n e^{-itc} sum_m h_m(s) / (m + n)!, with s_i = -it (x_i - c) and h_m the
// complete homogeneous symmetric polynomials.
cplx clustered_propagator(std::span<const cplx> x, double t) {
  constexpr int kMaxTerms = 48;
  const int m = static_cast<int>(x.size());
  const int n = m - 1;
  cplx c = 0.0;
  for (const auto& v : x) c += v;
  c /= static_cast<double>(m);
  double rho = 0.0;
  for (const auto& v : x) rho = std::max(rho, t * std::abs(v - c));
  int terms = 1;
  for (double bound = 1.0; terms < kMaxTerms && bound > 1e-17; ++terms) bound *= rho / terms;
  std::array<cplx, kMaxTerms> h{};
  h[0] = 1.0;
  for (const auto& v : x) {
    const cplx si = cplx(0.0, -t) * (v - c);
    for (int k = 1; k < terms; ++k) h[k] += si * h[k - 1];
  }
  cplx sum = 0.0;
  double inv_fact = 1.0;
  for (int k = 1; k <= n; ++k) inv_fact /= k;
  for (int k = 0; k < terms; ++k) {
    sum += h[k] * inv_fact;
    inv_fact /= (k + n + 1);
  }
  return std::pow(t, n) * std::exp(cplx(0.0, -t) * c) * sum;
}

constexpr double kClusterRadius = 4.0;
constexpr int kMaxNodes = 12;

}  // namespace

cplx simplex_propagator(std::span<const cplx> x, double t) {
  const int m = static_cast<int>(x.size());
  require(m >= 1, "simplex propagator needs at least one energy");
  require(m <= kMaxNodes, "simplex propagator supports at most 12 energies");
  if (m == 1) return std::exp(cplx(0.0, -t) * x[0]);
  std::array<cplx, kMaxNodes> y{};
  std::copy(x.begin(), x.end(), y.begin());
  std::sort(y.begin(), y.begin() + m, [](cplx a, cplx b) { return a.real() < b.real(); });
  if (t * std::abs(y[m - 1] - y[0]) <= kClusterRadius) return clustered_propagator(x, t);
  // Interval recursion D[i..j] = i (D[i+1..j] - D[i..j-1]) / (x_j - x_i) on
  // the sorted nodes, switching to the series on tight clusters.
  std::array<std::array<cplx, kMaxNodes>, kMaxNodes> memo;
  std::array<std::array<bool, kMaxNodes>, kMaxNodes> known{};
  auto rec = [&](auto&& self, int i, int j) -> cplx {
    if (known[i][j]) return memo[i][j];
    cplx v;
    const cplx gap = y[j] - y[i];
    if (i == j) v = std::exp(cplx(0.0, -t) * y[i]);
    else if (t * std::abs(gap) <= kClusterRadius)
      v = clustered_propagator(std::span<const cplx>(y.data() + i, j - i + 1), t);
    else v = cplx(0.0, 1.0) * (self(self, i + 1, j) - self(self, i, j - 1)) / gap;
    known[i][j] = true;
    memo[i][j] = v;
    return v;
  };
  return rec(rec, 0, m - 1);
}

cplx simplex_propagator_dense(std::span<const cplx> x, double t) {
  const int m = static_cast<int>(x.size());
  require(m >= 1, "simplex propagator needs at least one energy");
  Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    J(i, i) = cplx(0.0, -t) * x[i];
    if (i + 1 < m) J(i, i + 1) = cplx(0.0, -t);
  }
  // The corner of exp(-itJ) is the divided difference of exp(-itz).
  Eigen::MatrixXcd E = J.exp();
  return std::pow(cplx(0.0, 1.0), m - 1) * E(0, m - 1);
}

namespace {

// Additive recurrence with the generalized golden ratio (R_d sequence).
std::vector<double> kronecker_alpha(int dim) {
  double g = 2.0;
  for (int it = 0; it < 100; ++it) {
    double f = std::pow(g, dim + 1) - g - 1.0;
    double df = (dim + 1) * std::pow(g, dim) - 1.0;
    g -= f / df;
  }
  std::vector<double> a(dim);
  for (int k = 0; k < dim; ++k) {
    double v = std::pow(1.0 / g, k + 1);
    a[k] = v - std::floor(v);
  }
  return a;
}

class PointSource {
 public:
  PointSource(SamplerKind kind, int dim, std::uint64_t seed)
      : kind_(kind), dim_(dim), gen_(seed), alpha_(kronecker_alpha(dim)), shift_(dim) {
    for (auto& s : shift_) s = canonical();
  }

  void next(std::vector<double>& u) {
    u.resize(dim_);
    if (kind_ == SamplerKind::kPseudoRandom) {
      for (auto& x : u) x = canonical();
      return;
    }
    ++index_;
    for (int k = 0; k < dim_; ++k) {
      double v = shift_[k] + static_cast<double>(index_) * alpha_[k];
      u[k] = v - std::floor(v);
    }
  }

 private:
  double canonical() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  SamplerKind kind_;
  int dim_;
  std::mt19937_64 gen_;
  std::vector<double> alpha_;
  std::vector<double> shift_;
  long index_ = 0;
};

// Momentum on the shell e(q) = E from four uniforms: energy (unused here),
// axis and sign, two free components. The resulting density relative to the
// normalized torus measure is (pi/3) g(E) sum_a |sin q_a| whatever the axis.
bool shell_point(const double* u, double E, Vec3& q) {
  const double s = 3.0 * u[1];
  const int axis = std::min(2, static_cast<int>(s));
  const double sign = (s - axis) < 0.5 ? 1.0 : -1.0;
  const int b = (axis + 1) % 3, c = (axis + 2) % 3;
  q[b] = -kPi + kTwoPi * u[2];
  q[c] = -kPi + kTwoPi * u[3];
  const double cosa = 3.0 - E - std::cos(q[b]) - std::cos(q[c]);
  if (cosa < -1.0 || cosa > 1.0) return false;
  q[axis] = sign * std::acos(cosa);
  return true;
}

struct Proposal {
  double t;
  double mix;
  bool renormalized;
  double lambda2;
  const SelfEnergy* se;

  double width(double center) const {
    double w = 1.0 / t;
    if (renormalized) w += lambda2 * std::abs(se->Theta(center).imag());
    return w;
  }

  // Mixture of a Cauchy law truncated to the band and a uniform law on it.
  double draw(double u, double c) const {
    const double lo = lattice::kBandMin, hi = lattice::kBandMax;
    const double g = width(c);
    const double a0 = std::atan((lo - c) / g), a1 = std::atan((hi - c) / g);
    double E;
    if (u < mix) E = lo + (hi - lo) * (u / mix);
    else E = c + g * std::tan(a0 + (u - mix) / (1.0 - mix) * (a1 - a0));
    return std::clamp(E, lo, hi);
  }

  double density(double E, double c) const {
    const double lo = lattice::kBandMin, hi = lattice::kBandMax;
    const double g = width(c);
    const double a0 = std::atan((lo - c) / g), a1 = std::atan((hi - c) / g);
    const double cauchy = g / ((E - c) * (E - c) + g * g) / (a1 - a0);
    return mix / (hi - lo) + (1.0 - mix) * cauchy;
  }

  // Density of a momentum chain c_0..c_n relative to the normalized torus
  // measure in every variable, averaged over the choice of root: the root
  // momentum is uniform and every other one lies near the root's shell.
  double chain_density(const std::vector<Vec3>& c) const {
    const std::size_t m = c.size();
    std::array<double, 16> e{}, shell{};
    for (std::size_t j = 0; j < m; ++j) {
      e[j] = lattice::dispersion(c[j]);
      shell[j] = kPi / 3.0 *
                 (std::abs(std::sin(c[j][0])) + std::abs(std::sin(c[j][1])) +
                  std::abs(std::sin(c[j][2])));
    }
    double total = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      double d = 1.0;
      for (std::size_t j = 0; j < m; ++j)
        if (j != k) d *= density(e[j], e[k]) * shell[j];
      total += d;
    }
    return total / static_cast<double>(m);
  }

  // Fills the chain from uniforms, four per momentum. False when a shell
  // point does not exist over the drawn components.
  bool draw_chain(const double* u, std::size_t root, std::vector<Vec3>& c) const {
    for (int a = 0; a < 3; ++a) c[root][a] = -kPi + kTwoPi * u[4 * root + a];
    const double center = lattice::dispersion(c[root]);
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (j == root) continue;
      const double E = draw(u[4 * j], center);
      if (!shell_point(&u[4 * j], E, c[j])) return false;
    }
    return true;
  }
};

}  // namespace

std::vector<GraphValueEstimate> graph_values(std::span<const PermutationPairing> sigmas,
                                             const GraphValueConfig& cfg) {
  require(!sigmas.empty(), "no permutations given");
  const int n = sigmas.front().order();
  for (const auto& s : sigmas) require(s.order() == n, "permutations must share their order");
  require(cfg.t > 0.0, "time must be positive");
  require(!cfg.renormalized || cfg.self_energy != nullptr,
          "renormalized graphs need a self-energy");
  require(cfg.uniform_mix > 0.0 && cfg.uniform_mix < 1.0, "uniform mix must lie in (0, 1)");
  if (cfg.samples < cfg.min_samples || cfg.replicates < 2)
    fail(ErrorCode::kInsufficientSamples,
         "graph value needs >= " + std::to_string(cfg.min_samples) + " samples and >= 2 replicates");

  const double l2 = cfg.lambda * cfg.lambda;
  const SelfEnergy* se = cfg.self_energy;
  auto omega = [&](const Vec3& p) -> cplx {
    if (!cfg.renormalized) return lattice::dispersion(p);
    const double e = lattice::dispersion(p);
    return e + l2 * se->Theta(e);
  };
  auto psi0 = [&](const Vec3& k) -> cplx { return cfg.psi0_hat ? cfg.psi0_hat(k) : cplx(1.0); };
  auto ohat = [&](const Vec3& v) -> cplx { return cfg.o_hat ? cfg.o_hat(cfg.xi, v) : cplx(1.0); };
  const Proposal prop{cfg.t, cfg.uniform_mix, cfg.renormalized, l2, se};
  const double coupling = std::pow(l2, n);
  const int dim = 4 * (n + 1) + 1;
  const std::size_t S = sigmas.size();

  std::vector<std::vector<cplx>> rep_mean(cfg.replicates, std::vector<cplx>(S));
  parallel_for(cfg.replicates, [&](std::size_t r) {
    PointSource src(cfg.sampler, dim, disorder::derive_seed(cfg.seed, r));
    std::vector<double> u;
    std::vector<Vec3> q(n + 1), p(n + 1), step(n + 1);
    std::vector<cplx> xq(n + 1), xp(n + 1);
    std::vector<cplx> acc(S);
    auto p_from_q = [&](const PermutationPairing& sg) {
      for (int a = 0; a < 3; ++a) p[0][a] = q[0][a] - cfg.xi[a];
      for (int j = 1; j <= n; ++j)
        for (int a = 0; a < 3; ++a) p[j][a] = p[j - 1][a] + q[sg(j)][a] - q[sg(j) - 1][a];
    };
    auto q_from_p = [&](const PermutationPairing& sg) {
      for (int a = 0; a < 3; ++a) q[0][a] = p[0][a] + cfg.xi[a];
      for (int j = 1; j <= n; ++j)
        for (int a = 0; a < 3; ++a) step[sg(j)][a] = p[j][a] - p[j - 1][a];
      for (int k = 1; k <= n; ++k)
        for (int a = 0; a < 3; ++a) q[k][a] = q[k - 1][a] + step[k][a];
    };
    auto chain_propagator = [&](const std::vector<Vec3>& c, std::vector<cplx>& x) {
      for (int j = 0; j <= n; ++j) x[j] = omega(c[j]);
      return simplex_propagator(x, cfg.t);
    };
    auto integrand = [&](cplx dq, cplx dp) {
      Vec3 v;
      for (int a = 0; a < 3; ++a) v[a] = wrap_angle(p[n][a] + 0.5 * cfg.xi[a]);
      return coupling * std::conj(ohat(v)) * std::conj(psi0(p[0])) * psi0(q[0]) *
             std::conj(dp) * dq;
    };
    for (long s = 0; s < cfg.samples; ++s) {
      src.next(u);
      // Balance heuristic between drawing the psi-line chain and drawing the
      // conjugate-line chain (the map between the two is volume preserving),
      // and between the possible roots of each.
      const double pick = 2.0 * u[dim - 1];
      const bool from_q = pick < 1.0;
      const auto root = std::min<std::size_t>(
          n, static_cast<std::size_t>((pick - std::floor(pick)) * (n + 1)));
      if (!prop.draw_chain(u.data(), root, from_q ? q : p)) continue;
      const double d_fixed = prop.chain_density(from_q ? q : p);
      const cplx fixed = chain_propagator(from_q ? q : p, xq);
      for (std::size_t k = 0; k < S; ++k) {
        if (from_q) p_from_q(sigmas[k]);
        else q_from_p(sigmas[k]);
        const double d_other = prop.chain_density(from_q ? p : q);
        const cplx other = chain_propagator(from_q ? p : q, xp);
        const cplx f = from_q ? integrand(fixed, other) : integrand(other, fixed);
        acc[k] += f / (0.5 * (d_fixed + d_other));
      }
    }
    for (std::size_t k = 0; k < S; ++k) rep_mean[r][k] = acc[k] / static_cast<double>(cfg.samples);
  });

  std::vector<GraphValueEstimate> out(S);
  const double R = cfg.replicates;
  for (std::size_t k = 0; k < S; ++k) {
    auto& est = out[k];
    est.n = n;
    est.sigma = sigmas[k].to_string();
    est.degree = sigmas[k].degree();
    est.lambda = cfg.lambda;
    est.t = cfg.t;
    est.eta = 1.0 / cfg.t;
    est.xi = cfg.xi;
    est.renormalized = cfg.renormalized;
    est.samples = cfg.samples * cfg.replicates;
    cplx m = 0.0;
    for (int r = 0; r < cfg.replicates; ++r) {
      est.replicate_means.push_back(rep_mean[r][k]);
      m += rep_mean[r][k];
    }
    m /= R;
    double ss = 0.0;
    for (int r = 0; r < cfg.replicates; ++r) ss += std::norm(rep_mean[r][k] - m);
    est.mean = m;
    est.stderr_ = std::sqrt(ss / (R - 1.0) / R);
  }
  return out;
}

GraphValueEstimate graph_value(const PermutationPairing& sigma, const GraphValueConfig& cfg) {
  std::vector<PermutationPairing> one{sigma};
  return graph_values(one, cfg).front();
}

}  // namespace qdlab::graphs
