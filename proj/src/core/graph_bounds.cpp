// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/graph_bounds.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "core/lattice.hpp"
#include "core/parallel.hpp"
#include "core/permutation.hpp"

namespace qdlab::graphs {
namespace {

constexpr cplx kI{0.0, 1.0};

template <class F>
auto adaptive(F&& f, double a, double b, const TorusQuadrature& quad) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate(f, a, b, quad.inner_max_depth,
                                              quad.inner_tolerance);
}

struct Node {
  double x;
  double w;
};

std::vector<Node> composite_legendre(int panels, double a, double b) {
  using Rule = boost::math::quadrature::gauss<double, 8>;
  const auto& abs = Rule::abscissa();
  const auto& wts = Rule::weights();
  std::vector<Node> nodes;
  const double h = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    const double mid = a + (k + 0.5) * h, half = 0.5 * h;
    for (std::size_t i = 0; i < abs.size(); ++i) {
      if (abs[i] == 0.0) {
        nodes.push_back({mid, half * wts[i]});
      } else {
        nodes.push_back({mid - half * abs[i], half * wts[i]});
        nodes.push_back({mid + half * abs[i], half * wts[i]});
      }
    }
  }
  return nodes;
}

// int dp f(p) / (2 pi)^3: Gauss-Legendre over (p1, p2), adaptive Gauss-Kronrod
// over p3 split at the supplied breakpoints.
template <class T, class F, class B>
T torus_integral(F&& f, B&& breaks, const TorusQuadrature& quad) {
  const auto nodes = composite_legendre(quad.panels, -kPi, kPi);
  std::vector<T> partial(nodes.size(), T{});
  parallel_for(nodes.size(), [&](std::size_t i) {
    const double p1 = nodes[i].x;
    T row{};
    std::vector<double> cuts;
    for (const auto& n2 : nodes) {
      const double p2 = n2.x;
      cuts.clear();
      cuts.push_back(-kPi);
      cuts.push_back(kPi);
      breaks(p1, p2, cuts);
      std::sort(cuts.begin(), cuts.end());
      T inner{};
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (cuts[k + 1] - cuts[k] < 1e-14) continue;
        inner += adaptive([&](double p3) { return f(Vec3{p1, p2, p3}); }, cuts[k], cuts[k + 1], quad);
      }
      row += n2.w * inner;
    }
    partial[i] = nodes[i].w * row;
  });
  T total{};
  for (const auto& v : partial) total += v;
  return total / (kTwoPi * kTwoPi * kTwoPi);
}

// Adds the p3 in [-pi, pi] where cos(sign p3 + shift3) = c for the given
// (p1, p2): the shell crossings of an energy surface.
void shell_roots(double c, int sign, double shift3, std::vector<double>& cuts) {
  if (c < -1.0 || c > 1.0) return;
  const double a = std::acos(c);
  for (double r : {a, -a}) cuts.push_back(wrap_angle(sign * (r - shift3)));
}

double effective_energy(double alpha, double lambda, const SelfEnergy* se) {
  if (se == nullptr) return alpha;
  return alpha - lambda * lambda * se->Theta(alpha).real();
}

}  // namespace

cplx ladder_rung(double alpha, double beta, const Vec3& r, double lambda, double eta,
                 const SelfEnergy& se, bool renormalized, const TorusQuadrature& quad) {
  require(eta > 0.0, "eta must be positive");
  const double l2 = lambda * lambda;
  const bool at_zero = r[0] == 0.0 && r[1] == 0.0 && r[2] == 0.0;
  if (at_zero) {
    auto big_omega = [&](double E) {
      return renormalized ? cplx(E) + l2 * se.Theta(E) : cplx(E);
    };
    auto integrand = [&](double E) {
      const cplx w = big_omega(E);
      return l2 * se.dos(E) / ((alpha - std::conj(w) - kI * eta) * (beta - w + kI * eta));
    };
    std::vector<double> cuts;
    for (double e : se.energies())
      if (e > lattice::kBandMin && e < lattice::kBandMax) cuts.push_back(e);
    cuts.push_back(lattice::kBandMin);
    cuts.push_back(lattice::kBandMax);
    for (double e : {alpha, beta})
      if (e > lattice::kBandMin && e < lattice::kBandMax) cuts.push_back(e);
    std::sort(cuts.begin(), cuts.end());
    cplx total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      if (cuts[k + 1] - cuts[k] < 1e-14) continue;
      total += adaptive(integrand, cuts[k], cuts[k + 1], quad);
    }
    return total;
  }
  const SelfEnergy* sep = renormalized ? &se : nullptr;
  auto w = [&](const Vec3& p) { return renormalized ? se.omega(p) : cplx(lattice::dispersion(p)); };
  const double a_eff = effective_energy(alpha, lambda, sep);
  const double b_eff = effective_energy(beta, lambda, sep);
  auto f = [&](const Vec3& p) {
    Vec3 plus, minus;
    for (int i = 0; i < 3; ++i) {
      plus[i] = p[i] + r[i];
      minus[i] = p[i] - r[i];
    }
    return l2 / ((alpha - std::conj(w(plus)) - kI * eta) * (beta - w(minus) + kI * eta));
  };
  auto breaks = [&](double p1, double p2, std::vector<double>& cuts) {
    shell_roots(3.0 - a_eff - std::cos(p1 + r[0]) - std::cos(p2 + r[1]), 1, r[2], cuts);
    shell_roots(3.0 - b_eff - std::cos(p1 - r[0]) - std::cos(p2 - r[1]), 1, -r[2], cuts);
  };
  return torus_integral<cplx>(f, breaks, quad);
}

double crossing_integral(double alpha, double beta, const Vec3& q, double eta, int sign,
                         const SelfEnergy* se, const TorusQuadrature& quad) {
  require(eta > 0.0, "eta must be positive");
  require(sign == 1 || sign == -1, "sign must be +1 or -1");
  const double lambda = se ? se->lambda() : 0.0;
  auto w = [&](const Vec3& p) { return se ? se->omega(p) : cplx(lattice::dispersion(p)); };
  const double a_eff = effective_energy(alpha, lambda, se);
  const double b_eff = effective_energy(beta, lambda, se);
  auto f = [&](const Vec3& p) {
    Vec3 k;
    for (int i = 0; i < 3; ++i) k[i] = sign * p[i] + q[i];
    return 1.0 / (std::abs(alpha - w(p) + kI * eta) * std::abs(beta - std::conj(w(k)) - kI * eta));
  };
  auto breaks = [&](double p1, double p2, std::vector<double>& cuts) {
    shell_roots(3.0 - a_eff - std::cos(p1) - std::cos(p2), 1, 0.0, cuts);
    shell_roots(3.0 - b_eff - std::cos(sign * p1 + q[0]) - std::cos(sign * p2 + q[1]), sign, q[2],
                cuts);
  };
  return torus_integral<double>(f, breaks, quad);
}

RungStudy renormalized_rung_study(const SelfEnergy& se, const RungStudyConfig& cfg) {
  require(cfg.lambdas.size() >= 2, "rung study needs two or more couplings");
  RungStudy out;
  out.lambdas = cfg.lambdas;
  std::vector<double> lx, ly;
  for (double lambda : cfg.lambdas) {
    const SelfEnergy sel = se.with_lambda(lambda);
    const cplx v = ladder_rung(cfg.energy, cfg.energy, Vec3{}, lambda,
                               cfg.eta_factor * lambda * lambda, sel, true);
    out.values.push_back(v);
    out.deviations.push_back(std::abs(v - 1.0));
    lx.push_back(std::log(lambda));
    ly.push_back(std::log(std::max(out.deviations.back(), 1e-300)));
  }
  // Couplings may come in any order; "decreasing" is as lambda decreases.
  std::vector<std::size_t> order(cfg.lambdas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return cfg.lambdas[a] > cfg.lambdas[b]; });
  out.strictly_decreasing = true;
  for (std::size_t i = 1; i < order.size(); ++i)
    out.strictly_decreasing &= out.deviations[order[i]] < out.deviations[order[i - 1]];
  const LineFit fit = fit_line(lx, ly);
  out.exponent = fit.slope;
  out.exponent_ci95 = 1.96 * fit.slope_stderr;
  out.c0 = std::exp(fit.intercept);
  out.residual = fit.residual;
  return out;
}

BareRungStudy bare_rung_study(const SelfEnergy& se, double lambda, double energy,
                              std::vector<double> etas) {
  require(etas.size() >= 2, "bare rung study needs two or more regulators");
  std::sort(etas.begin(), etas.end(), std::greater<>());
  BareRungStudy out;
  out.lambda = lambda;
  out.etas = etas;
  std::vector<double> lx, ly;
  for (double eta : etas) {
    const double m = std::abs(ladder_rung(energy, energy, Vec3{}, lambda, eta, se, false));
    out.magnitudes.push_back(m);
    lx.push_back(std::log(1.0 / eta));
    ly.push_back(std::log(m));
  }
  out.slope = fit_line(lx, ly).slope;
  out.growing = out.slope > 0.5;
  for (std::size_t i = 1; i < etas.size(); ++i)
    out.growing &= out.magnitudes[i] > out.magnitudes[i - 1];
  return out;
}

CrossingReport crossing_bound_check(const CrossingConfig& cfg, const SelfEnergy* se) {
  require(cfg.etas.size() >= 2, "crossing check needs two or more regulators");
  for (double eta : cfg.etas) require(eta > 0.0 && eta < 1.0, "regulators must lie in (0, 1)");
  CrossingReport out;
  auto ray_q = [](double s) { return Vec3{s * kPi / 2, s * kPi / 2, s * kPi / 2}; };
  std::vector<double> lx;
  for (double eta : cfg.etas) lx.push_back(std::log(1.0 / eta));

  double b_raw = -1e300;
  for (double alpha : cfg.energies)
    for (double beta : cfg.energies)
      for (int sign : cfg.signs)
        for (double s : cfg.q_scales) {
          CrossingSeries series{alpha, beta, sign, ray_q(s), 0.0};
          const double qn = triple_norm(series.q);
          std::vector<double> ly, lb;
          for (double eta : cfg.etas) {
            CrossingPoint pt{alpha, beta, sign, series.q, qn, eta, 0.0, 0.0};
            pt.lhs = crossing_integral(alpha, beta, series.q, eta, sign, se, cfg.quad);
            out.panel.push_back(pt);
            ly.push_back(std::log(pt.lhs * (qn + eta)));
            const double lg = std::abs(std::log(eta));
            lb.push_back(std::log(pt.lhs * (qn + eta) / (lg * lg * lg)));
          }
          series.exponent = fit_line(lx, ly).slope;
          b_raw = std::max(b_raw, fit_line(lx, lb).slope);
          out.max_exponent = out.series.empty() ? series.exponent
                                                : std::max(out.max_exponent, series.exponent);
          out.series.push_back(series);
        }
  out.b_unclamped = b_raw;
  out.b = std::clamp(b_raw, 0.5, 0.75);
  auto shape = [&](const CrossingPoint& p) {
    const double lg = std::abs(std::log(p.eta));
    return lg * lg * lg * std::pow(p.eta, -out.b) / (p.q_norm + p.eta);
  };
  for (const auto& p : out.panel) out.C = std::max(out.C, p.lhs / shape(p));
  double ss = 0.0;
  out.bound_holds = true;
  for (auto& p : out.panel) {
    p.rhs = out.C * shape(p);
    out.bound_holds &= p.lhs <= p.rhs * (1.0 + 1e-12);
    const double r = std::log(p.rhs / p.lhs);
    ss += r * r;
  }
  out.residual = out.panel.empty() ? 0.0 : std::sqrt(ss / out.panel.size());

  out.ray_monotone = true;
  for (double s : cfg.ray_scales) {
    const Vec3 q = ray_q(s);
    CrossingPoint pt{cfg.ray_energy, cfg.ray_energy, cfg.ray_sign, q, triple_norm(q), cfg.ray_eta,
                     0.0, 0.0};
    pt.lhs = crossing_integral(pt.alpha, pt.beta, q, pt.eta, pt.sign, se, cfg.quad);
    if (!out.ray.empty()) out.ray_monotone &= pt.lhs < out.ray.back().lhs;
    out.ray.push_back(pt);
  }
  return out;
}

DegreeStudy degree_suppression_study(const DegreeStudyConfig& cfg) {
  require(cfg.n >= 2, "degree study needs n >= 2");
  std::vector<PermutationPairing> perms =
      (cfg.sample == 0 && cfg.n <= 6) ? all_permutations(cfg.n)
                                      : sample_permutations(cfg.n, cfg.sample, cfg.graph.seed);
  DegreeStudy out;
  out.n = cfg.n;
  out.lambda = cfg.graph.lambda;
  out.t = cfg.graph.t;
  out.estimates = graph_values(perms, cfg.graph);

  std::map<int, std::vector<double>> mags, errs;
  std::vector<double> dx, ly;
  for (const auto& e : out.estimates) {
    const double m = std::abs(e.mean);
    mags[e.degree].push_back(m);
    errs[e.degree].push_back(e.stderr_);
    if (m > 0.0) {
      dx.push_back(e.degree);
      ly.push_back(std::log(m));
    }
    if (e.degree == 0 && e.sigma == PermutationPairing::identity(cfg.n).to_string()) out.ladder = m;
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
  };
  const auto population = count_by_degree(std::min(cfg.n, 10));
  for (const auto& [d, v] : mags) {
    DegreeBin bin;
    bin.degree = d;
    bin.count = v.size();
    bin.median = median(v);
    bin.median_stderr = median(errs[d]);
    if (auto it = population.find(d); it != population.end()) bin.population = it->second;
    out.bins[d] = bin;
  }
  if (out.ladder == 0.0 && out.bins.count(0)) out.ladder = out.bins[0].median;
  out.decreasing_012 = out.bins.count(0) && out.bins.count(1) && out.bins.count(2) &&
                       out.bins[0].median > out.bins[1].median &&
                       out.bins[1].median > out.bins[2].median;

  if (dx.size() >= 3 && out.bins.size() >= 2) {
    const LineFit fit = fit_line(dx, ly);
    out.slope = fit.slope;
    out.intercept = fit.intercept;
    out.residual = fit.residual;
    const double ll = std::log(cfg.graph.lambda);
    out.gamma = fit.slope / ll;
    out.gamma_ci95 = 1.96 * fit.slope_stderr / std::abs(ll);
    for (const auto& [d, count] : population)
      if (d >= 2)
        out.remainder += std::exp(fit.intercept) * std::pow(cfg.graph.lambda, out.gamma * d) *
                         static_cast<double>(count);
  }
  return out;
}

GraphBoundReport make_report(const DegreeStudy* degree, const RungStudy* rung,
                             const DispersionBoundFit* dispersion, const CrossingReport* crossing) {
  GraphBoundReport r;
  if (degree) {
    r.gamma = degree->gamma;
    r.gamma_ci95 = degree->gamma_ci95;
    r.degree_residual = degree->residual;
  }
  if (rung) {
    r.c0 = rung->c0;
    r.rung_exponent = rung->exponent;
    r.rung_exponent_ci95 = rung->exponent_ci95;
    r.rung_residual = rung->residual;
  }
  if (dispersion) r.c = dispersion->c;
  if (crossing) {
    r.b = crossing->b;
    r.C = crossing->C;
    r.crossing_residual = crossing->residual;
  }
  return r;
}

}  // namespace qdlab::graphs
