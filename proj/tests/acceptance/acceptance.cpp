// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any selected criterion fails.
//
//   qdlab_acceptance [N ...] [--json FILE]

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/compare.hpp"
#include "core/disorder.hpp"
#include "core/evolution.hpp"
#include "core/graph_bounds.hpp"
#include "core/graph_value.hpp"
#include "core/kinetics.hpp"
#include "core/lattice.hpp"
#include "core/permutation.hpp"
#include "core/self_energy.hpp"
#include "core/wigner.hpp"

using namespace qdlab;
using evolution::Representation;
using evolution::WaveFunction;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
  nlohmann::json data = nlohmann::json::object();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

WaveFunction random_state(int L, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n;
  WaveFunction psi(L);
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = {n(gen), n(gen)};
  psi.normalize();
  return psi;
}

WaveFunction standard_packet(int L) {
  return evolution::gaussian_packet(L, {L / 2.0, L / 2.0, L / 2.0}, 1.5, {kPi / 2, kPi / 2, kPi / 2});
}

Eigen::MatrixXcd dense_hamiltonian(int L, const std::vector<double>& v, double lambda) {
  const int n = L * L * L;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
  auto at = [L](int a, int b, int c) { return ((a + L) % L * L + (b + L) % L) * L + (c + L) % L; };
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b)
      for (int c = 0; c < L; ++c) {
        const int i = at(a, b, c);
        H(i, i) += 3.0 + lambda * v[i];
        for (int s : {-1, 1}) {
          H(i, at(a + s, b, c)) -= 0.5;
          H(i, at(a, b + s, c)) -= 0.5;
          H(i, at(a, b, c + s)) -= 0.5;
        }
      }
  return H;
}

// 1. Free ballistic motion.
Outcome free_ballistic() {
  const int L = 32;
  std::vector<double> times;
  for (int k = 0; k <= 32; ++k) times.push_back(0.25 * k);
  const std::vector<evolution::MsdWindow> w{{2.0, 8.0}};
  const auto rep = evolution::msd_scaling_report({disorder::DisorderKind::kGaussian, 0.0, 1}, standard_packet(L),
                                                 times, 2, w, {});
  const auto& f = rep.fits.front();
  Outcome o;
  o.passed = f.points >= 2 && std::abs(f.exponent - 2.0) <= 0.05;
  o.detail = fmt("exponent %.4f on t in [2, 8] (%d points before wrap), want 2.00 +- 0.05", f.exponent, f.points);
  o.data = {{"exponent", f.exponent}, {"points", f.points}};
  return o;
}

// 2. Split-step propagator against the dense exponential.
Outcome propagator_accuracy() {
  const int L = 8;
  const double lambda = 0.5, t = 1.0;
  const auto real = disorder::sample_potential({disorder::DisorderKind::kGaussian, lambda, 1}, L, 0);
  const auto psi0 = standard_packet(L);
  const Eigen::MatrixXcd U = (cplx(0.0, -t) * dense_hamiltonian(L, real.values, lambda)).exp();
  Eigen::VectorXcd v0(psi0.size());
  for (std::size_t i = 0; i < psi0.size(); ++i) v0[i] = psi0[i];
  const Eigen::VectorXcd ref = U * v0;
  auto error = [&](double dt, evolution::Scheme scheme) {
    evolution::PropagatorConfig c;
    c.dt = dt;
    c.scheme = scheme;
    const auto psi = evolution::evolve(psi0, real, lambda, t, c);
    double s = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) s += std::norm(psi[i] - ref[i]);
    return std::sqrt(s);
  };
  const double e1 = error(1e-3, evolution::Scheme::kStrangSplit);
  const double e2 = error(2e-3, evolution::Scheme::kStrangSplit);
  const double ec = error(1e-3, evolution::Scheme::kChebyshev);
  const double ratio = e2 / e1;
  Outcome o;
  o.passed = e1 < 1e-8 && std::abs(ratio - 4.0) < 0.4;
  o.detail = fmt("split-step error %.3e at dt=1e-3 (want < 1e-8), ratio %.3f for doubled dt (want ~4); "
                 "Chebyshev error %.3e",
                 e1, ratio, ec);
  o.data = {{"error_dt_1e-3", e1}, {"error_dt_2e-3", e2}, {"ratio", ratio}, {"chebyshev_error", ec}};
  return o;
}

// 3. Duhamel reconstruction and the unitarity remainder inequality.
Outcome duhamel() {
  const int L = 8;
  const double lambda = 0.5;
  const auto real = disorder::sample_potential({disorder::DisorderKind::kGaussian, lambda, 2}, L, 0);
  const auto psi0 = standard_packet(L);
  bool ok = true;
  std::string detail;
  nlohmann::json rows = nlohmann::json::array();
  for (double t : {0.5, 1.0, 2.0}) {
    const auto d = evolution::duhamel_terms(psi0, real, lambda, t, 3);
    const bool good = d.reconstruction_error < 1e-6 && d.unitarity_lhs <= d.unitarity_rhs;
    ok &= good;
    detail += fmt("t=%.1f err %.2e, ||Psi_3||^2 %.3e <= %.3e; ", t, d.reconstruction_error, d.unitarity_lhs,
                  d.unitarity_rhs);
    rows.push_back({{"t", t},
                    {"reconstruction_error", d.reconstruction_error},
                    {"unitarity_lhs", d.unitarity_lhs},
                    {"unitarity_rhs", d.unitarity_rhs}});
  }
  return {ok, detail, {{"rows", rows}}};
}

// 4. Wigner marginal and xi = 0 identities, L2 continuity on random pairs.
Outcome wigner_identities() {
  double worst_marginal = 0.0, worst_xi0 = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const int L = 4, n = 512;
    const auto psi = random_state(L, 1000 + s);
    const auto a = psi.in(Representation::kMomentum);
    const auto pw = wigner::wigner_position(wigner::wigner_fourier(psi, 1.0, wigner::DualGrid::full(L)));
    const lattice::MomentumGrid half(2 * L), mg(L);
    for (int u = 0; u < n; ++u) {
      cplx sx = 0.0, sv = 0.0;
      for (int j = 0; j < n; ++j) {
        sx += pw.at(j, u);
        sv += pw.at(u, j);
      }
      const auto c = half.coords(u);
      const bool even = c[0] % 2 == 0 && c[1] % 2 == 0 && c[2] % 2 == 0;
      const std::size_t k = even ? mg.index({c[0] / 2, c[1] / 2, c[2] / 2}) : 0;
      worst_marginal = std::max(worst_marginal, std::abs(sx - (even ? std::norm(a[k]) : 0.0)));
      worst_marginal = std::max(worst_marginal, std::abs(sv - (even ? std::norm(psi[k]) : 0.0)));
    }
  }
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto psi = random_state(8, 2000 + s);
    const auto a = psi.in(Representation::kMomentum);
    const auto w = wigner::wigner_fourier(psi, 1.0, wigner::DualGrid::subset(8, {Index3{0, 0, 0}}));
    for (std::size_t p = 0; p < a.size(); ++p)
      worst_xi0 = std::max(worst_xi0, std::abs(w.slices[0][p] - std::norm(a[p])));
  }
  const auto grid = wigner::DualGrid::full(6);
  const auto obs = wigner::ObservableSymbol::from_function(grid, 1.0, [](const Vec3& xi, const Vec3& v) {
    return std::exp(-0.5 * dot(xi, xi)) * cplx(std::cos(v[0]) + 0.5, 0.3 * std::sin(v[1] - v[2]));
  });
  int violated = 0;
  double worst_ratio = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto c = wigner::wigner_l2_continuity_check(random_state(6, 3000 + 2 * s), random_state(6, 3001 + 2 * s), obs);
    violated += c.lhs > c.rhs_guaranteed;
    worst_ratio = std::max(worst_ratio, c.lhs / c.rhs_guaranteed);
  }
  Outcome o;
  o.passed = worst_marginal < 1e-13 && worst_xi0 < 1e-15 && violated == 0;
  o.detail = fmt("marginal identities %.1e, xi=0 identity %.1e, continuity violated on %d/100 pairs "
                 "(max lhs/rhs %.3f)",
                 worst_marginal, worst_xi0, violated, worst_ratio);
  o.data = {{"marginal", worst_marginal}, {"xi0", worst_xi0}, {"violated", violated}, {"max_ratio", worst_ratio}};
  return o;
}

// 5. Kinetic-limit trend.
Outcome kinetic_trend() {
  std::vector<double> l1;
  std::string detail;
  for (double lambda : {0.5, 0.3, 0.2}) {
    compare::KineticCompareConfig c;
    c.lambda = lambda;
    c.side = 32;
    c.count = 200;
    c.kinetic_time = 1.0;
    const auto r = compare::kinetic_compare(c);
    l1.push_back(r.l1);
    detail += fmt("lambda=%.1f L1 %.4f; ", lambda, r.l1);
  }
  Outcome o;
  o.passed = l1[0] > l1[1] && l1[1] > l1[2] && l1[2] < 0.15;
  o.detail = detail + "want decreasing and < 0.15 at lambda=0.2";
  o.data = {{"lambdas", {0.5, 0.3, 0.2}}, {"l1", l1}};
  return o;
}

// 6. Diffusive regime.
Outcome diffusive() {
  compare::DiffusiveCompareConfig c;
  c.lambda = 0.5;
  c.side = 64;
  c.count = 50;
  const auto r = compare::diffusive_compare(c);
  Outcome o;
  o.passed = r.late_points >= 2 && r.late_exponent >= 0.85 && r.late_exponent <= 1.15;
  o.detail = fmt("late-window exponent %.3f +- %.3f on t in [%.0f, %.0f] (%d points), want [0.85, 1.15]; "
                 "spread rate %.3f vs 6<D11>/lambda^2 = %.3f",
                 r.late_exponent, r.late_ci95, c.window_lo / (c.lambda * c.lambda),
                 c.window_hi / (c.lambda * c.lambda), r.late_points, r.spread_rate, r.predicted_rate);
  o.data = {{"late_exponent", r.late_exponent},
            {"late_ci95", r.late_ci95},
            {"spread_rate", r.spread_rate},
            {"predicted_rate", r.predicted_rate}};
  return o;
}

// 7. Boltzmann to heat consistency.
Outcome boltzmann_heat() {
  kinetics::VarianceStudyConfig c;
  const auto s = kinetics::boltzmann_longtime_variance(c);
  const double d11 = lattice::EnergyLevels(lattice::MomentumGrid(c.vside)).diffusion_11(c.energy, c.solver.kernel.h);
  const double d11_64 = lattice::EnergyLevels(lattice::MomentumGrid(64)).diffusion_11(c.energy, c.solver.kernel.h);
  const double rel = s.rate / (2.0 * d11) - 1.0;
  Outcome o;
  o.passed = std::abs(rel) < 0.05;
  o.detail = fmt("variance rate %.4f +- %.4f vs 2 D11(3) = %.4f on the %d^3 velocity grid (%.2f%%); "
                 "2 D11(3) at L=64 is %.4f",
                 s.rate, s.rate_stderr, 2 * d11, c.vside, 100 * rel, 2 * d11_64);
  o.data = {{"rate", s.rate}, {"d11", d11}, {"d11_64", d11_64}, {"relative", rel}};
  return o;
}

// 8. Self-energy.
Outcome self_energy() {
  const auto se = graphs::SelfEnergy::build(0.2);
  const lattice::EnergyLevels lv{lattice::MomentumGrid(64)};
  double worst = 0.0;
  for (double a = 0.5; a <= 5.5 + 1e-9; a += 0.05) {
    const double want = -kPi * lv.dos(a, lattice::kDefaultBroadening);
    worst = std::max(worst, std::abs(se.Theta(a).imag() / want - 1.0));
  }
  const auto fit = graphs::renormalized_dispersion_check(se, 64);
  Outcome o;
  o.passed = worst < 0.02 && fit.max_im_omega <= 0.0 && fit.c > 0.0;
  o.detail = fmt("max |Im Theta / (-pi Phi) - 1| = %.4f on [0.5, 5.5] (want < 0.02); max Im omega %.3e; "
                 "fitted c %.4f",
                 worst, fit.max_im_omega, fit.c);
  o.data = {{"plemelj", worst}, {"max_im_omega", fit.max_im_omega}, {"c", fit.c}};
  return o;
}

// 9. Degree combinatorics.
Outcome combinatorics() {
  bool bound = true;
  std::string viol;
  nlohmann::json counts = nlohmann::json::object();
  bool bound_boundary = true;
  for (int n = 1; n <= 8; ++n) {
    std::map<int, std::uint64_t> boundary;
    for (const auto& s : graphs::all_permutations(n)) ++boundary[s.degree_with_boundary()];
    for (const auto& [d, k] : graphs::count_by_degree(n)) {
      counts[std::to_string(n)][std::to_string(d)] = k;
      if (static_cast<double>(k) > graphs::degree_count_bound(n, d)) {
        bound = false;
        viol += fmt("N(%d,%d)=%llu > %.0f ", n, d, static_cast<unsigned long long>(k), graphs::degree_count_bound(n, d));
      }
    }
    for (const auto& [d, k] : boundary) bound_boundary &= static_cast<double>(k) <= graphs::degree_count_bound(n, d);
  }
  bool zero = true;
  for (int n = 1; n <= 8; ++n)
    zero &= graphs::PermutationPairing::identity(n).degree() == 0 && graphs::PermutationPairing::reversal(n).degree() == 0;
  Outcome o;
  o.passed = bound && zero;
  o.detail = std::string("bound ") + (bound ? "holds" : "violated: " + viol) +
             (zero ? "; degree(identity) = degree(reversal) = 0" : "; identity/reversal degree nonzero") +
             fmt("; boundary convention: bound %s, degree(reversal) = %d", bound_boundary ? "holds" : "violated",
                 graphs::PermutationPairing::reversal(8).degree_with_boundary());
  o.data = {{"counts", counts}, {"bound", bound}, {"boundary_bound", bound_boundary}};
  return o;
}

// 10. Graph estimates.
Outcome graph_estimates() {
  graphs::GraphValueConfig g;
  g.lambda = 0.2;
  g.t = 1.0 / (g.lambda * g.lambda);
  g.replicates = 16;
  auto schwarz = [](const std::vector<graphs::GraphValueEstimate>& est, const std::set<std::string>& only) {
    const auto& id = est.front();
    int bad = 0;
    for (const auto& e : est) {
      if (!only.empty() && !only.count(e.sigma)) continue;
      bad += std::abs(e.mean) > id.mean.real() + 3.0 * std::hypot(e.stderr_, id.stderr_);
    }
    return bad;
  };

  g.samples = 1 << 16;
  const auto s3 = graphs::graph_values(graphs::all_permutations(3), g);
  const int bad3 = schwarz(s3, {});

  graphs::DegreeStudyConfig dc;
  dc.n = 5;
  dc.graph = g;
  dc.graph.samples = 1 << 20;
  const auto study = graphs::degree_suppression_study(dc);
  std::set<std::string> sample;
  for (const auto& p : graphs::sample_permutations(5, 50, 2026)) sample.insert(p.to_string());
  std::vector<graphs::GraphValueEstimate> ordered = study.estimates;
  std::stable_partition(ordered.begin(), ordered.end(), [](const auto& e) { return e.sigma == "1 2 3 4 5"; });
  const int bad5 = schwarz(ordered, sample);

  g.samples = 1 << 18;
  const auto ladder2 = graphs::graph_value(graphs::PermutationPairing::identity(2), g);
  const double l2 = ladder2.mean.real();
  const bool ladder_ok = l2 >= 0.5 / 3.0 && l2 <= 1.5;

  const auto& b = study.bins;
  const double m0 = b.at(0).median, m1 = b.at(1).median, m2 = b.at(2).median;
  Outcome o;
  o.passed = bad3 == 0 && bad5 == 0 && study.decreasing_012 && ladder_ok;
  o.detail = fmt("Schwarz violations S_3 %d/6, S_5 sample %d/%zu; degree-bin medians %.3e (+-%.1e), %.3e (+-%.1e), "
                 "%.3e (+-%.1e) %s; gamma %.2f; bare ladder n=2 %.3f +- %.3f (want within factor 3 of 0.5)",
                 bad3, bad5, sample.size(), m0, b.at(0).median_stderr, m1, b.at(1).median_stderr, m2,
                 b.at(2).median_stderr, study.decreasing_012 ? "decreasing" : "NOT strictly decreasing", study.gamma,
                 l2, ladder2.stderr_);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : study.estimates)
    rows.push_back({{"sigma", e.sigma}, {"degree", e.degree}, {"mean_re", e.mean.real()}, {"mean_im", e.mean.imag()},
                    {"stderr", e.stderr_}});
  o.data = {{"schwarz_s3", bad3}, {"schwarz_s5", bad5},   {"medians", {m0, m1, m2}},
            {"gamma", study.gamma}, {"ladder_n2", l2}, {"n5", rows}};
  return o;
}

// 11. Renormalized and bare rung.
Outcome rung() {
  const auto se = graphs::SelfEnergy::build(0.2);
  const auto r = graphs::renormalized_rung_study(se);
  const auto bare = graphs::bare_rung_study(se);
  Outcome o;
  o.passed = r.strictly_decreasing && bare.growing;
  o.detail = fmt("|rung - 1| = %.4f, %.4f, %.4f at lambda 0.4, 0.2, 0.1 (fit %.2f lambda^%.2f); "
                 "bare |rung| = %.3g, %.3g, %.3g at eta 1e-2, 1e-3, 1e-4 (slope %.2f)",
                 r.deviations[0], r.deviations[1], r.deviations[2], r.c0, r.exponent, bare.magnitudes[0],
                 bare.magnitudes[1], bare.magnitudes[2], bare.slope);
  o.data = {{"deviations", r.deviations}, {"bare", bare.magnitudes}, {"bare_slope", bare.slope}};
  return o;
}

// 12. Crossing bound.
Outcome crossing() {
  const auto r = graphs::crossing_bound_check();
  std::vector<double> ray;
  for (const auto& p : r.ray) ray.push_back(p.lhs);
  Outcome o;
  o.passed = r.max_exponent <= 0.80 && r.ray_monotone;
  o.detail = fmt("max fitted eta-exponent %.3f (want <= 0.80); ray lhs %.3g -> %.3g %s", r.max_exponent, ray.front(),
                 ray.back(), r.ray_monotone ? "monotone" : "NOT monotone");
  o.data = {{"max_exponent", r.max_exponent}, {"b", r.b}, {"C", r.C}, {"ray", ray}};
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  const std::vector<Criterion> all{
      {1, "free-ballistic", free_ballistic},   {2, "propagator", propagator_accuracy},
      {3, "duhamel", duhamel},                 {4, "wigner-identities", wigner_identities},
      {5, "kinetic-trend", kinetic_trend},     {6, "diffusive", diffusive},
      {7, "boltzmann-heat", boltzmann_heat},   {8, "self-energy", self_energy},
      {9, "combinatorics", combinatorics},     {10, "graph-estimates", graph_estimates},
      {11, "rung", rung},                      {12, "crossing", crossing},
  };
  std::set<int> selected;
  std::string json_path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--json" && i + 1 < argc) {
      json_path = argv[++i];
    } else {
      try {
        selected.insert(std::stoi(a));
      } catch (const std::exception&) {
        std::fprintf(stderr, "usage: %s [N ...] [--json FILE]\n", argv[0]);
        return 2;
      }
    }
  }
  int failed = 0;
  nlohmann::json results = nlohmann::json::array();
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what(), {}};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.passed;
    std::printf("%s %2d %-18s %s (%.1f s)\n", o.passed ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    results.push_back({{"id", c.id}, {"name", c.name}, {"passed", o.passed}, {"detail", o.detail},
                       {"seconds", secs}, {"data", o.data}});
  }
  if (!json_path.empty()) {
    std::ofstream os(json_path, std::ios::app);
    for (const auto& r : results) os << r.dump() << '\n';
  }
  return failed == 0 ? 0 : 1;
}
