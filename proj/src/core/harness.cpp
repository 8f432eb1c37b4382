// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>

#include "core/compare.hpp"
#include "core/disorder.hpp"
#include "core/evolution.hpp"
#include "core/graph_bounds.hpp"
#include "core/graph_value.hpp"
#include "core/kinetics.hpp"
#include "core/lattice.hpp"
#include "core/parallel.hpp"
#include "core/permutation.hpp"
#include "core/self_energy.hpp"
#include "core/wigner.hpp"

namespace qdlab::harness {
namespace {

namespace fs = std::filesystem;

[[noreturn]] void invalid(const std::string& what) { fail(ErrorCode::kConfigInvalid, what); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Json common_defaults() {
  return {{"kind", ""},
          {"lambda", 0.3},
          {"side", 32},
          {"kappa", 0.0},
          {"seed", 1},
          {"ensemble", 4},
          {"disorder", "gaussian"},
          {"output", "qdlab-out"},
          {"dt", 0.05},
          {"scheme", "strang"},
          {"norm_tolerance", 1e-8},
          {"times", {{"t_end", 10.0}, {"step", 1.0}}},
          {"packet", {{"width", 1.5}, {"k0", {kPi / 2, kPi / 2, kPi / 2}}}},
          {"expect", Json::object()}};
}

Json kind_defaults(const std::string& kind) {
  if (kind == "msd") return {{"windows", Json::array()}};
  if (kind == "kinetic-compare")
    return {{"kinetic_time", 1.0}, {"coarse", 4}, {"h", lattice::kDefaultBroadening}};
  if (kind == "diffusive-compare") return {{"window", {3.0, 7.0}}};
  if (kind == "graphs")
    return {{"n", 3},
            {"t", 0.0},
            {"samples", 1 << 14},
            {"replicates", 16},
            {"renormalized", false},
            {"sampler", "qmc"},
            {"permutations", 0},
            {"xi", {0.0, 0.0, 0.0}},
            {"uniform_mix", 0.1},
            {"self_energy_side", 64}};
  if (kind == "dos")
    return {{"h", lattice::kDefaultBroadening},
            {"points", lattice::kDefaultEnergyPoints},
            {"emin", lattice::kDefaultEnergyMin},
            {"emax", lattice::kDefaultEnergyMax}};
  if (kind == "boltzmann")
    return {{"energy", 3.0},     {"vside", 32},        {"x_points", 64},
            {"x_width", 2.0},    {"T_end", 10.0},      {"fit", {5.0, 10.0}},
            {"dT", 0.05},        {"sample_every", 0.5}, {"transport", "spectral"},
            {"shell", "gaussian"}, {"rate_scale", 1.0}};
  if (kind == "rung")
    return {{"energy", 3.0},
            {"eta_factor", 1e-2},
            {"bare_etas", {1e-2, 1e-3, 1e-4}},
            {"r", {0.0, 0.0, 0.0}},
            {"self_energy_side", 64}};
  if (kind == "crossing")
    return {{"energies", {1.5, 3.0, 4.5}},
            {"q_scales", {0.1, 0.5}},
            {"etas", {1e-1, 1e-2, 1e-3}},
            {"ray_scales", {0.05, 0.1, 0.2, 0.4, 0.8}},
            {"ray_energy", 3.0},
            {"ray_eta", 1e-2},
            {"renormalized", false},
            {"panels", 16},
            {"self_energy_side", 64}};
  invalid("unknown experiment kind '" + kind + "'");
}

bool same_type(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

// Overlays `user` on `base`, rejecting keys absent from `base` and values of
// a different JSON type. Arrays are replaced whole.
void overlay(Json& base, const Json& user, const std::string& path) {
  if (!user.is_object()) invalid(path + " must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) invalid("unknown key '" + key + "'");
    Json& slot = base[it.key()];
    if (slot.is_object() && it.key() != "expect") {
      overlay(slot, *it, key);
    } else {
      if (!same_type(slot, *it)) invalid("key '" + key + "' has the wrong type");
      slot = *it;
    }
  }
}

double number(const Json& j, const std::string& key, double lo, double hi) {
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v) || v < lo || v > hi)
    invalid("'" + key + "' = " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
            std::to_string(hi) + "]");
  return v;
}

long integer(const Json& j, const std::string& key, long lo, long hi) {
  const Json& v = j.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) invalid("'" + key + "' must be an integer");
  const long x = v.get<long>();
  if (x < lo || x > hi)
    invalid("'" + key + "' = " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
            std::to_string(hi) + "]");
  return x;
}

std::vector<double> numbers(const Json& j, const std::string& key, std::size_t min_count) {
  const Json& v = j.at(key);
  if (!v.is_array()) invalid("'" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) invalid("'" + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  if (out.size() < min_count) invalid("'" + key + "' needs at least " + std::to_string(min_count) + " values");
  return out;
}

Vec3 vec3(const Json& j, const std::string& key) {
  const auto v = numbers(j, key, 3);
  if (v.size() != 3) invalid("'" + key + "' must have three components");
  return {v[0], v[1], v[2]};
}

std::size_t memory_budget() {
  if (const char* s = std::getenv("QDLAB_MEMORY_MB")) {
    const long mb = std::atol(s);
    if (mb > 0) return static_cast<std::size_t>(mb) << 20;
  }
  return std::size_t{4096} << 20;
}

void check_resources(const Json& c, const std::string& kind) {
  const auto side = static_cast<std::size_t>(c["side"].get<long>());
  const std::size_t workers = static_cast<std::size_t>(worker_count());
  std::size_t need = 0;
  if (kind == "msd" || kind == "diffusive-compare" || kind == "kinetic-compare")
    need = side * side * side * sizeof(cplx) * 8 * workers;
  else if (kind == "dos")
    need = side * side * side * sizeof(double) * 4;
  else if (kind == "boltzmann") {
    const auto& b = c["boltzmann"];
    const auto v = static_cast<std::size_t>(b["vside"].get<long>());
    need = static_cast<std::size_t>(b["x_points"].get<long>()) * v * v * v * sizeof(cplx) * 4;
  }
  if (need > memory_budget())
    fail(ErrorCode::kResourceExceeded,
         "estimated memory " + std::to_string(need >> 20) + " MB exceeds the budget of " +
             std::to_string(memory_budget() >> 20) + " MB (QDLAB_MEMORY_MB)");
}

void validate_resolved(Json& c) {
  const std::string kind = c["kind"].get<std::string>();
  number(c, "lambda", 0.0, 10.0);
  const long side = integer(c, "side", 4, 1024);
  if (side % 2) invalid("'side' must be even");
  number(c, "kappa", 0.0, 10.0);
  integer(c, "ensemble", 1, 1000000);
  if (!c["seed"].is_number_unsigned() && !(c["seed"].is_number_integer() && c["seed"].get<long>() >= 0))
    invalid("'seed' must be a nonnegative integer");
  try {
    disorder::parse_kind(c["disorder"].get<std::string>());
  } catch (const Error&) {
    invalid("'disorder' must be gaussian or bernoulli");
  }
  number(c, "dt", 1e-6, 10.0);
  const auto scheme = c["scheme"].get<std::string>();
  if (scheme != "strang" && scheme != "chebyshev") invalid("'scheme' must be strang or chebyshev");
  number(c, "norm_tolerance", 0.0, 1.0);
  auto& times = c["times"];
  const double t_end = number(times, "t_end", 0.0, 1e6);
  const double step = number(times, "step", 1e-9, 1e6);
  if (step > t_end && t_end > 0.0) invalid("'times.step' exceeds 'times.t_end'");
  number(c["packet"], "width", 1e-3, 1e3);
  vec3(c["packet"], "k0");
  for (auto it = c["expect"].begin(); it != c["expect"].end(); ++it) {
    const Json& v = *it;
    const bool range = v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number();
    if (!range && !v.is_boolean())
      invalid("'expect." + it.key() + "' must be [lo, hi] or a boolean");
  }

  auto& b = c[kind];
  if (kind == "msd") {
    if (b["windows"].empty()) b["windows"] = Json::array({Json::array({0.25 * t_end, t_end})});
    for (const auto& w : b["windows"]) {
      if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number() ||
          w[0].get<double>() >= w[1].get<double>())
        invalid("'msd.windows' entries must be increasing pairs");
    }
  } else if (kind == "kinetic-compare") {
    number(b, "kinetic_time", 0.0, 1e3);
    const long coarse = integer(b, "coarse", 1, side);
    if (side % coarse) invalid("'kinetic-compare.coarse' must divide 'side'");
    number(b, "h", 1e-4, 1.0);
    if (c["lambda"].get<double>() <= 0.0) invalid("kinetic-compare needs lambda > 0");
  } else if (kind == "diffusive-compare") {
    const auto w = numbers(b, "window", 2);
    if (w.size() != 2 || w[0] <= 0.0 || w[1] <= w[0]) invalid("'diffusive-compare.window' must be 0 < lo < hi");
    if (c["lambda"].get<double>() <= 0.0) invalid("diffusive-compare needs lambda > 0");
  } else if (kind == "graphs") {
    integer(b, "n", 0, 11);
    if (b["t"].get<double>() <= 0.0) {
      const double l = c["lambda"].get<double>();
      if (l <= 0.0) invalid("graphs need 'graphs.t' when lambda = 0");
      b["t"] = 1.0 / (l * l);
    }
    number(b, "t", 1e-6, 1e6);
    integer(b, "samples", 1, 1L << 34);
    integer(b, "replicates", 2, 4096);
    const auto s = b["sampler"].get<std::string>();
    if (s != "qmc" && s != "prng") invalid("'graphs.sampler' must be qmc or prng");
    integer(b, "permutations", 0, 1000000);
    vec3(b, "xi");
    number(b, "uniform_mix", 1e-6, 1.0 - 1e-6);
    integer(b, "self_energy_side", 8, 256);
  } else if (kind == "dos") {
    number(b, "h", 1e-4, 1.0);
    integer(b, "points", 2, 1000000);
    if (number(b, "emin", -100, 100) >= number(b, "emax", -100, 100)) invalid("'dos.emin' must be below 'dos.emax'");
  } else if (kind == "boltzmann") {
    number(b, "energy", 0.0, 6.0);
    integer(b, "vside", 4, 128);
    integer(b, "x_points", 1, 4096);
    number(b, "x_width", 1e-3, 1e3);
    const double T_end = number(b, "T_end", 1e-6, 1e4);
    const auto fit = numbers(b, "fit", 2);
    if (fit.size() != 2 || fit[0] >= fit[1] || fit[1] > T_end) invalid("'boltzmann.fit' must be lo < hi <= T_end");
    number(b, "dT", 1e-6, 10.0);
    number(b, "sample_every", 1e-6, 1e4);
    const auto tr = b["transport"].get<std::string>();
    if (tr != "spectral" && tr != "upwind") invalid("'boltzmann.transport' must be spectral or upwind");
    const auto sh = b["shell"].get<std::string>();
    if (sh != "gaussian" && sh != "binned") invalid("'boltzmann.shell' must be gaussian or binned");
    number(b, "rate_scale", 1e-6, 1e6);
  } else if (kind == "rung") {
    number(b, "energy", -1.0, 7.0);
    number(b, "eta_factor", 1e-12, 1e3);
    for (double e : numbers(b, "bare_etas", 2))
      if (e <= 0.0) invalid("'rung.bare_etas' must be positive");
    vec3(b, "r");
    integer(b, "self_energy_side", 8, 256);
    if (c["lambda"].get<double>() <= 0.0) invalid("rung needs lambda > 0");
  } else if (kind == "crossing") {
    numbers(b, "energies", 1);
    numbers(b, "q_scales", 1);
    for (double e : numbers(b, "etas", 2))
      if (e <= 0.0 || e >= 1.0) invalid("'crossing.etas' must lie in (0, 1)");
    numbers(b, "ray_scales", 2);
    number(b, "ray_energy", -1.0, 7.0);
    number(b, "ray_eta", 1e-12, 1.0);
    integer(b, "panels", 1, 1024);
    integer(b, "self_energy_side", 8, 256);
  }

  const double lambda = c["lambda"].get<double>();
  const double kappa = c["kappa"].get<double>();
  double t_last = t_end;
  if (kind == "graphs") t_last = b["t"].get<double>();
  if (kind == "kinetic-compare" && lambda > 0.0)
    t_last = b["kinetic_time"].get<double>() / (lambda * lambda);
  c["derived"] = {{"epsilon", std::pow(lambda, 2.0 + kappa / 2.0)},
                  {"t", t_last},
                  {"kinetic_time", lambda * lambda * t_last},
                  {"diffusive_time", std::pow(lambda, kappa + 2.0) * t_last}};
}

evolution::PropagatorConfig propagator(const Json& c) {
  evolution::PropagatorConfig p;
  p.dt = c["dt"].get<double>();
  p.scheme = c["scheme"].get<std::string>() == "chebyshev" ? evolution::Scheme::kChebyshev
                                                           : evolution::Scheme::kStrangSplit;
  p.tolerance = c["norm_tolerance"].get<double>();
  return p;
}

disorder::DisorderSpec disorder_spec(const Json& c) {
  return {disorder::parse_kind(c["disorder"].get<std::string>()), c["lambda"].get<double>(),
          c["seed"].get<std::uint64_t>()};
}

evolution::WaveFunction packet(const Json& c) {
  const int side = c["side"].get<int>();
  const Vec3 center{side / 2.0, side / 2.0, side / 2.0};
  return evolution::gaussian_packet(side, center, c["packet"]["width"].get<double>(),
                                    vec3(c["packet"], "k0"));
}

std::vector<double> time_grid(const Json& c) {
  const double t_end = c["times"]["t_end"].get<double>();
  const double step = c["times"]["step"].get<double>();
  std::vector<double> t;
  for (long k = 0; k * step <= t_end * (1.0 + 1e-12); ++k) t.push_back(k * step);
  return t;
}

Json msd_rows(const std::vector<std::vector<evolution::MsdSample>>& series,
              const std::vector<std::uint64_t>& hashes) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < series.size(); ++r)
    for (const auto& s : series[r])
      rows.push_back({{"realization", s.realization},
                      {"seed", s.seed},
                      {"realization_hash", hex64(hashes.at(r))},
                      {"lambda", s.lambda},
                      {"L", s.side},
                      {"t", s.t},
                      {"msd", s.msd},
                      {"norm", s.norm},
                      {"energy", s.energy}});
  return rows;
}

InvariantResult check(const std::string& name, bool ok, const std::string& detail) {
  return {name, ok, detail};
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

double max_norm_drift(const Json& rows) {
  double d = 0.0;
  for (const auto& r : rows) d = std::max(d, std::abs(r["norm"].get<double>() - 1.0));
  return d;
}

struct Outcome {
  Json rows = Json::array();
  Json summary = Json::object();
  std::vector<InvariantResult> invariants;
  // CSV exports: file suffix -> contents.
  std::vector<std::pair<std::string, std::string>> exports;
  std::string rng = disorder::kRngAlgorithm;
};

Outcome run_msd(const Json& c) {
  Outcome o;
  const auto times = time_grid(c);
  std::vector<evolution::MsdWindow> windows;
  for (const auto& w : c["msd"]["windows"]) windows.push_back({w[0].get<double>(), w[1].get<double>()});
  const auto rep = evolution::msd_scaling_report(disorder_spec(c), packet(c), times,
                                                 c["ensemble"].get<int>(), windows, propagator(c));
  o.rows = msd_rows(rep.series, rep.realization_hashes);
  Json fits = Json::array();
  for (const auto& f : rep.fits)
    fits.push_back({{"t_lo", f.window.t_lo}, {"t_hi", f.window.t_hi}, {"points", f.points},
                    {"exponent", f.exponent}, {"ci95", f.ci95}});
  Json hashes = Json::array();
  for (auto h : rep.realization_hashes) hashes.push_back(hex64(h));
  o.summary = {{"count", rep.count},   {"times", rep.times},         {"mean_msd", rep.mean_msd},
               {"stderr_msd", rep.stderr_msd}, {"fits", fits},
               {"exponent", rep.fits.empty() ? 0.0 : rep.fits.front().exponent},
               {"realization_hashes", hashes}, {"primary", "exponent"}};
  const double drift = max_norm_drift(o.rows);
  o.summary["max_norm_drift"] = drift;
  o.invariants.push_back(check("norm conservation", drift <= c["norm_tolerance"].get<double>(),
                               "max |norm - 1| = " + fmt(drift)));
  bool fitted = true;
  for (const auto& f : rep.fits) fitted &= f.points >= 2 && std::isfinite(f.exponent);
  o.invariants.push_back(check("windows resolved before wrap", fitted, "every window holds two or more samples"));

  std::ostringstream csv;
  csv << "realization,seed,realization_hash,lambda,L,t,msd,norm,energy\n" << std::setprecision(17);
  for (const auto& r : o.rows)
    csv << r["realization"] << ',' << r["seed"] << ',' << r["realization_hash"].get<std::string>() << ','
        << r["lambda"].get<double>() << ',' << r["L"] << ',' << r["t"].get<double>() << ','
        << r["msd"].get<double>() << ',' << r["norm"].get<double>() << ','
        << r["energy"].get<double>() << '\n';
  o.exports.emplace_back("series.csv", csv.str());
  return o;
}

Outcome run_kinetic(const Json& c) {
  Outcome o;
  const auto& b = c["kinetic-compare"];
  compare::KineticCompareConfig k;
  k.lambda = c["lambda"].get<double>();
  k.side = c["side"].get<int>();
  k.count = c["ensemble"].get<int>();
  k.kinetic_time = b["kinetic_time"].get<double>();
  k.width = c["packet"]["width"].get<double>();
  k.k0 = vec3(c["packet"], "k0");
  k.coarse = b["coarse"].get<int>();
  k.seed = c["seed"].get<std::uint64_t>();
  k.kind = disorder::parse_kind(c["disorder"].get<std::string>());
  k.propagator = propagator(c);
  k.kernel.h = b["h"].get<double>();
  const auto r = compare::kinetic_compare(k);

  const int per = k.side / k.coarse;
  const lattice::MomentumGrid grid(k.side);
  const std::size_t cells = static_cast<std::size_t>(k.coarse) * k.coarse * k.coarse;
  std::vector<double> w(cells), b_(cells), init(cells), var(cells);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto n = grid.coords(i);
    const std::size_t cell = (static_cast<std::size_t>(n[0] / per) * k.coarse + n[1] / per) * k.coarse + n[2] / per;
    w[cell] += r.wigner_marginal[i];
    b_[cell] += r.boltzmann_marginal[i];
    init[cell] += r.initial_marginal[i];
    var[cell] += r.wigner_stderr[i] * r.wigner_stderr[i];
  }
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const int i = static_cast<int>(cell / (k.coarse * k.coarse)), j = static_cast<int>((cell / k.coarse) % k.coarse),
              l = static_cast<int>(cell % k.coarse);
    o.rows.push_back({{"cell", {i, j, l}},
                      {"wigner", w[cell]},
                      {"wigner_stderr_bound", std::sqrt(var[cell])},
                      {"boltzmann", b_[cell]},
                      {"initial", init[cell]}});
  }
  Json hashes = Json::array();
  for (auto h : r.realization_hashes) hashes.push_back(hex64(h));
  double sw = 0.0, sb = 0.0, minb = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sw += r.wigner_marginal[i];
    sb += r.boltzmann_marginal[i];
    minb = std::min(minb, r.boltzmann_marginal[i]);
  }
  o.summary = {{"l1", r.l1},
               {"l1_fine", r.l1_fine},
               {"l1_initial", r.l1_initial},
               {"t", r.t},
               {"kinetic_time", r.kinetic_time},
               {"count", r.count},
               {"realization_hashes", hashes},
               {"primary", "l1"}};
  o.invariants.push_back(check("wigner marginal normalized", std::abs(sw - 1.0) < 1e-10, "sum = " + fmt(sw)));
  o.invariants.push_back(check("boltzmann mass conserved", std::abs(sb - 1.0) < 1e-10, "sum = " + fmt(sb)));
  o.invariants.push_back(check("boltzmann nonnegative", minb > -1e-12, "min = " + fmt(minb)));

  std::ostringstream csv;
  csv << "kx,ky,kz,wigner,wigner_stderr,boltzmann,initial\n" << std::setprecision(17);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = grid.momentum(i);
    csv << p[0] << ',' << p[1] << ',' << p[2] << ',' << r.wigner_marginal[i] << ','
        << r.wigner_stderr[i] << ',' << r.boltzmann_marginal[i] << ',' << r.initial_marginal[i] << '\n';
  }
  o.exports.emplace_back("marginals.csv", csv.str());
  std::ostringstream slice;
  wigner::write_xi_slice_csv(slice, r.ensemble, Index3{0, 0, 0});
  o.exports.emplace_back("wigner-xi0.csv", slice.str());
  return o;
}

Outcome run_diffusive(const Json& c) {
  Outcome o;
  compare::DiffusiveCompareConfig d;
  d.lambda = c["lambda"].get<double>();
  d.side = c["side"].get<int>();
  d.count = c["ensemble"].get<int>();
  d.t_end = c["times"]["t_end"].get<double>();
  d.dt_sample = c["times"]["step"].get<double>();
  d.window_lo = c["diffusive-compare"]["window"][0].get<double>();
  d.window_hi = c["diffusive-compare"]["window"][1].get<double>();
  d.width = c["packet"]["width"].get<double>();
  d.k0 = vec3(c["packet"], "k0");
  d.seed = c["seed"].get<std::uint64_t>();
  d.kind = disorder::parse_kind(c["disorder"].get<std::string>());
  d.propagator = propagator(c);
  const auto r = compare::diffusive_compare(d);
  o.rows = msd_rows(r.report.series, r.report.realization_hashes);
  Json hashes = Json::array();
  for (auto h : r.report.realization_hashes) hashes.push_back(hex64(h));
  o.summary = {{"late_exponent", r.late_exponent},
               {"late_ci95", r.late_ci95},
               {"late_points", r.late_points},
               {"spread_rate", r.spread_rate},
               {"predicted_rate", r.predicted_rate},
               {"rate_ratio", r.predicted_rate > 0.0 ? r.spread_rate / r.predicted_rate : 0.0},
               {"times", r.report.times},
               {"mean_msd", r.report.mean_msd},
               {"realization_hashes", hashes},
               {"primary", "late_exponent"}};
  const double drift = max_norm_drift(o.rows);
  o.invariants.push_back(check("norm conservation", drift <= c["norm_tolerance"].get<double>(),
                               "max |norm - 1| = " + fmt(drift)));
  o.invariants.push_back(check("late window resolved before wrap", r.late_points >= 2,
                               std::to_string(r.late_points) + " samples in the window"));
  std::ostringstream csv;
  csv << "t,mean_msd,stderr_msd\n" << std::setprecision(17);
  for (std::size_t i = 0; i < r.report.times.size(); ++i)
    csv << r.report.times[i] << ',' << r.report.mean_msd[i] << ',' << r.report.stderr_msd[i] << '\n';
  o.exports.emplace_back("spread.csv", csv.str());
  return o;
}

Outcome run_graphs(const Json& c) {
  Outcome o;
  const auto& b = c["graphs"];
  graphs::GraphValueConfig g;
  g.lambda = c["lambda"].get<double>();
  g.t = b["t"].get<double>();
  g.xi = vec3(b, "xi");
  g.renormalized = b["renormalized"].get<bool>();
  g.samples = b["samples"].get<long>();
  g.replicates = b["replicates"].get<int>();
  g.sampler = b["sampler"].get<std::string>() == "prng" ? graphs::SamplerKind::kPseudoRandom
                                                       : graphs::SamplerKind::kQuasiRandom;
  g.seed = c["seed"].get<std::uint64_t>();
  g.uniform_mix = b["uniform_mix"].get<double>();
  std::optional<graphs::SelfEnergy> se;
  if (g.renormalized) {
    graphs::SelfEnergyConfig sc;
    sc.side = b["self_energy_side"].get<int>();
    se = graphs::SelfEnergy::build(g.lambda, sc);
    g.self_energy = &*se;
  }
  const int n = b["n"].get<int>();
  const int sample = b["permutations"].get<int>();
  std::vector<graphs::GraphValueEstimate> est;
  if (n >= 2) {
    graphs::DegreeStudyConfig dc;
    dc.n = n;
    dc.sample = sample;
    dc.graph = g;
    const auto study = graphs::degree_suppression_study(dc);
    est = study.estimates;
    Json bins = Json::array();
    for (const auto& [d, bin] : study.bins)
      bins.push_back({{"degree", d}, {"count", bin.count}, {"median", bin.median},
                      {"median_stderr", bin.median_stderr}, {"population", bin.population}});
    o.summary = {{"bins", bins},
                 {"gamma", study.gamma},
                 {"gamma_ci95", study.gamma_ci95},
                 {"slope", study.slope},
                 {"residual", study.residual},
                 {"ladder", study.ladder},
                 {"remainder", study.remainder},
                 {"decreasing_012", study.decreasing_012}};
  } else {
    std::vector<graphs::PermutationPairing> perms{graphs::PermutationPairing::identity(n)};
    est = graphs::graph_values(perms, g);
    o.summary = {{"ladder", std::abs(est.front().mean)}};
  }
  o.summary["primary"] = n >= 2 ? "gamma" : "ladder";
  o.rng = "R_d Kronecker sequence, Cranley-Patterson shifts from mt19937_64";

  const graphs::GraphValueEstimate* id = nullptr;
  const std::string id_name = graphs::PermutationPairing::identity(n).to_string();
  bool finite = true;
  for (const auto& e : est) {
    if (e.sigma == id_name) id = &e;
    finite &= std::isfinite(e.mean.real()) && std::isfinite(e.mean.imag()) && std::isfinite(e.stderr_);
    o.rows.push_back({{"n", e.n},
                      {"sigma", e.sigma},
                      {"degree", e.degree},
                      {"lambda", e.lambda},
                      {"t", e.t},
                      {"xi", {e.xi[0], e.xi[1], e.xi[2]}},
                      {"renormalized", e.renormalized},
                      {"mean_re", e.mean.real()},
                      {"mean_im", e.mean.imag()},
                      {"stderr", e.stderr_},
                      {"samples", e.samples}});
  }
  o.invariants.push_back(check("estimates finite", finite, std::to_string(est.size()) + " graphs"));
  const bool at_zero = g.xi[0] == 0.0 && g.xi[1] == 0.0 && g.xi[2] == 0.0;
  if (id != nullptr && at_zero) {
    int violations = 0;
    for (const auto& e : est) {
      const double tol = 3.0 * std::hypot(e.stderr_, id->stderr_);
      if (std::abs(e.mean) > id->mean.real() + tol) ++violations;
    }
    o.summary["schwarz_violations"] = violations;
    o.invariants.push_back(check("Schwarz domination by the ladder", violations == 0,
                                 std::to_string(violations) + " graphs above Val(id) + 3 se"));
  }
  return o;
}

Outcome run_dos(const Json& c) {
  Outcome o;
  const auto& b = c["dos"];
  const int side = c["side"].get<int>();
  const lattice::EnergyShellTable table(side, b["h"].get<double>(), b["points"].get<int>(),
                                        b["emin"].get<double>(), b["emax"].get<double>());
  const auto E = table.energies();
  const auto phi = table.dos();
  const auto d11 = table.diffusion_11();
  for (std::size_t i = 0; i < E.size(); ++i)
    o.rows.push_back({{"E", E[i]}, {"Phi", phi[i]}, {"D11", std::isnan(d11[i]) ? Json(nullptr) : Json(d11[i])}});
  const lattice::EnergyLevels levels{lattice::MomentumGrid(side)};
  const double h = b["h"].get<double>();
  o.summary = {{"side", side},
               {"h", h},
               {"dos_integral", table.dos_integral()},
               {"phi_1", levels.dos(1.0, h)},
               {"phi_3", levels.dos(3.0, h)},
               {"d11_3", levels.diffusion_11(3.0, h)},
               {"primary", "phi_1"}};
  const double integral = table.dos_integral();
  const bool full_band = b["emin"].get<double>() <= -10 * h && b["emax"].get<double>() >= 6.0 + 10 * h;
  if (full_band)
    o.invariants.push_back(check("density of states normalized", std::abs(integral - 1.0) < 1e-4,
                                 "integral = " + fmt(integral)));
  double asym = 0.0;
  for (std::size_t i = 0; i < E.size(); ++i) {
    const std::size_t j = E.size() - 1 - i;
    if (std::abs(E[i] + E[j] - 6.0) > 1e-9 || std::isnan(d11[i]) || std::isnan(d11[j])) continue;
    asym = std::max(asym, std::abs(d11[i] - d11[j]) / std::max(std::abs(d11[i]), 1e-300));
  }
  o.invariants.push_back(check("D11 symmetric about the band center", asym < 1e-8, "max relative asymmetry " + fmt(asym)));
  std::ostringstream csv;
  table.write_csv(csv);
  o.exports.emplace_back("shells.csv", csv.str());
  return o;
}

Outcome run_boltzmann(const Json& c) {
  Outcome o;
  const auto& b = c["boltzmann"];
  kinetics::VarianceStudyConfig v;
  v.energy = b["energy"].get<double>();
  v.vside = b["vside"].get<int>();
  v.x_points = b["x_points"].get<int>();
  v.x_width = b["x_width"].get<double>();
  v.T_end = b["T_end"].get<double>();
  v.fit_lo = b["fit"][0].get<double>();
  v.fit_hi = b["fit"][1].get<double>();
  v.sample_every = b["sample_every"].get<double>();
  v.solver.dT = b["dT"].get<double>();
  v.solver.transport = b["transport"].get<std::string>() == "upwind" ? kinetics::TransportScheme::kUpwind
                                                                    : kinetics::TransportScheme::kSpectral;
  v.solver.kernel.shell = b["shell"].get<std::string>() == "binned" ? kinetics::ShellModel::kBinned
                                                                   : kinetics::ShellModel::kGaussian;
  v.solver.kernel.rate_scale = b["rate_scale"].get<double>();
  const auto study = kinetics::boltzmann_longtime_variance(v);
  for (const auto& s : study.series)
    o.rows.push_back({{"T", s.T}, {"var_x", s.variance[0]}, {"var_y", s.variance[1]},
                      {"var_z", s.variance[2]}, {"mass", s.mass}, {"entropy", s.entropy}});
  const lattice::EnergyLevels levels{lattice::MomentumGrid(v.vside)};
  const double d11 = levels.diffusion_11(v.energy, v.solver.kernel.h) / v.solver.kernel.rate_scale;
  o.summary = {{"rate", study.rate},
               {"rate_stderr", study.rate_stderr},
               {"d11", d11},
               {"rate_ratio", study.rate / (2.0 * d11)},
               {"primary", "rate_ratio"}};
  double drift = 0.0;
  const double m0 = study.series.front().mass;
  for (const auto& s : study.series) drift = std::max(drift, std::abs(s.mass - m0) / m0);
  o.invariants.push_back(check("mass conserved", drift < 1e-6, "max relative drift " + fmt(drift)));
  std::ostringstream csv;
  kinetics::write_series_csv(csv, study.series);
  o.exports.emplace_back("series.csv", csv.str());
  return o;
}

Outcome run_rung(const Json& c) {
  Outcome o;
  const auto& b = c["rung"];
  const double lambda = c["lambda"].get<double>();
  graphs::SelfEnergyConfig sc;
  sc.side = b["self_energy_side"].get<int>();
  const auto se = graphs::SelfEnergy::build(lambda, sc);
  const double E = b["energy"].get<double>();
  const double eta = b["eta_factor"].get<double>() * lambda * lambda;
  const Vec3 r = vec3(b, "r");
  const cplx v = graphs::ladder_rung(E, E, r, lambda, eta, se, true);
  o.rows.push_back({{"renormalized", true}, {"lambda", lambda}, {"eta", eta}, {"re", v.real()},
                    {"im", v.imag()}, {"deviation", std::abs(v - 1.0)}});
  const auto bare = graphs::bare_rung_study(se, lambda, E, numbers(b, "bare_etas", 2));
  for (std::size_t i = 0; i < bare.etas.size(); ++i)
    o.rows.push_back({{"renormalized", false}, {"lambda", lambda}, {"eta", bare.etas[i]},
                      {"magnitude", bare.magnitudes[i]}});
  o.summary = {{"rung_re", v.real()},
               {"rung_im", v.imag()},
               {"deviation", std::abs(v - 1.0)},
               {"bare_slope", bare.slope},
               {"bare_growing", bare.growing},
               {"primary", "deviation"}};
  bool finite = std::isfinite(v.real()) && std::isfinite(v.imag());
  for (double m : bare.magnitudes) finite &= std::isfinite(m);
  o.invariants.push_back(check("rung values finite", finite, ""));
  return o;
}

Outcome run_crossing(const Json& c) {
  Outcome o;
  const auto& b = c["crossing"];
  graphs::CrossingConfig cc;
  cc.energies = numbers(b, "energies", 1);
  cc.q_scales = numbers(b, "q_scales", 1);
  cc.etas = numbers(b, "etas", 2);
  cc.ray_scales = numbers(b, "ray_scales", 2);
  cc.ray_energy = b["ray_energy"].get<double>();
  cc.ray_eta = b["ray_eta"].get<double>();
  cc.quad.panels = b["panels"].get<int>();
  std::optional<graphs::SelfEnergy> se;
  if (b["renormalized"].get<bool>()) {
    graphs::SelfEnergyConfig sc;
    sc.side = b["self_energy_side"].get<int>();
    se = graphs::SelfEnergy::build(c["lambda"].get<double>(), sc);
  }
  const auto rep = graphs::crossing_bound_check(cc, se ? &*se : nullptr);
  bool positive = true;
  auto emit = [&](const graphs::CrossingPoint& p, bool ray) {
    positive &= std::isfinite(p.lhs) && p.lhs > 0.0;
    o.rows.push_back({{"ray", ray}, {"alpha", p.alpha}, {"beta", p.beta}, {"sign", p.sign},
                      {"q", {p.q[0], p.q[1], p.q[2]}}, {"q_norm", p.q_norm}, {"eta", p.eta},
                      {"lhs", p.lhs}, {"rhs", ray ? Json(nullptr) : Json(p.rhs)}});
  };
  for (const auto& p : rep.panel) emit(p, false);
  for (const auto& p : rep.ray) emit(p, true);
  o.summary = {{"max_exponent", rep.max_exponent},
               {"b", rep.b},
               {"b_unclamped", rep.b_unclamped},
               {"C", rep.C},
               {"residual", rep.residual},
               {"ray_monotone", rep.ray_monotone},
               {"primary", "max_exponent"}};
  o.invariants.push_back(check("crossing integrals finite and positive", positive, ""));
  o.invariants.push_back(check("fitted bound holds on the panel", rep.bound_holds, "C = " + fmt(rep.C)));
  return o;
}

void apply_expectations(const Json& c, Outcome& o) {
  for (auto it = c["expect"].begin(); it != c["expect"].end(); ++it) {
    const std::string name = "expect " + it.key();
    if (!o.summary.contains(it.key())) {
      o.invariants.push_back(check(name, false, "summary has no field '" + it.key() + "'"));
      continue;
    }
    const Json& got = o.summary[it.key()];
    if (it->is_boolean()) {
      const bool ok = got.is_boolean() && got.get<bool>() == it->get<bool>();
      o.invariants.push_back(check(name, ok, "value " + got.dump()));
    } else {
      const double lo = (*it)[0].get<double>(), hi = (*it)[1].get<double>();
      const bool ok = got.is_number() && got.get<double>() >= lo && got.get<double>() <= hi;
      o.invariants.push_back(check(name, ok, "value " + got.dump() + " in [" + fmt(lo) + ", " + fmt(hi) + "]"));
    }
  }
}

void write_file(const fs::path& p, const std::string& text, bool append = false) {
  std::ofstream os(p, append ? std::ios::app : std::ios::trunc);
  if (!os) fail(ErrorCode::kIo, "cannot write " + p.string());
  os << text;
  if (!os) fail(ErrorCode::kIo, "write failed for " + p.string());
}

double primary_value(const Json& summary) {
  if (!summary.contains("primary")) return std::nan("");
  const Json& v = summary[summary["primary"].get<std::string>()];
  return v.is_number() ? v.get<double>() : std::nan("");
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const Json& raw) {
  if (!raw.is_object()) invalid("configuration must be a JSON object");
  if (!raw.contains("kind") || !raw["kind"].is_string()) invalid("configuration needs a string 'kind'");
  ExperimentConfig cfg;
  cfg.kind_ = raw["kind"].get<std::string>();
  Json base = common_defaults();
  for (const char* k : kExperimentKinds) base[k] = kind_defaults(k);
  kind_defaults(cfg.kind_);
  for (const char* k : kExperimentKinds)
    if (cfg.kind_ != k && raw.contains(k))
      invalid(std::string("block '") + k + "' does not apply to kind " + cfg.kind_);
  Json user = raw;
  user.erase("derived");  // recomputed; present when re-parsing a resolved config
  overlay(base, user, "");
  for (const char* k : kExperimentKinds)
    if (cfg.kind_ != k) base.erase(k);
  validate_resolved(base);
  cfg.resolved_ = std::move(base);
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
  Json raw;
  try {
    raw = Json::parse(text);
  } catch (const Json::parse_error& e) {
    invalid(std::string("configuration is not valid JSON: ") + e.what());
  }
  return parse(raw);
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::kIo, "cannot open configuration " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_text(ss.str());
}

std::string ExperimentConfig::hash() const {
  Json canon = resolved_;
  canon.erase("output");
  const std::string text = canon.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return hex64(mix64(h));
}

std::filesystem::path ExperimentConfig::output() const {
  return resolved_["output"].get<std::string>();
}

ExperimentConfig ExperimentConfig::with_axis(const std::string& axis, double value) const {
  Json raw = resolved_;
  raw.erase("derived");
  if (axis == "lambda") {
    raw["lambda"] = value;
    if (kind_ == "graphs") raw["graphs"]["t"] = 0.0;
  } else if (axis == "L") {
    if (value != std::floor(value)) invalid("L values must be integers");
    raw["side"] = static_cast<long>(value);
  } else if (axis == "kappa") {
    raw["kappa"] = value;
  } else if (axis == "t") {
    if (kind_ == "graphs") raw["graphs"]["t"] = value;
    else if (kind_ == "kinetic-compare")
      raw["kinetic-compare"]["kinetic_time"] = raw["lambda"].get<double>() * raw["lambda"].get<double>() * value;
    else if (kind_ == "boltzmann") raw["boltzmann"]["T_end"] = value;
    else if (kind_ == "msd" || kind_ == "diffusive-compare") {
      raw["times"]["t_end"] = value;
      if (kind_ == "msd") raw["msd"]["windows"] = Json::array();
    } else invalid("axis t does not apply to " + kind_);
  } else {
    invalid("sweep axis must be one of lambda, L, kappa, t");
  }
  return parse(raw);
}

ExperimentConfig ExperimentConfig::with_output(const std::filesystem::path& dir) const {
  ExperimentConfig c = *this;
  c.resolved_["output"] = dir.string();
  return c;
}

bool RunRecord::passed() const {
  return std::all_of(invariants.begin(), invariants.end(), [](const auto& i) { return i.passed; });
}

Json RunRecord::header() const {
  Json inv = Json::array();
  for (const auto& i : invariants) inv.push_back({{"name", i.name}, {"passed", i.passed}, {"detail", i.detail}});
  return {{"config_hash", config_hash},
          {"kind", kind},
          {"config", config},
          {"summary", summary},
          {"invariants", inv},
          {"passed", passed()},
          {"wall_clock", wall_clock},
          {"software_version", software_version},
          {"rng_algorithm", rng_algorithm},
          {"artifacts", artifacts}};
}

Json RunRecord::to_json() const {
  Json j = header();
  j["rows"] = rows;
  return j;
}

RunRecord run(const ExperimentConfig& config, bool persist) {
  const Json& c = config.resolved();
  check_resources(c, config.kind());
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  const std::string& kind = config.kind();
  if (kind == "msd") o = run_msd(c);
  else if (kind == "kinetic-compare") o = run_kinetic(c);
  else if (kind == "diffusive-compare") o = run_diffusive(c);
  else if (kind == "graphs") o = run_graphs(c);
  else if (kind == "dos") o = run_dos(c);
  else if (kind == "boltzmann") o = run_boltzmann(c);
  else if (kind == "rung") o = run_rung(c);
  else if (kind == "crossing") o = run_crossing(c);
  else invalid("unknown experiment kind '" + kind + "'");
  apply_expectations(c, o);

  RunRecord rec;
  rec.config_hash = config.hash();
  rec.config = c;
  rec.kind = kind;
  rec.rows = std::move(o.rows);
  rec.summary = std::move(o.summary);
  rec.invariants = std::move(o.invariants);
  rec.software_version = kSoftwareVersion;
  rec.rng_algorithm = o.rng;
  rec.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (persist) {
    const fs::path dir = config.output();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
    const std::string stem = kind + "-" + rec.config_hash;
    std::string lines;
    for (const auto& r : rec.rows) lines += r.dump() + "\n";
    write_file(dir / (stem + ".jsonl"), lines);
    rec.artifacts.push_back(stem + ".jsonl");
    for (const auto& [suffix, text] : o.exports) {
      write_file(dir / (stem + "-" + suffix), text);
      rec.artifacts.push_back(stem + "-" + suffix);
    }
    write_file(dir / "runs.jsonl", rec.header().dump() + "\n", true);
  }
  return rec;
}

bool SweepResult::passed() const {
  return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.passed(); });
}

Json SweepResult::to_json() const {
  Json recs = Json::array();
  for (const auto& r : records) recs.push_back(r.header());
  return {{"axis", axis}, {"values", values}, {"table", table}, {"summary", summary},
          {"passed", passed()}, {"records", recs}};
}

SweepResult sweep(const ExperimentConfig& base, const std::string& axis,
                  const std::vector<double>& values, bool persist) {
  SweepResult out;
  out.axis = axis;
  out.values = values;
  if (axis != "lambda" && axis != "L" && axis != "kappa" && axis != "t")
    invalid("sweep axis must be one of lambda, L, kappa, t");
  if (values.empty()) return out;
  std::vector<double> metric;
  std::string metric_name;
  for (double v : values) {
    const auto cfg = base.with_axis(axis, v);
    auto rec = run(cfg, persist);
    metric_name = rec.summary.value("primary", "");
    const double m = primary_value(rec.summary);
    metric.push_back(m);
    out.table.push_back({{"value", v}, {"config_hash", rec.config_hash}, {metric_name, m},
                         {"passed", rec.passed()}});
    out.records.push_back(std::move(rec));
  }
  bool dec = true, inc = true;
  std::vector<double> diffs;
  for (std::size_t i = 1; i < metric.size(); ++i) {
    dec &= metric[i] < metric[i - 1];
    inc &= metric[i] > metric[i - 1];
    diffs.push_back(metric[i] - metric[i - 1]);
  }
  bool shrinking = diffs.size() >= 2;
  for (std::size_t i = 1; i < diffs.size(); ++i) shrinking &= std::abs(diffs[i]) < std::abs(diffs[i - 1]);
  out.summary = {{"metric", metric_name},
                 {"values", metric},
                 {"monotone_decreasing", metric.size() >= 2 && dec},
                 {"monotone_increasing", metric.size() >= 2 && inc},
                 {"successive_diffs", diffs},
                 {"diffs_shrinking", shrinking}};
  if (persist) {
    const fs::path dir = base.output();
    std::error_code ec;
    fs::create_directories(dir, ec);
    const std::string stem = "sweep-" + axis + "-" + base.hash();
    std::ostringstream csv;
    csv << "value,config_hash," << metric_name << ",passed\n" << std::setprecision(17);
    for (std::size_t i = 0; i < values.size(); ++i)
      csv << values[i] << ',' << out.records[i].config_hash << ',' << metric[i] << ','
          << (out.records[i].passed() ? 1 : 0) << '\n';
    write_file(dir / (stem + ".csv"), csv.str());
    write_file(dir / (stem + ".json"), out.to_json().dump(2) + "\n");
  }
  return out;
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

Json ValidationReport::to_json() const {
  Json arr = Json::array();
  for (const auto& c : checks) arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return {{"checks", arr}, {"passed", passed()}, {"wall_clock", wall_clock}};
}

namespace {

evolution::WaveFunction random_state(int side, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  evolution::WaveFunction psi(side);
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = cplx(g(gen), g(gen));
  psi.normalize();
  return psi;
}

using Check = std::function<InvariantResult()>;

std::vector<std::pair<std::string, Check>> validation_checks() {
  std::vector<std::pair<std::string, Check>> v;
  v.emplace_back("density of states normalized", [] {
    const lattice::EnergyShellTable t(32, lattice::kDefaultBroadening);
    const double s = t.dos_integral();
    return check("", std::abs(s - 1.0) < 1e-4, "integral = " + fmt(s));
  });
  v.emplace_back("D11 symmetric about the band center", [] {
    const lattice::EnergyLevels lv{lattice::MomentumGrid(32)};
    double worst = 0.0;
    for (double e : {0.5, 1.0, 2.0, 2.5}) {
      const double a = lv.diffusion_11(e, 0.05), b = lv.diffusion_11(6.0 - e, 0.05);
      worst = std::max(worst, std::abs(a - b) / a);
    }
    return check("", worst < 1e-8, "max relative asymmetry " + fmt(worst));
  });
  v.emplace_back("gaussian disorder moments", [] {
    const auto rep = disorder::moment_report({disorder::DisorderKind::kGaussian, 1.0, 7}, 16, 8);
    const bool ok = std::abs(rep.moment[1]) < 5 * rep.stderr_[1] + 1e-12 &&
                    std::abs(rep.moment[2] - 1.0) < 5 * rep.stderr_[2] + 1e-12 &&
                    std::abs(rep.neighbor_cov) < 5 * rep.neighbor_cov_stderr + 1e-12;
    return check("", ok, "m1 = " + fmt(rep.moment[1]) + ", m2 = " + fmt(rep.moment[2]));
  });
  v.emplace_back("propagator unitary and consistent", [] {
    const auto psi0 = evolution::gaussian_packet(8, {4, 4, 4}, 1.0, {1.0, 0.5, 0.0});
    const auto real = disorder::sample_potential({disorder::DisorderKind::kGaussian, 0.5, 42}, 8, 0);
    evolution::PropagatorConfig a;
    a.dt = 0.005;
    evolution::PropagatorConfig b;
    b.scheme = evolution::Scheme::kChebyshev;
    const auto x = evolution::evolve(psi0, real, 0.5, 1.0, a);
    const auto y = evolution::evolve(psi0, real, 0.5, 1.0, b);
    const double d = evolution::distance(x, y), n = std::abs(x.norm() - 1.0);
    return check("", d < 1e-4 && n < 1e-12, "split/Chebyshev distance " + fmt(d) + ", norm drift " + fmt(n));
  });
  v.emplace_back("Wigner hermiticity and marginal", [] {
    const auto psi = random_state(8, 3);
    const auto grid = wigner::DualGrid::full(8);
    const auto w = wigner::wigner_fourier(psi, 1.0, grid);
    double herm = 0.0, marg = 0.0;
    const auto a = psi.in(evolution::Representation::kMomentum);
    const long zero = grid.slot({0, 0, 0});
    for (std::size_t p = 0; p < a.size(); ++p) marg = std::max(marg, std::abs(w.slices[zero][p] - std::norm(a[p])));
    for (int m0 = 0; m0 < 16; m0 += 3)
      for (int m1 = 0; m1 < 16; m1 += 5) {
        const Index3 m{m0, m1, 1}, mm{-m0, -m1, -1};
        const long s = grid.slot(m), t = grid.slot(mm);
        for (std::size_t p = 0; p < a.size(); ++p) {
          const auto u = grid.v_index(m, p);
          const auto q = grid.p_for(mm, u);
          herm = std::max(herm, std::abs(w.slices[s][p] - std::conj(w.slices[t][q])));
        }
      }
    return check("", herm < 1e-14 && marg < 1e-14, "hermiticity " + fmt(herm) + ", marginal " + fmt(marg));
  });
  v.emplace_back("Wigner continuity bound on random pairs", [] {
    const auto grid = wigner::DualGrid::full(8);
    const auto o = wigner::ObservableSymbol::from_function(grid, 1.0, [](const Vec3& xi, const Vec3& v) {
      return std::exp(-0.5 * dot(xi, xi)) * cplx(std::cos(v[0]), 0.3 * std::sin(v[1]));
    });
    int bad = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto c = wigner::wigner_l2_continuity_check(random_state(8, 100 + 2 * s), random_state(8, 101 + 2 * s), o);
      bad += c.lhs > c.rhs_guaranteed;
    }
    return check("", bad == 0, std::to_string(bad) + " of 10 pairs above the bound");
  });
  v.emplace_back("collision operator conserves mass and shell states", [] {
    kinetics::KernelConfig kc;
    kc.shell = kinetics::ShellModel::kBinned;
    const kinetics::CollisionOperator op(12, kc);
    std::vector<double> f(op.size()), g(op.size());
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& x : f) x = u(gen);
    double m0 = 0.0;
    for (double x : f) m0 += x;
    op.exponentiate(2.0, f);
    double m1 = 0.0;
    for (double x : f) m1 += x;
    // Uniform on one bin is stationary under the binned kernel.
    const auto& lv = op.levels();
    for (std::size_t i = 0; i < op.size(); ++i) {
      const double e = lv.energies()[lv.level_of()[i]];
      g[i] = (e >= 3.0 && e < 3.0 + kc.bin_width) ? 1.0 : 0.0;
    }
    std::vector<double> dg(op.size());
    op.apply(g, dg);
    double res = 0.0;
    for (double x : dg) res = std::max(res, std::abs(x));
    return check("", std::abs(m1 - m0) / m0 < 1e-10 && res < 1e-10,
                 "mass drift " + fmt(std::abs(m1 - m0) / m0) + ", shell residual " + fmt(res));
  });
  v.emplace_back("degree counts within 2 (2n)^D", [] {
    bool ok = true;
    for (int n = 1; n <= 7; ++n) {
      std::uint64_t total = 0, fact = 1;
      for (int k = 2; k <= n; ++k) fact *= k;
      for (const auto& [d, cnt] : graphs::count_by_degree(n)) {
        total += cnt;
        ok &= static_cast<double>(cnt) <= graphs::degree_count_bound(n, d);
      }
      ok &= total == fact;
    }
    return check("", ok, "n <= 7");
  });
  v.emplace_back("self-energy sign", [] {
    const auto se = graphs::SelfEnergy::build(0.2);
    double worst = -1e300;
    for (const auto& t : se.table()) worst = std::max(worst, t.imag());
    return check("", worst <= 0.0, "max Im Theta = " + fmt(worst));
  });
  v.emplace_back("Schwarz domination on S_3", [] {
    graphs::GraphValueConfig g;
    g.samples = 4096;
    g.replicates = 8;
    const auto perms = graphs::all_permutations(3);
    const auto est = graphs::graph_values(perms, g);
    int bad = 0;
    for (const auto& e : est)
      bad += std::abs(e.mean) > est.front().mean.real() + 3.0 * std::hypot(e.stderr_, est.front().stderr_);
    return check("", bad == 0, std::to_string(bad) + " violations");
  });
  v.emplace_back("ensemble independent of worker count", [] {
    const auto psi0 = evolution::gaussian_packet(8, {4, 4, 4}, 1.0, {1.0, 0.0, 0.0});
    const auto grid = wigner::DualGrid::subset(8, {Index3{0, 0, 0}, Index3{1, 0, 0}});
    const disorder::DisorderSpec spec{disorder::DisorderKind::kGaussian, 0.4, 11};
    const int saved = worker_count();
    set_worker_count(1);
    const auto a = wigner::ensemble_wigner(spec, psi0, 1.0, 1.0, 12, grid);
    set_worker_count(3);
    const auto b = wigner::ensemble_wigner(spec, psi0, 1.0, 1.0, 12, grid);
    set_worker_count(saved);
    bool same = a.mean.slices == b.mean.slices;
    return check("", same, same ? "bitwise equal" : "results differ");
  });
  return v;
}

}  // namespace

ValidationReport validate() {
  ValidationReport rep;
  const auto start = std::chrono::steady_clock::now();
  for (auto& [name, fn] : validation_checks()) {
    InvariantResult r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = check("", false, std::string("error: ") + e.what());
    }
    r.name = name;
    rep.checks.push_back(std::move(r));
  }
  rep.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

std::string format_table(const Json& rows, const std::vector<std::string>& columns) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back(columns);
  for (const auto& r : rows) {
    std::vector<std::string> line;
    for (const auto& c : columns) {
      if (!r.contains(c)) line.emplace_back("");
      else if (r[c].is_string()) line.push_back(r[c].get<std::string>());
      else if (r[c].is_number_float()) line.push_back(fmt(r[c].get<double>()));
      else line.push_back(r[c].dump());
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(columns.size(), 0);
  for (const auto& line : cells)
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  std::ostringstream os;
  for (const auto& line : cells) {
    std::string text;
    for (std::size_t i = 0; i < line.size(); ++i) {
      text += line[i];
      if (i + 1 < line.size()) text.append(width[i] + 2 - line[i].size(), ' ');
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    os << text << '\n';
  }
  return os.str();
}

Report report(const std::filesystem::path& dir) {
  const fs::path runs = dir / "runs.jsonl";
  std::ifstream is(runs);
  if (!is) fail(ErrorCode::kIo, "no run records in " + dir.string());
  Report rep;
  Json rows = Json::array();
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const Json::parse_error& e) {
      fail(ErrorCode::kIo, "corrupt record in " + runs.string() + ": " + e.what());
    }
    const bool ok = rec.value("passed", false);
    rep.passed &= ok;
    const Json& summary = rec["summary"];
    const std::string metric = summary.value("primary", "");
    Json row = {{"kind", rec.value("kind", "")},
                {"config_hash", rec.value("config_hash", "")},
                {"lambda", rec["config"].value("lambda", 0.0)},
                {"L", rec["config"].value("side", 0)},
                {"metric", metric},
                {"value", primary_value(summary)},
                {"passed", ok},
                {"wall_clock", rec.value("wall_clock", 0.0)}};
    rows.push_back(row);
    rep.records.push_back(std::move(rec));
  }
  const std::vector<std::string> cols{"kind", "config_hash", "lambda", "L", "metric", "value", "passed", "wall_clock"};
  rep.table = format_table(rows, cols);
  std::ostringstream csv;
  csv << "kind,config_hash,lambda,L,metric,value,passed,wall_clock\n" << std::setprecision(17);
  for (const auto& r : rows)
    csv << r["kind"].get<std::string>() << ',' << r["config_hash"].get<std::string>() << ','
        << r["lambda"].get<double>() << ',' << r["L"] << ',' << r["metric"].get<std::string>() << ','
        << r["value"].get<double>() << ',' << (r["passed"].get<bool>() ? 1 : 0) << ','
        << r["wall_clock"].get<double>() << '\n';
  write_file(dir / "report.csv", csv.str());
  return rep;
}

}  // namespace qdlab::harness
