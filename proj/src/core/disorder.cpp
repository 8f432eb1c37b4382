// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/disorder.hpp"

#include <bit>
#include <cmath>
#include <random>

#include "core/parallel.hpp"

namespace qdlab::disorder {

const char* to_string(DisorderKind kind) noexcept {
  switch (kind) {
    case DisorderKind::kGaussian: return "gaussian";
    case DisorderKind::kSymmetricBernoulli: return "bernoulli";
  }
  return "unknown";
}

DisorderKind parse_kind(const std::string& name) {
  if (name == "gaussian") return DisorderKind::kGaussian;
  if (name == "bernoulli") return DisorderKind::kSymmetricBernoulli;
  fail(ErrorCode::kConfigInvalid, "unknown disorder kind '" + name + "'");
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return mix64(mix64(master_seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

std::uint64_t DisorderRealization::hash() const {
  std::uint64_t h = mix64(values.size());
  for (double v : values) h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
  return h;
}

DisorderRealization sample_potential(const DisorderSpec& spec, int side,
                                     std::uint64_t index) {
  require(side >= 1, "lattice side must be positive");
  require(spec.lambda >= 0.0, "coupling must be nonnegative");
  DisorderRealization r;
  r.index = index;
  r.derived_seed = derive_seed(spec.master_seed, index);
  const std::size_t n = static_cast<std::size_t>(side) * side * side;
  r.values.resize(n);
  std::mt19937_64 gen(r.derived_seed);
  if (spec.kind == DisorderKind::kGaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : r.values) v = normal(gen);
  } else {
    for (auto& v : r.values) v = (gen() >> 63) ? 1.0 : -1.0;
  }
  return r;
}

MomentReport moment_report(const DisorderSpec& spec, int side, int count) {
  require(count >= 2, "moment_report needs count >= 2");
  struct Row {
    std::array<double, 7> m{};
    double cov = 0.0;
  };
  std::vector<Row> rows(count);
  parallel_for(count, [&](std::size_t r) {
    auto real = sample_potential(spec, side, r);
    const std::size_t n = real.values.size();
    Row row;
    for (double v : real.values) {
      double p = 1.0;
      for (int k = 1; k <= 6; ++k) {
        p *= v;
        row.m[k] += p;
      }
    }
    const std::size_t L = side, plane = L * L;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = (i + plane) % n;  // +1 along the slowest axis
      row.cov += real.values[i] * real.values[j];
    }
    for (auto& x : row.m) x /= static_cast<double>(n);
    row.cov /= static_cast<double>(n);
    rows[r] = row;
  });
  MomentReport rep;
  rep.count = count;
  auto mean_err = [&](auto get, double& mean, double& err) {
    double s = 0.0;
    for (const auto& row : rows) s += get(row);
    mean = s / count;
    double ss = 0.0;
    for (const auto& row : rows) ss += (get(row) - mean) * (get(row) - mean);
    err = std::sqrt(ss / (count - 1) / count);
  };
  for (int k = 1; k <= 6; ++k)
    mean_err([k](const Row& row) { return row.m[k]; }, rep.moment[k], rep.stderr_[k]);
  // Subtract the product of means; with m1 ~ 0 this is a tiny correction.
  mean_err([](const Row& row) { return row.cov; }, rep.neighbor_cov, rep.neighbor_cov_stderr);
  rep.neighbor_cov -= rep.moment[1] * rep.moment[1];
  return rep;
}

}  // namespace qdlab::disorder
