// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace qdlab {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

namespace {

// Execution with the new-array interface is thread safe; plans are cached
// for the life of the process.
std::pair<fftw_plan, fftw_plan> plans_for(int side) {
  static std::map<int, std::pair<fftw_plan, fftw_plan>> cache;
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  auto it = cache.find(side);
  if (it != cache.end()) return it->second;
  const std::size_t n = static_cast<std::size_t>(side) * side * side;
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (buf == nullptr) fail(ErrorCode::kResourceExceeded, "fftw_malloc failed");
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan f = fftw_plan_dft_3d(side, side, side, buf, buf, FFTW_FORWARD, flags);
  fftw_plan b = fftw_plan_dft_3d(side, side, side, buf, buf, FFTW_BACKWARD, flags);
  fftw_free(buf);
  if (f == nullptr || b == nullptr) fail(ErrorCode::kResourceExceeded, "FFTW planning failed");
  cache.emplace(side, std::make_pair(f, b));
  return {f, b};
}

}  // namespace

Fft3::Fft3(int side) : side_(side) {
  require(side >= 1, "FFT side must be positive");
  size_ = static_cast<std::size_t>(side) * side * side;
  scale_ = 1.0 / std::sqrt(static_cast<double>(size_));
  std::tie(fwd_, bwd_) = plans_for(side);
}

void Fft3::forward(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(fwd_, p, p);
  for (std::size_t i = 0; i < size_; ++i) data[i] *= scale_;
}

void Fft3::backward(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(bwd_, p, p);
  for (std::size_t i = 0; i < size_; ++i) data[i] *= scale_;
}

}  // namespace qdlab
