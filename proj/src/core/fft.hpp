// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

// Unitary 3D discrete Fourier transform on an L^3 periodic lattice:
//   a(k) = L^{-3/2} sum_x exp(-i k.x) psi(x).
// Plans are built once per side length with FFTW_ESTIMATE, which keeps
// results bit-identical from run to run.

#pragma once

#include <fftw3.h>

#include "core/common.hpp"

#include <mutex>

namespace qdlab {

/// FFTW's planner is not thread safe; every plan creation in the library
/// holds this lock.
std::mutex& fftw_planner_mutex();

class Fft3 {
 public:
  explicit Fft3(int side);

  int side() const { return side_; }
  std::size_t size() const { return size_; }

  /// In place, position -> momentum.
  void forward(cplx* data) const;
  /// In place, momentum -> position.
  void backward(cplx* data) const;

 private:
  int side_;
  std::size_t size_;
  double scale_;
  fftw_plan fwd_;
  fftw_plan bwd_;
};

}  // namespace qdlab
