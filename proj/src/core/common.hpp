// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <span>
#include <string>

namespace qdlab {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;
using Index3 = std::array<int, 3>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Failure classes shared by every module. The C API maps these one-to-one
/// onto qdlab_status values.
enum class ErrorCode {
  kInvalidArgument,
  kConfigInvalid,
  kEmptyShell,
  kToleranceExceeded,
  kQuadratureDivergence,
  kCflViolation,
  kExtrapolationUnstable,
  kBoundViolated,
  kInsufficientSamples,
  kResourceExceeded,
  kGridMismatch,
  kIo,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::kInvalidArgument, what);
}

/// Symmetric 3x3 matrix stored row-major.
struct Mat3 {
  std::array<double, 9> a{};

  double& operator()(int i, int j) { return a[3 * i + j]; }
  double operator()(int i, int j) const { return a[3 * i + j]; }

  double quadratic(const Vec3& x) const {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s += x[i] * (*this)(i, j) * x[j];
    return s;
  }
};

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

/// Wrap an angle onto [-pi, pi).
double wrap_angle(double x);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  /// Root mean square residual.
  double residual = 0.0;
};

/// Ordinary least squares y = intercept + slope x; needs two points.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// 64-bit finalizer from splitmix64; good avalanche, used for seed
/// derivation and content hashing.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr const char* kSoftwareVersion = "0.1.0";

}  // namespace qdlab
