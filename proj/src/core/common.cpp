// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/common.hpp"

#include <cmath>

namespace qdlab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kEmptyShell: return "EmptyShell";
    case ErrorCode::kToleranceExceeded: return "ToleranceExceeded";
    case ErrorCode::kQuadratureDivergence: return "QuadratureDivergence";
    case ErrorCode::kCflViolation: return "CFLViolation";
    case ErrorCode::kExtrapolationUnstable: return "ExtrapolationUnstable";
    case ErrorCode::kBoundViolated: return "BoundViolated";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kResourceExceeded: return "ResourceExceeded";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

double wrap_angle(double x) {
  double y = std::fmod(x + kPi, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  return y - kPi;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "line fit needs two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, "line fit needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  f.slope_stderr = x.size() > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
  return f;
}

}  // namespace qdlab
