// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

// Lattice Wigner transform in Fourier variables,
//   W^(xi, v) = conj(psi^(v - xi/2)) psi^(v + xi/2),
// with v +- xi/2 on the momentum grid. Writing xi = (2 pi / L) m with
// m in Z_{2L}^3 and v - xi/2 = (2 pi / L) p, every field is a set of
// slices: for each m, the values over p in Z_L^3 of
//   conj a(p) a(p + m mod L),   v = (pi / L)(2p + m).
// The dual position variable lives on the half lattice x = j / 2,
// j in Z_{2L}^3.

#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <vector>

#include "core/common.hpp"
#include "core/disorder.hpp"
#include "core/evolution.hpp"

namespace qdlab::wigner {

/// Slice layout shared by Wigner fields and observable symbols.
class DualGrid {
 public:
  DualGrid() = default;
  /// All (2L)^3 values of m.
  static DualGrid full(int side);
  /// A chosen subset of m values (wrapped into Z_{2L}^3, duplicates dropped).
  static DualGrid subset(int side, const std::vector<Index3>& m);

  int side() const { return side_; }
  std::size_t slice_count() const { return xi_.size(); }
  std::size_t slice_size() const { return static_cast<std::size_t>(side_) * side_ * side_; }
  const std::vector<Index3>& xi_indices() const { return xi_; }
  /// Slot of m in this grid, or -1.
  long slot(const Index3& m) const;

  /// Microscopic xi in [-2 pi, 2 pi)^3.
  Vec3 xi(const Index3& m) const;
  /// Velocity index u = 2p + m mod 2L, and v = (pi / L) u wrapped onto [-pi, pi).
  Index3 v_index(const Index3& m, std::size_t p) const;
  Vec3 velocity(const Index3& u) const;
  /// p with 2p + m = u (mod 2L); requires u and m to share parity.
  std::size_t p_for(const Index3& m, const Index3& u) const;

  bool operator==(const DualGrid& o) const { return side_ == o.side_ && xi_ == o.xi_; }

 private:
  int side_ = 0;
  std::vector<Index3> xi_;
  std::map<Index3, long> slot_;
};

struct WignerField {
  DualGrid grid;
  double eps = 1.0;
  std::vector<std::vector<cplx>> slices;  // slices[slot][p]

  /// Macroscopic dual variable xi / eps.
  Vec3 macroscopic_xi(const Index3& m) const;
};

/// Symbol O^(xi, v) sampled on a dual grid.
struct ObservableSymbol {
  DualGrid grid;
  double eps = 1.0;
  std::vector<std::vector<cplx>> slices;

  /// Samples fn(macroscopic xi, v) on the grid.
  static ObservableSymbol from_function(const DualGrid& grid, double eps,
                                        const std::function<cplx(const Vec3&, const Vec3&)>& fn);
  double sup() const;
  /// sum_xi sup_v |O^(xi, .)|, the counting-measure version of int dxi sup_v.
  double xi_sup_integral() const;
};

WignerField wigner_fourier(const evolution::WaveFunction& psi, double eps, const DualGrid& grid);

/// sum_xi sum_p conj(O^) W^. Throws kGridMismatch if a slice of O is absent
/// from W or the lattices differ.
cplx pair_observable(const WignerField& w, const ObservableSymbol& o);

/// Position-space field W(x, v) for x = j/2 and velocity index u, both in
/// Z_{2L}^3, stored as values[j][u]. Memory grows as (2L)^6; intended for
/// identity checks on small lattices. Requires a full dual grid.
struct PositionWigner {
  int side = 0;
  std::vector<cplx> values;
  std::size_t points() const { return static_cast<std::size_t>(8) * side * side * side; }
  cplx at(std::size_t j, std::size_t u) const { return values[j * points() + u]; }
};

PositionWigner wigner_position(const WignerField& w);
/// O(x, v) = sum_xi e^{i xi.x} O^(xi, v) on the same layout.
PositionWigner observable_position(const ObservableSymbol& o);

struct EnsembleWigner {
  WignerField mean;
  std::vector<std::vector<double>> stderr_;  // per slice and point
  int count = 0;
  std::vector<std::uint64_t> realization_hashes;
};

/// Ensemble average of W^ for psi(t) over `count` realizations. Realizations
/// are reduced in fixed blocks so totals do not depend on worker count.
EnsembleWigner ensemble_wigner(const disorder::DisorderSpec& spec,
                               const evolution::WaveFunction& psi0, double t, double eps,
                               int count, const DualGrid& grid,
                               const evolution::PropagatorConfig& cfg = {});

struct ContinuityCheck {
  double lhs = 0.0;
  /// C = 1 form: sum_xi sup|O^| * ||psi1|| * ||psi1 - psi2||.
  double rhs = 0.0;
  /// Bound that follows from Cauchy-Schwarz for any pair:
  /// sum_xi sup|O^| * ||psi1 - psi2|| * (||psi1|| + ||psi2||).
  double rhs_guaranteed = 0.0;
  bool violated = false;
};

ContinuityCheck wigner_l2_continuity_check(const evolution::WaveFunction& psi1,
                                           const evolution::WaveFunction& psi2,
                                           const ObservableSymbol& o);

/// Rows "vx,vy,vz,re,im,stderr" for one xi slice.
void write_xi_slice_csv(std::ostream& os, const EnsembleWigner& w, const Index3& m);
/// Rows "xi_x,xi_y,xi_z,re,im,stderr" (macroscopic xi) over the slices
/// that contain velocity index u.
void write_v_slice_csv(std::ostream& os, const EnsembleWigner& w, const Index3& u);

}  // namespace qdlab::wigner
