#pragma once

// Exact-rational central-difference coefficients and the composite
// difference operators used by the deferred-correction sweeps.
//
// All stencils are expressed over integer time indices. A stencil value at
// center n is  k^scale_power * sum_i weights[i] * v[n + offsets[i]].

#include "dcreact/types.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <span>
#include <vector>

namespace dcreact {

/// Arbitrary-precision rational; always normalized with a positive denominator.
using Rational = boost::multiprecision::cpp_rational;

double to_double(const Rational& r);

struct Stencil {
  std::vector<int> offsets;        // strictly increasing
  std::vector<Rational> weights;   // same length as offsets
  int scale_power = 0;

  Rational weight_sum() const;
  int min_offset() const { return offsets.front(); }
  int max_offset() const { return offsets.back(); }
};

/// Builds a stencil from (offset, weight) pairs, merging duplicate offsets and
/// dropping zero weights.
Stencil make_stencil(std::vector<std::pair<int, Rational>> terms, int scale_power);

/// Same operator shifted by `shift` time indices.
Stencil shifted(const Stencil& s, int shift);
/// a + b; both must share the same scale power.
Stencil sum(const Stencil& a, const Stencil& b);
Stencil scaled(const Stencil& s, const Rational& factor);
/// Operator product a∘b (apply b first, then a); scale powers add.
Stencil compose(const Stencil& a, const Stencil& b);

/// Backward difference D_- : offsets {-1, 0}, weights {-1, 1}, scale -1.
Stencil backward_difference_stencil();

// ---------------------------------------------------------------------------
// Coefficient tables

/// c_i for 2 <= i <= 11, the central difference correction coefficients.
Rational dc_coeff(int i);
/// c_i^p for 1 <= p <= 4, 2 <= i <= 2p+1, the interior (start-up) coefficients.
Rational interior_coeff(int p, int i);

/// c_2 .. c_{2p+1}, derived by imposing exactness of the midpoint derivative
/// and midpoint value approximations on monomials.
std::vector<Rational> derive_dc_coeffs(int p);
/// c_2^p .. c_{2p+1}^p, derived the same way over a uniform partition of one
/// interval into 2p+1 sub-intervals.
std::vector<Rational> derive_interior_coeffs(int p);

/// Table value when available, otherwise derived.
Rational dc_coeff_extended(int i);
Rational interior_coeff_extended(int p, int i);

// ---------------------------------------------------------------------------
// Stencils

/// (D+D-)^m at an integer index.
Stencil composite_even_stencil(int m);
/// D-(D+D-)^m at an integer index.
Stencil composite_odd_stencil(int m);

/// Λ^j = sum_{i=1..j} c_{2i+1} k^{2i} (D+D-)^i at an integer index (k-free).
Stencil lambda_stencil(int j);
/// Γ^j = sum_{i=1..j} c_{2i} k^{2i} (D+D-)^i at an integer index (k-free).
Stencil gamma_stencil(int j);

/// D Λ^j at the half index n+1/2, expressed relative to n. Offsets span
/// [-j, j+1]; scale -1.
Stencil d_lambda_stencil(int j);
/// Γ^j E at the half index n+1/2, relative to n. Offsets span [-j, j+1].
Stencil e_gamma_stencil(int j);

/// Start-up derivative correction on the refined grid, relative to the fine
/// center index (2j+1)n+j. Offsets span [-j, j+1]; scale -1 in the coarse step.
Stencil bar_lambda_stencil(int j);
/// Start-up value correction on the refined grid at a fine index. Offsets span
/// [-j, j].
Stencil bar_gamma_stencil(int j);

// ---------------------------------------------------------------------------
// Application to time series

/// Read-only window onto a series of DOF vectors. `first_index` is the time
/// index of states[0]; accesses are restricted to [lo, hi].
class TimeSeriesView {
 public:
  TimeSeriesView(std::span<const DofVector> states, int first_index = 0);
  TimeSeriesView(std::span<const DofVector> states, int first_index, int lo, int hi);

  const DofVector& at(int index) const;
  int lo() const { return lo_; }
  int hi() const { return hi_; }
  /// Narrower window; must lie inside the current one.
  TimeSeriesView restricted(int lo, int hi) const;

 private:
  std::span<const DofVector> states_;
  int first_;
  int lo_;
  int hi_;
};

/// Evaluates the stencil centered at `center` with time step k.
DofVector apply(const Stencil& s, const TimeSeriesView& series, int center, double k);

/// (1/(2j+1)) Λ̄^j D ū at the fine half index fine_center+1/2, where
/// fine_center = (2j+1)n + j and k is the coarse step.
DofVector bar_lambda_apply(int j, const TimeSeriesView& fine, int fine_center, double k);
/// Γ̄^j ū at the fine index `fine_index`.
DofVector bar_gamma_apply(int j, const TimeSeriesView& fine, int fine_index);

}  // namespace dcreact
