#include "dcreact/fd_ops.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace dcreact {

namespace {

Rational binom(int n, int r) {
  Rational out = 1;
  for (int i = 1; i <= r; ++i) out = out * (n - r + i) / i;
  return out;
}

Rational factorial(int n) {
  Rational out = 1;
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}

Rational power(const Rational& x, int m) {
  Rational out = 1;
  for (int i = 0; i < m; ++i) out *= x;
  return out;
}

int sign_of(int l) { return (l % 2 == 0) ? 1 : -1; }

// Solves A x = b exactly. Throws std::logic_error on singular systems.
std::vector<Rational> solve_exact(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) throw std::logic_error("singular coefficient derivation system");
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t row = col + 1; row < n; ++row) {
      if (a[row][col] == 0) continue;
      const Rational factor = a[row][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[row][c] -= factor * a[col][c];
      b[row] -= factor * b[col];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t i = n; i-- > 0;) {
    Rational acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
    x[i] = acc / a[i][i];
  }
  return x;
}

// Sample positions are measured from the approximation midpoint in units of
// the (fine) step. D(D+D-)^i evaluated at the midpoint reads positions
// i - l + 1/2, l = 0..2i+1.
Rational odd_difference_of_monomial(int i, int m) {
  Rational acc = 0;
  for (int l = 0; l <= 2 * i + 1; ++l)
    acc += sign_of(l) * binom(2 * i + 1, l) * power(Rational(2 * (i - l) + 1, 2), m);
  return acc;
}

// (D+D-)^i E at the midpoint: the average of (D+D-)^i at positions -1/2 and
// +1/2, which read i - l -/+ 1/2, l = 0..2i.
Rational even_difference_of_monomial(int i, int m) {
  Rational acc = 0;
  for (int l = 0; l <= 2 * i; ++l) {
    const Rational w = sign_of(l) * binom(2 * i, l);
    acc += w * (power(Rational(2 * (i - l) - 1, 2), m) + power(Rational(2 * (i - l) + 1, 2), m));
  }
  return acc / 2;
}

// Shared derivation. `half_width` is the distance from the midpoint to the
// interval endpoints in step units.
std::vector<Rational> derive_coeffs(int p, const Rational& half_width) {
  if (p < 1) throw std::invalid_argument("coefficient derivation requires p >= 1");
  std::vector<std::vector<Rational>> a_odd(p, std::vector<Rational>(p));
  std::vector<std::vector<Rational>> a_even(p, std::vector<Rational>(p));
  std::vector<Rational> b_odd(p), b_even(p);
  for (int q = 1; q <= p; ++q) {
    const int m_odd = 2 * q + 1;
    const int m_even = 2 * q;
    for (int i = 1; i <= p; ++i) {
      a_odd[q - 1][i - 1] = odd_difference_of_monomial(i, m_odd);
      a_even[q - 1][i - 1] = even_difference_of_monomial(i, m_even);
    }
    // derivative: length * v'(0) = v(b) - v(a) - sum c_{2i+1} D(D+D-)^i v ; v'(0) = 0 for m >= 2
    b_odd[q - 1] = power(half_width, m_odd) - power(-half_width, m_odd);
    // value: v(0) = (v(b) + v(a))/2 - sum c_{2i} (D+D-)^i E v ; v(0) = 0 for m >= 1
    b_even[q - 1] = (power(half_width, m_even) + power(-half_width, m_even)) / 2;
  }
  const auto odd = solve_exact(a_odd, b_odd);
  const auto even = solve_exact(a_even, b_even);
  std::vector<Rational> out;
  out.reserve(2 * p);
  for (int i = 0; i < p; ++i) {
    out.push_back(even[i]);
    out.push_back(odd[i]);
  }
  return out;
}

const std::vector<Rational>& dc_table() {
  static const std::vector<Rational> table = [] {
    auto entry = [](long long num, int fact, int pow2) {
      return Rational(num) / (factorial(fact) * power(Rational(2), pow2));
    };
    return std::vector<Rational>{
        Rational(1, 8),         Rational(1, 24),         entry(-18, 4, 5),
        entry(-18, 5, 5),       entry(450, 6, 7),        entry(450, 7, 7),
        entry(-22050, 8, 9),    entry(-22050, 9, 9),     entry(1786050, 10, 11),
        entry(1786050, 11, 11),
    };
  }();
  return table;
}

const std::vector<std::vector<Rational>>& interior_table() {
  static const std::vector<std::vector<Rational>> table = {
      {Rational(9, 8), Rational(9, 8)},
      {Rational(25, 8), Rational(125, 24), Rational(125, 128), Rational(125, 128)},
      {Rational(49, 8), Rational(343, 24), Rational(637, 128), Rational(13377, 1920),
       Rational(1029, 1024), Rational(1029, 1024)},
      {Rational(81, 8), Rational(243, 8), Rational(1917, 128), Rational(17253, 640),
       Rational(7173, 1024), Rational(64557, 7168), Rational(32733, 32768),
       Rational(32733, 32768)},
  };
  return table;
}

void require_positive(int v, const char* what) {
  if (v < 1) throw std::out_of_range(std::string(what) + " must be >= 1");
}

}  // namespace

double to_double(const Rational& r) { return r.convert_to<double>(); }

Rational Stencil::weight_sum() const {
  Rational acc = 0;
  for (const auto& w : weights) acc += w;
  return acc;
}

Stencil make_stencil(std::vector<std::pair<int, Rational>> terms, int scale_power) {
  std::map<int, Rational> merged;
  for (auto& [offset, weight] : terms) merged[offset] += weight;
  Stencil s;
  s.scale_power = scale_power;
  for (const auto& [offset, weight] : merged) {
    if (weight == 0) continue;
    s.offsets.push_back(offset);
    s.weights.push_back(weight);
  }
  return s;
}

Stencil shifted(const Stencil& s, int shift) {
  Stencil out = s;
  for (auto& o : out.offsets) o += shift;
  return out;
}

Stencil sum(const Stencil& a, const Stencil& b) {
  if (a.scale_power != b.scale_power)
    throw std::invalid_argument("stencil sum requires matching scale powers");
  std::vector<std::pair<int, Rational>> terms;
  for (std::size_t i = 0; i < a.offsets.size(); ++i) terms.emplace_back(a.offsets[i], a.weights[i]);
  for (std::size_t i = 0; i < b.offsets.size(); ++i) terms.emplace_back(b.offsets[i], b.weights[i]);
  return make_stencil(std::move(terms), a.scale_power);
}

Stencil scaled(const Stencil& s, const Rational& factor) {
  Stencil out = s;
  for (auto& w : out.weights) w *= factor;
  return out;
}

Stencil compose(const Stencil& a, const Stencil& b) {
  std::vector<std::pair<int, Rational>> terms;
  for (std::size_t i = 0; i < a.offsets.size(); ++i)
    for (std::size_t l = 0; l < b.offsets.size(); ++l)
      terms.emplace_back(a.offsets[i] + b.offsets[l], a.weights[i] * b.weights[l]);
  return make_stencil(std::move(terms), a.scale_power + b.scale_power);
}

Stencil backward_difference_stencil() { return make_stencil({{-1, Rational(-1)}, {0, Rational(1)}}, -1); }

Rational dc_coeff(int i) {
  if (i < 2 || i > 11) throw std::out_of_range("dc_coeff index " + std::to_string(i) + " outside [2, 11]");
  return dc_table()[i - 2];
}

Rational interior_coeff(int p, int i) {
  if (p < 1 || p > 4 || i < 2 || i > 2 * p + 1)
    throw std::out_of_range("interior_coeff(" + std::to_string(p) + ", " + std::to_string(i) +
                            ") outside the tabulated range");
  return interior_table()[p - 1][i - 2];
}

std::vector<Rational> derive_dc_coeffs(int p) {
  // Symmetric two-point stencil around the midpoint: endpoints at -+1/2.
  return derive_coeffs(p, Rational(1, 2));
}

std::vector<Rational> derive_interior_coeffs(int p) {
  // Uniform partition of [a, b] into 2p+1 steps; endpoints at -+(2p+1)/2.
  return derive_coeffs(p, Rational(2 * p + 1, 2));
}

Rational dc_coeff_extended(int i) {
  if (i >= 2 && i <= 11) return dc_coeff(i);
  if (i < 2) throw std::out_of_range("dc coefficient index must be >= 2");
  return derive_dc_coeffs(i / 2)[i - 2];
}

Rational interior_coeff_extended(int p, int i) {
  if (p >= 1 && p <= 4) return interior_coeff(p, i);
  if (i < 2 || i > 2 * p + 1) throw std::out_of_range("interior coefficient index outside [2, 2p+1]");
  return derive_interior_coeffs(p)[i - 2];
}

Stencil composite_even_stencil(int m) {
  require_positive(m, "composite order m");
  std::vector<std::pair<int, Rational>> terms;
  for (int i = 0; i <= 2 * m; ++i) terms.emplace_back(m - i, sign_of(i) * binom(2 * m, i));
  return make_stencil(std::move(terms), -2 * m);
}

Stencil composite_odd_stencil(int m) {
  require_positive(m, "composite order m");
  std::vector<std::pair<int, Rational>> terms;
  for (int i = 0; i <= 2 * m + 1; ++i) terms.emplace_back(m - i, sign_of(i) * binom(2 * m + 1, i));
  return make_stencil(std::move(terms), -(2 * m + 1));
}

namespace {

// sum_{i=1..j} coeff(i) * sum_{l=0..2i} (-1)^l binom(2i, l) v[n+i-l]
template <class CoeffFn>
Stencil correction_stencil(int j, CoeffFn coeff) {
  require_positive(j, "correction stage j");
  std::vector<std::pair<int, Rational>> terms;
  for (int i = 1; i <= j; ++i) {
    const Rational c = coeff(i);
    for (int l = 0; l <= 2 * i; ++l) terms.emplace_back(i - l, c * sign_of(l) * binom(2 * i, l));
  }
  return make_stencil(std::move(terms), 0);
}

}  // namespace

Stencil lambda_stencil(int j) {
  return correction_stencil(j, [](int i) { return dc_coeff_extended(2 * i + 1); });
}

Stencil gamma_stencil(int j) {
  return correction_stencil(j, [](int i) { return dc_coeff_extended(2 * i); });
}

Stencil d_lambda_stencil(int j) {
  const Stencil lam = lambda_stencil(j);
  Stencil out = sum(shifted(lam, 1), scaled(lam, Rational(-1)));
  out.scale_power = -1;
  return out;
}

Stencil e_gamma_stencil(int j) {
  const Stencil gam = gamma_stencil(j);
  return scaled(sum(shifted(gam, 1), gam), Rational(1, 2));
}

Stencil bar_lambda_stencil(int j) {
  require_positive(j, "start-up stage j");
  std::vector<std::pair<int, Rational>> terms;
  for (int i = 1; i <= j; ++i) {
    const Rational c = interior_coeff_extended(j, 2 * i + 1);
    for (int l = 0; l <= 2 * i + 1; ++l)
      terms.emplace_back(i - l + 1, c * sign_of(l) * binom(2 * i + 1, l));
  }
  return make_stencil(std::move(terms), -1);
}

Stencil bar_gamma_stencil(int j) {
  require_positive(j, "start-up stage j");
  std::vector<std::pair<int, Rational>> terms;
  for (int i = 1; i <= j; ++i) {
    const Rational c = interior_coeff_extended(j, 2 * i);
    for (int l = 0; l <= 2 * i; ++l) terms.emplace_back(i - l, c * sign_of(l) * binom(2 * i, l));
  }
  return make_stencil(std::move(terms), 0);
}

TimeSeriesView::TimeSeriesView(std::span<const DofVector> states, int first_index)
    : TimeSeriesView(states, first_index, first_index,
                     first_index + static_cast<int>(states.size()) - 1) {}

TimeSeriesView::TimeSeriesView(std::span<const DofVector> states, int first_index, int lo, int hi)
    : states_(states), first_(first_index), lo_(lo), hi_(hi) {
  const int last = first_index + static_cast<int>(states.size()) - 1;
  if (lo < first_index || hi > last || lo > hi + 1)
    throw WindowError("series window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                      "] exceeds stored range [" + std::to_string(first_index) + ", " +
                      std::to_string(last) + "]");
}

const DofVector& TimeSeriesView::at(int index) const {
  if (index < lo_ || index > hi_)
    throw WindowError("time index " + std::to_string(index) + " outside window [" +
                      std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
  return states_[static_cast<std::size_t>(index - first_)];
}

TimeSeriesView TimeSeriesView::restricted(int lo, int hi) const {
  if (lo < lo_ || hi > hi_)
    throw WindowError("restricted window leaves the parent window");
  return TimeSeriesView(states_, first_, lo, hi);
}

DofVector apply(const Stencil& s, const TimeSeriesView& series, int center, double k) {
  // Validate the whole window before touching any data.
  series.at(center + s.min_offset());
  series.at(center + s.max_offset());
  const DofVector& base = series.at(center + s.offsets.front());
  DofVector out = DofVector::Zero(base.size());
  // Zero-sum stencils act on differences so constants cancel exactly.
  const bool zero_sum = s.weight_sum() == 0;
  for (std::size_t i = 0; i < s.offsets.size(); ++i) {
    const DofVector& v = series.at(center + s.offsets[i]);
    if (zero_sum) {
      out += to_double(s.weights[i]) * (v - base);
    } else {
      out += to_double(s.weights[i]) * v;
    }
  }
  if (s.scale_power != 0) out *= std::pow(k, s.scale_power);
  return out;
}

DofVector bar_lambda_apply(int j, const TimeSeriesView& fine, int fine_center, double k) {
  return apply(bar_lambda_stencil(j), fine, fine_center, k);
}

DofVector bar_gamma_apply(int j, const TimeSeriesView& fine, int fine_index) {
  return apply(bar_gamma_stencil(j), fine, fine_index, 1.0);
}

}  // namespace dcreact
