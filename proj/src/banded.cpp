#include "dcreact/banded.hpp"

#include <lapacke.h>

#include <algorithm>
#include <string>

namespace dcreact {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), band_(static_cast<std::size_t>(n) * (kl + ku + 1), 0.0) {
  if (n < 1 || kl < 0 || ku < 0) throw std::invalid_argument("invalid banded matrix shape");
}

double BandedMatrix::operator()(int i, int j) const {
  if (!in_band(i, j)) return 0.0;
  return band_[static_cast<std::size_t>(i) * (kl_ + ku_ + 1) + (j - i + kl_)];
}

double& BandedMatrix::at(int i, int j) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || !in_band(i, j))
    throw std::out_of_range("banded entry (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") outside band");
  return band_[static_cast<std::size_t>(i) * (kl_ + ku_ + 1) + (j - i + kl_)];
}

DofVector BandedMatrix::multiply(const DofVector& x) const {
  DofVector y = DofVector::Zero(n_);
  const int width = kl_ + ku_ + 1;
  for (int i = 0; i < n_; ++i) {
    const int j0 = std::max(0, i - kl_);
    const int j1 = std::min(n_ - 1, i + ku_);
    const double* row = band_.data() + static_cast<std::size_t>(i) * width;
    double acc = 0.0;
    for (int j = j0; j <= j1; ++j) acc += row[j - i + kl_] * x[j];
    y[i] = acc;
  }
  return y;
}

void BandedMatrix::add(const BandedMatrix& other, double alpha) {
  if (other.n_ != n_ || other.kl_ > kl_ || other.ku_ > ku_)
    throw std::invalid_argument("banded add: incompatible bands");
  for (int i = 0; i < n_; ++i)
    for (int j = std::max(0, i - other.kl_); j <= std::min(n_ - 1, i + other.ku_); ++j)
      at(i, j) += alpha * other(i, j);
}

void BandedMatrix::scale(double alpha) {
  for (auto& v : band_) v *= alpha;
}

void BandedMatrix::set_identity_row(int i) {
  for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) at(i, j) = 0.0;
  at(i, i) = 1.0;
}

Eigen::MatrixXd BandedMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) d(i, j) = (*this)(i, j);
  return d;
}

BandedLU::BandedLU(const BandedMatrix& a)
    : n_(a.size()), kl_(a.lower()), ku_(a.upper()), ldab_(2 * a.lower() + a.upper() + 1),
      ab_(static_cast<std::size_t>(ldab_) * n_, 0.0), ipiv_(n_) {
  // LAPACK band layout: A(i, j) -> ab[(kl + ku + i - j) + j * ldab]
  for (int j = 0; j < n_; ++j)
    for (int i = std::max(0, j - ku_); i <= std::min(n_ - 1, j + kl_); ++i)
      ab_[static_cast<std::size_t>(kl_ + ku_ + i - j) + static_cast<std::size_t>(j) * ldab_] = a(i, j);
  const lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_, ab_.data(), ldab_, ipiv_.data());
  if (info > 0)
    throw LinearSolveError("singular banded matrix: zero pivot at row " + std::to_string(info));
  if (info < 0) throw LinearSolveError("dgbtrf: invalid argument " + std::to_string(-info));
}

DofVector BandedLU::solve(const DofVector& rhs) const {
  if (rhs.size() != n_) throw std::invalid_argument("banded solve: size mismatch");
  DofVector x = rhs;
  const lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, 1, ab_.data(), ldab_,
                                         ipiv_.data(), x.data(), n_);
  if (info != 0) throw LinearSolveError("dgbtrs failed with code " + std::to_string(info));
  return x;
}

}  // namespace dcreact
