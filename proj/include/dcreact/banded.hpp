#pragma once

#include "dcreact/types.hpp"

#include <vector>

namespace dcreact {

/// Square banded matrix with kl sub- and ku super-diagonals.
class BandedMatrix {
 public:
  BandedMatrix() = default;
  BandedMatrix(int n, int kl, int ku);

  int size() const { return n_; }
  int lower() const { return kl_; }
  int upper() const { return ku_; }

  bool in_band(int i, int j) const { return j - i <= ku_ && i - j <= kl_; }
  double operator()(int i, int j) const;
  /// Entry reference; (i, j) must be inside the band.
  double& at(int i, int j);

  DofVector multiply(const DofVector& x) const;
  /// this += alpha * other; other's band must fit inside this one.
  void add(const BandedMatrix& other, double alpha = 1.0);
  void scale(double alpha);
  void set_identity_row(int i);

  Eigen::MatrixXd to_dense() const;

 private:
  int n_ = 0;
  int kl_ = 0;
  int ku_ = 0;
  std::vector<double> band_;  // row-major, width kl + ku + 1
};

/// LU factorization with partial pivoting (LAPACK dgbtrf/dgbtrs).
class BandedLU {
 public:
  explicit BandedLU(const BandedMatrix& a);
  DofVector solve(const DofVector& rhs) const;

 private:
  int n_;
  int kl_;
  int ku_;
  int ldab_;
  std::vector<double> ab_;  // column-major LAPACK band storage
  std::vector<int> ipiv_;
};

}  // namespace dcreact
