#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace dcreact {

/// Nodal coefficients of a P1 finite-element function. Multi-component
/// systems use node-interleaved ordering: entry `node * J + component`.
using DofVector = Eigen::VectorXd;

/// Raised when a finite-difference stencil or series access leaves the
/// declared index window.
class WindowError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class LinearSolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A user-supplied function returned a non-finite value during assembly.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, int cell)
      : std::runtime_error(what + " (cell " + std::to_string(cell) + ")"), cell_(cell) {}
  int cell() const noexcept { return cell_; }

 private:
  int cell_;
};

}  // namespace dcreact
