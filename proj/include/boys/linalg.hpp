#pragma once

// Small dense linear algebra over Real, sized for the fitter's problems
// (a few thousand rows, at most a few dozen columns).

#include <cstddef>
#include <span>
#include <vector>

#include "boys/real.hpp"

namespace boys::linalg {

class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols, Real::prec_t bits);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Real& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Real& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Real> data_;
};

// argmin ||A x - b||_2 by Householder QR on column-scaled A. A is consumed.
// Throws std::runtime_error when A is numerically rank deficient.
std::vector<Real> least_squares(Matrix a, std::vector<Real> b);

// Square solve by Gaussian elimination with partial pivoting. A is consumed.
std::vector<Real> solve(Matrix a, std::vector<Real> b);

}  // namespace boys::linalg
