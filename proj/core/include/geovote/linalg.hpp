#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace geovote {

/// Dense row-major n x n matrix.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}
  SquareMatrix(std::size_t n, std::vector<double> row_major);

  static SquareMatrix identity(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * n_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * n_ + c]; }
  std::span<const double> data() const noexcept { return data_; }

  double trace() const noexcept;
  std::vector<double> multiply(std::span<const double> x) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct SymmetricEigen {
  std::vector<double> values;  ///< unsorted eigenvalues
  SquareMatrix vectors;        ///< column i is the eigenvector of values[i]
};

/// Eigen-decomposition by Householder tridiagonalisation followed by
/// implicit QL iterations. Reads the upper triangle only.
SymmetricEigen symmetric_eigen(const SquareMatrix& a);

double determinant(SquareMatrix a);

}  // namespace geovote
