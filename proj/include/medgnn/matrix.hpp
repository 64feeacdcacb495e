#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "medgnn/common.hpp"

namespace medgnn {

// Dense row-major matrix. Graphs in this library are small (a few hundred
// nodes), so dense storage keeps every kernel a plain loop.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}

  static DenseMatrix identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }
  const double* row(int i) const { return data_.data() + static_cast<std::size_t>(i) * cols_; }
  double* row(int i) { return data_.data() + static_cast<std::size_t>(i) * cols_; }

  // y = A x
  void matvec(const double* x, double* y) const {
    for (int i = 0; i < rows_; ++i) {
      const double* r = row(i);
      double acc = 0.0;
      for (int j = 0; j < cols_; ++j) acc += r[j] * x[j];
      y[i] = acc;
    }
  }

  void matvec(const std::vector<double>& x, std::vector<double>& y) const {
    if (static_cast<int>(x.size()) != cols_) throw ShapeError("matvec: size mismatch");
    y.resize(rows_);
    matvec(x.data(), y.data());
  }

  // y = A^T x
  void matvec_transpose(const double* x, double* y) const {
    for (int j = 0; j < cols_; ++j) y[j] = 0.0;
    for (int i = 0; i < rows_; ++i) {
      const double* r = row(i);
      const double xi = x[i];
      if (xi == 0.0) continue;
      for (int j = 0; j < cols_; ++j) y[j] += r[j] * xi;
    }
  }

  void scale(double c) {
    for (double& v : data_) v *= c;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  bool is_zero() const { return max_abs() == 0.0; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Square matrix whose sparsity pattern follows a graph's edges.
using ShiftMatrix = DenseMatrix;

inline double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm2(const double* a, std::size_t n) {
  return std::sqrt(dot(a, a, n));
}

}  // namespace medgnn
