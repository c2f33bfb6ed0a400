#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace framesrl {

using Vector = std::vector<double>;

// Dense row-major matrix. Biases are stored as 1xN matrices so every
// parameter is reachable through one uniform tensor interface.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }
  size_t size() const { return data.size(); }
  void zero() { std::fill(data.begin(), data.end(), 0.0); }

  bool operator==(const Matrix&) const = default;
};

// y = M x  (M: m x n, x: n)
void matvec(const Matrix& m, const Vector& x, Vector& y);
// y += M^T x  (M: m x n, x: m, y: n)
void matvec_transpose_add(const Matrix& m, const Vector& x, Vector& y);
// M += a b^T  (outer product accumulate; a: rows, b: cols)
void outer_add(Matrix& m, const Vector& a, const Vector& b);

double dot(const Vector& a, const Vector& b);

}  // namespace framesrl
