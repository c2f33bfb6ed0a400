#include "framesrl/linalg.hpp"

namespace framesrl {

void matvec(const Matrix& m, const Vector& x, Vector& y) {
  assert(static_cast<int>(x.size()) == m.cols);
  y.assign(m.rows, 0.0);
  const double* d = m.data.data();
  for (int r = 0; r < m.rows; ++r) {
    double acc = 0.0;
    const double* row = d + static_cast<size_t>(r) * m.cols;
    for (int c = 0; c < m.cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void matvec_transpose_add(const Matrix& m, const Vector& x, Vector& y) {
  assert(static_cast<int>(x.size()) == m.rows);
  assert(static_cast<int>(y.size()) == m.cols);
  const double* d = m.data.data();
  for (int r = 0; r < m.rows; ++r) {
    double xr = x[r];
    if (xr == 0.0) continue;
    const double* row = d + static_cast<size_t>(r) * m.cols;
    for (int c = 0; c < m.cols; ++c) y[c] += row[c] * xr;
  }
}

void outer_add(Matrix& m, const Vector& a, const Vector& b) {
  assert(static_cast<int>(a.size()) == m.rows);
  assert(static_cast<int>(b.size()) == m.cols);
  double* d = m.data.data();
  for (int r = 0; r < m.rows; ++r) {
    double ar = a[r];
    if (ar == 0.0) continue;
    double* row = d + static_cast<size_t>(r) * m.cols;
    for (int c = 0; c < m.cols; ++c) row[c] += ar * b[c];
  }
}

double dot(const Vector& a, const Vector& b) {
  assert(a.size() == b.size());
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace framesrl
