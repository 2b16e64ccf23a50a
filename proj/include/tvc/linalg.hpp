#ifndef TVC_LINALG_HPP
#define TVC_LINALG_HPP

#include <cassert>
#include <cstddef>
#include <vector>

namespace tvc {

using Vector = std::vector<double>;

// Dense row-major matrix, sized at construction.
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  std::size_t size() const { return a.size(); }
};

// y = M x
inline void matvec(const Matrix& m, const double* x, double* y) {
  const double* row = m.a.data();
  for (int i = 0; i < m.rows; ++i, row += m.cols) {
    double s = 0.0;
    for (int j = 0; j < m.cols; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

// y = M^T x
inline void matTvec(const Matrix& m, const double* x, double* y) {
  for (int j = 0; j < m.cols; ++j) y[j] = 0.0;
  const double* row = m.a.data();
  for (int i = 0; i < m.rows; ++i, row += m.cols) {
    double xi = x[i];
    if (xi == 0.0) continue;
    for (int j = 0; j < m.cols; ++j) y[j] += row[j] * xi;
  }
}

// M += u v^T
inline void add_outer(Matrix& m, const double* u, const double* v) {
  double* row = m.a.data();
  for (int i = 0; i < m.rows; ++i, row += m.cols) {
    double ui = u[i];
    if (ui == 0.0) continue;
    for (int j = 0; j < m.cols; ++j) row[j] += ui * v[j];
  }
}

inline void axpy(double alpha, const Vector& x, Vector& y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace tvc

#endif
