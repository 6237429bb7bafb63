#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

// Dense symmetric matrices of dimension <= 3, sized for the lattice
// dimensions we support.  Kept as fixed 3x3 storage with an explicit
// dimension argument; entries beyond `dim` are ignored.

namespace exclab {

using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 mat_zero() {
  return Mat3{{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}};
}

inline Mat3 mat_identity(int dim, double s = 1.0) {
  Mat3 m = mat_zero();
  for (int i = 0; i < dim; ++i) m[i][i] = s;
  return m;
}

inline Mat3 mat_add(const Mat3& a, const Mat3& b, int dim) {
  Mat3 r = mat_zero();
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) r[i][j] = a[i][j] + b[i][j];
  return r;
}

inline Mat3 mat_sub(const Mat3& a, const Mat3& b, int dim) {
  Mat3 r = mat_zero();
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) r[i][j] = a[i][j] - b[i][j];
  return r;
}

inline Mat3 mat_scale(const Mat3& a, double s, int dim) {
  Mat3 r = mat_zero();
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) r[i][j] = s * a[i][j];
  return r;
}

inline double quad_form(const Mat3& m, const std::array<double, 3>& u, int dim) {
  double acc = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) acc += u[i] * m[i][j] * u[j];
  return acc;
}

inline std::array<double, 3> mat_apply(const Mat3& m, const std::array<double, 3>& u, int dim) {
  std::array<double, 3> r{0.0, 0.0, 0.0};
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) r[i] += m[i][j] * u[j];
  return r;
}

inline double mat_det(const Mat3& m, int dim) {
  switch (dim) {
    case 1:
      return m[0][0];
    case 2:
      return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    case 3:
      return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
             m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
             m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    default:
      throw std::invalid_argument("mat_det: dimension must be 1, 2 or 3");
  }
}

inline Mat3 mat_invert(const Mat3& m, int dim) {
  const double det = mat_det(m, dim);
  if (std::abs(det) < 1e-300) throw std::runtime_error("mat_invert: singular matrix");
  Mat3 r = mat_zero();
  if (dim == 1) {
    r[0][0] = 1.0 / det;
  } else if (dim == 2) {
    r[0][0] = m[1][1] / det;
    r[1][1] = m[0][0] / det;
    r[0][1] = -m[0][1] / det;
    r[1][0] = -m[1][0] / det;
  } else {
    r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  }
  return r;
}

inline double mat_frobenius(const Mat3& m, int dim) {
  double acc = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) acc += m[i][j] * m[i][j];
  return std::sqrt(acc);
}

// Symmetric matrix recovered from a quadratic form sampled at e_i and
// e_i + e_j:  M_ii = Q(e_i),  M_ij = (Q(e_i+e_j) - Q(e_i) - Q(e_j)) / 2.
template <class QF>
Mat3 polarize(QF&& q, int dim) {
  Mat3 m = mat_zero();
  std::array<double, 3> u{0.0, 0.0, 0.0};
  std::array<double, 3> diag{0.0, 0.0, 0.0};
  for (int i = 0; i < dim; ++i) {
    u = {0.0, 0.0, 0.0};
    u[i] = 1.0;
    diag[i] = q(u);
    m[i][i] = diag[i];
  }
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      u = {0.0, 0.0, 0.0};
      u[i] = 1.0;
      u[j] = 1.0;
      const double mixed = q(u);
      m[i][j] = m[j][i] = 0.5 * (mixed - diag[i] - diag[j]);
    }
  return m;
}

}  // namespace exclab
