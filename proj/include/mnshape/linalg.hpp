#pragma once

// Dense linear algebra at extended precision: LU with partial pivoting,
// explicit inverse, and infinity-norm condition numbers.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mnshape/error.hpp"
#include "mnshape/scalar.hpp"

namespace mnshape {

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, const T& fill) : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Matrix identity(std::size_t n, const T& zero, const T& one) {
    Matrix m(n, n, zero);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = one;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  void swap_rows(std::size_t i, std::size_t k) {
    if (i == k) return;
    for (std::size_t j = 0; j < cols_; ++j) std::swap(a_[i * cols_ + j], a_[k * cols_ + j]);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> a_;
};

template <class T>
T norm_inf(const Matrix<T>& m) {
  T best = abs(m(0, 0)) * 0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    T row = abs(m(i, 0));
    for (std::size_t j = 1; j < m.cols(); ++j) row += abs(m(i, j));
    if (row > best) best = std::move(row);
  }
  return best;
}

template <class T>
T norm_inf(const std::vector<T>& v) {
  T best = abs(v.at(0));
  for (std::size_t i = 1; i < v.size(); ++i) {
    T a = abs(v[i]);
    if (a > best) best = std::move(a);
  }
  return best;
}

template <class T>
std::vector<T> multiply(const Matrix<T>& m, const std::vector<T>& x) {
  if (m.cols() != x.size()) throw DomainError("matrix-vector size mismatch");
  std::vector<T> y;
  y.reserve(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    T s = m(i, 0) * x[0];
    for (std::size_t j = 1; j < m.cols(); ++j) s += m(i, j) * x[j];
    y.push_back(std::move(s));
  }
  return y;
}

/// Packed LU factors of P M = L U with unit-diagonal L.
template <class T>
struct LuFactors {
  Matrix<T> lu;
  std::vector<std::size_t> perm;
  int swaps = 0;
};

/// Pivot floor 10^(-digits+10) * ||M||_inf: a pivot at or below it means the
/// working precision is exhausted.
inline XReal pivot_floor(const XReal& scale, unsigned digits) {
  return scale * pow(XReal::integer(scale.bits(), 10), -static_cast<long>(digits) + 10);
}

template <class T>
LuFactors<T> lu_factor(Matrix<T> m, unsigned digits) {
  if (!m.square() || m.rows() == 0) throw DomainError("LU needs a nonempty square matrix");
  const std::size_t n = m.rows();
  const T floor = pivot_floor(norm_inf(m), digits);
  LuFactors<T> f;
  f.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    T best = abs(m(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      T a = abs(m(i, k));
      if (a > best) {
        best = std::move(a);
        piv = i;
      }
    }
    if (!(best > floor)) {
      throw SingularMatrix("pivot " + best.sci(3) + " at column " + std::to_string(k) + " below 1e-" +
                           std::to_string(digits - 10) + " relative to the matrix norm");
    }
    if (piv != k) {
      m.swap_rows(piv, k);
      std::swap(f.perm[piv], f.perm[k]);
      ++f.swaps;
    }
    const T inv = 1 / m(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      if (m(i, k).is_zero()) continue;
      m(i, k) *= inv;
      const T l = m(i, k);
      for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= l * m(k, j);
    }
  }
  f.lu = std::move(m);
  return f;
}

template <class T>
std::vector<T> lu_solve(const LuFactors<T>& f, const std::vector<T>& b) {
  const std::size_t n = f.lu.rows();
  if (b.size() != n) throw DomainError("right-hand side size mismatch");
  std::vector<T> y;
  y.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    T s = b[f.perm[i]];
    for (std::size_t j = 0; j < i; ++j) s -= f.lu(i, j) * y[j];
    y.push_back(std::move(s));
  }
  for (std::size_t i = n; i-- > 0;) {
    T s = y[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= f.lu(i, j) * y[j];
    y[i] = s / f.lu(i, i);
  }
  return y;
}

template <class T>
std::vector<T> solve_linear(const Matrix<T>& m, const std::vector<T>& b, unsigned digits) {
  return lu_solve(lu_factor(m, digits), b);
}

template <class T>
T determinant(const Matrix<T>& m, unsigned digits) {
  LuFactors<T> f;
  try {
    f = lu_factor(m, digits);
  } catch (const SingularMatrix&) {
    return m(0, 0) * 0;
  }
  T det = f.lu(0, 0);
  for (std::size_t i = 1; i < m.rows(); ++i) det *= f.lu(i, i);
  return f.swaps % 2 ? -det : det;
}

template <class T>
Matrix<T> inverse(const LuFactors<T>& f) {
  const std::size_t n = f.lu.rows();
  const T zero = f.lu(0, 0) * 0;
  Matrix<T> inv(n, n, zero);
  std::vector<T> e(n, zero);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = zero + 1;
    const auto col = lu_solve(f, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    e[j] = zero;
  }
  return inv;
}

/// kappa_inf = ||M||_inf * ||M^-1||_inf.
template <class T>
T condition_number_inf(const Matrix<T>& m, unsigned digits) {
  return norm_inf(m) * norm_inf(inverse(lu_factor(m, digits)));
}

}  // namespace mnshape
