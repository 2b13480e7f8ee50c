#pragma once

// (Inverse) multiquadric interpolation with polynomial augmentation.

#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mnshape/error.hpp"
#include "mnshape/geometry.hpp"
#include "mnshape/linalg.hpp"
#include "mnshape/scalar.hpp"

namespace mnshape {

struct KernelSpec {
  double beta = -1.0;
  double c = 1.0;
  // true: Gamma(-beta/2) (c^2 + r^2)^(beta/2); false: (-1)^ceil(beta/2) (c^2 + r^2)^(beta/2).
  bool gamma_prefactor = false;
};

inline int cpd_order(double beta) {
  if (!std::isfinite(beta) || is_even_nonnegative_integer(beta)) {
    throw DomainError("beta must be real and not in {0, 2, 4, ...}");
  }
  return std::max(0, static_cast<int>(std::ceil(beta / 2.0)));
}

inline void validate(const KernelSpec& k) {
  cpd_order(k.beta);
  if (!(k.c > 0.0) || !std::isfinite(k.c)) throw DomainError("shape parameter c must be positive");
}

/// h at squared radius r2.
inline XReal kernel_eval(const KernelSpec& k, const XReal& r2) {
  if (r2 < 0.0) throw DomainError("kernel_eval needs r2 >= 0");
  const mpfr_prec_t bits = r2.bits();
  const XReal c = XReal::from_double(bits, k.c);
  const XReal base = c * c + r2;
  XReal value;
  if (std::floor(k.beta) == k.beta && std::fmod(k.beta, 2.0) != 0.0 && std::abs(k.beta) < 1e6) {
    value = pow(sqrt(base), static_cast<long>(k.beta));
  } else {
    value = pow(base, XReal::from_double(bits, k.beta) / 2);
  }
  if (k.gamma_prefactor) return gamma(-XReal::from_double(bits, k.beta) / 2) * value;
  if (k.beta > 0.0 && static_cast<long>(std::ceil(k.beta / 2.0)) % 2 != 0) return -value;
  return value;
}

/// Exponent tuples of total degree <= degree, ascending lexicographic.
inline std::vector<std::vector<int>> monomial_exponents(std::size_t n, int degree) {
  std::vector<std::vector<int>> out;
  if (degree < 0) return out;
  std::vector<int> cur(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i == n) {
      out.push_back(cur);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      cur[i] = e;
      rec(i + 1, left - e);
    }
    cur[i] = 0;
  };
  rec(0, degree);
  return out;
}

inline XReal monomial(const Point& x, const std::vector<int>& exponents) {
  XReal v = XReal::integer(x.at(0).bits(), 1);
  for (std::size_t d = 0; d < exponents.size(); ++d) {
    if (exponents[d] > 0) v *= pow(x[d], static_cast<long>(exponents[d]));
  }
  return v;
}

struct LinearSystem {
  Matrix<XReal> matrix;
  std::vector<XReal> rhs;
  NodeSet centers;
  KernelSpec kernel;
  std::vector<std::vector<int>> monomials;
  unsigned digits = PrecisionContext::kDefaultDigits;
};

struct Interpolant {
  NodeSet centers;
  std::vector<XReal> rbf_coeffs;
  std::vector<XReal> poly_coeffs;
  KernelSpec kernel;
  std::vector<std::vector<int>> monomials;
  unsigned solve_digits = PrecisionContext::kDefaultDigits;
};

struct SolveReport {
  XReal condition_number;
  XReal residual_norm;
  unsigned digits_used = 0;
};

namespace detail {

inline std::size_t column_rank(Matrix<XReal> m, unsigned digits) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  const XReal floor = pivot_floor(norm_inf(m), digits);
  std::size_t rank = 0;
  for (std::size_t col = 0; col < m.cols() && rank < m.rows(); ++col) {
    std::size_t piv = rank;
    for (std::size_t i = rank + 1; i < m.rows(); ++i) {
      if (abs(m(i, col)) > abs(m(piv, col))) piv = i;
    }
    if (!(abs(m(piv, col)) > floor)) continue;
    m.swap_rows(piv, rank);
    for (std::size_t i = rank + 1; i < m.rows(); ++i) {
      const XReal f = m(i, col) / m(rank, col);
      for (std::size_t j = col; j < m.cols(); ++j) m(i, j) -= f * m(rank, j);
    }
    ++rank;
  }
  return rank;
}

}  // namespace detail

/// Saddle-point system [[A, P], [P^T, 0]] [coeffs; poly] = [values; 0].
inline LinearSystem assemble(const NodeSet& centers, const std::vector<XReal>& values, const KernelSpec& k,
                             const PrecisionContext& ctx) {
  validate(k);
  const std::size_t n = centers.size();
  if (n == 0) throw EmptySet("no interpolation centers");
  if (values.size() != n) throw DomainError("one data value per center required");
  require_distinct(centers.points);
  const std::size_t dim = centers.dimension();
  const int m = cpd_order(k.beta);

  LinearSystem sys;
  sys.kernel = k;
  sys.centers = centers;
  sys.digits = ctx.digits();
  sys.monomials = monomial_exponents(dim, m - 1);
  const std::size_t q = sys.monomials.size();
  const XReal zero(ctx, 0);
  sys.matrix = Matrix<XReal>(n + q, n + q, zero);

  auto at_ctx = [&](const XReal& v) { return XReal::with_bits(ctx.bits(), v); };
  for (std::size_t i = 0; i < n; ++i) {
    sys.matrix(i, i) = kernel_eval(k, zero);
    for (std::size_t j = i + 1; j < n; ++j) {
      XReal r2 = zero;
      for (std::size_t d = 0; d < dim; ++d) {
        const XReal diff = at_ctx(centers.points[i][d]) - at_ctx(centers.points[j][d]);
        r2 += diff * diff;
      }
      XReal h = kernel_eval(k, r2);
      sys.matrix(j, i) = h;
      sys.matrix(i, j) = std::move(h);
    }
  }
  if (q > 0) {
    Matrix<XReal> p(n, q, zero);
    for (std::size_t i = 0; i < n; ++i) {
      Point x;
      for (const auto& xd : centers.points[i]) x.push_back(at_ctx(xd));
      for (std::size_t a = 0; a < q; ++a) {
        p(i, a) = monomial(x, sys.monomials[a]);
        sys.matrix(i, n + a) = p(i, a);
        sys.matrix(n + a, i) = p(i, a);
      }
    }
    if (detail::column_rank(p, ctx.digits()) < q) {
      throw NotDetermining("centers are not a determining set for polynomials of degree " +
                           std::to_string(m - 1));
    }
  }
  sys.rhs.reserve(n + q);
  for (const auto& v : values) sys.rhs.push_back(at_ctx(v));
  for (std::size_t a = 0; a < q; ++a) sys.rhs.push_back(zero);
  return sys;
}

/// kappa_inf of a square matrix, inverse by elimination at `ctx`.
inline XReal condition_number(const Matrix<XReal>& m, const PrecisionContext& ctx) {
  return condition_number_inf(m, ctx.digits());
}

inline std::pair<Interpolant, SolveReport> solve(const LinearSystem& sys, const PrecisionContext& ctx) {
  const auto factors = lu_factor(sys.matrix, ctx.digits());
  const auto x = lu_solve(factors, sys.rhs);

  auto r = multiply(sys.matrix, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= sys.rhs[i];

  SolveReport report;
  report.residual_norm = norm_inf(r);
  report.condition_number = norm_inf(sys.matrix) * norm_inf(inverse(factors));
  report.digits_used = ctx.digits();

  Interpolant s;
  s.centers = sys.centers;
  s.kernel = sys.kernel;
  s.monomials = sys.monomials;
  s.solve_digits = ctx.digits();
  const std::size_t n = sys.centers.size();
  s.rbf_coeffs.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
  s.poly_coeffs.assign(x.begin() + static_cast<std::ptrdiff_t>(n), x.end());
  return {std::move(s), std::move(report)};
}

inline XReal evaluate(const Interpolant& s, const Point& x) {
  if (x.size() != s.centers.dimension()) throw DomainError("evaluation point has the wrong dimension");
  const mpfr_prec_t bits = s.rbf_coeffs.at(0).bits();
  Point xw;
  for (const auto& xd : x) xw.push_back(XReal::with_bits(bits, xd));
  XReal sum = XReal::integer(bits, 0);
  for (std::size_t a = 0; a < s.poly_coeffs.size(); ++a) sum += s.poly_coeffs[a] * monomial(xw, s.monomials[a]);
  for (std::size_t j = 0; j < s.centers.size(); ++j) {
    XReal r2 = XReal::integer(bits, 0);
    for (std::size_t d = 0; d < xw.size(); ++d) {
      const XReal diff = xw[d] - XReal::with_bits(bits, s.centers.points[j][d]);
      r2 += diff * diff;
    }
    sum += s.rbf_coeffs[j] * kernel_eval(s.kernel, r2);
  }
  return sum;
}

using TargetFunction = std::function<XReal(const Point&)>;

/// sqrt(sum_j |f(z_j) - s(z_j)|^2 / N_t).
inline XReal rms_error(const TargetFunction& f, const Interpolant& s, const NodeSet& test) {
  if (test.points.empty()) throw EmptySet("empty test set");
  const mpfr_prec_t bits = s.rbf_coeffs.at(0).bits();
  XReal acc = XReal::integer(bits, 0);
  for (const auto& z : test.points) {
    const XReal e = f(z) - evaluate(s, z);
    acc += e * e;
  }
  return sqrt(acc / static_cast<long>(test.points.size()));
}

/// sin(x)/x, equal to 1 at 0.
inline XReal sinc_target(const XReal& x) {
  if (x.is_zero()) return XReal::integer(x.bits(), 1);
  const double digits = static_cast<double>(x.bits()) * 0.30102999566398120;
  const XReal ax = abs(x);
  if (ax < std::pow(10.0, -digits / 4.0)) {
    const XReal x2 = x * x;
    return 1 - x2 / 6 + x2 * x2 / 120;
  }
  return sin(x) / x;
}

inline XReal sinc_target(const Point& x) { return sinc_target(x.at(0)); }

namespace detail {

inline std::string double_token(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FormatError("bad number '" + s + "'");
  return v;
}

inline std::string next_token(std::istream& is, const char* what) {
  std::string t;
  if (!(is >> t)) throw FormatError(std::string("interpolant truncated before ") + what);
  return t;
}

inline long parse_long(const std::string& s) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FormatError("bad integer '" + s + "'");
  return v;
}

}  // namespace detail

inline constexpr const char* kInterpolantMagic = "mnshape-interpolant";
inline constexpr int kInterpolantVersion = 1;

/// Versioned text form; centers and coefficients at full precision.
inline void write_interpolant(std::ostream& os, const Interpolant& s) {
  os << kInterpolantMagic << ' ' << kInterpolantVersion << '\n';
  os << "beta " << detail::double_token(s.kernel.beta) << '\n';
  os << "c " << detail::double_token(s.kernel.c) << '\n';
  os << "prefactor " << (s.kernel.gamma_prefactor ? 1 : 0) << '\n';
  os << "m " << cpd_order(s.kernel.beta) << '\n';
  os << "digits " << s.solve_digits << '\n';
  os << "dimension " << s.centers.dimension() << '\n';
  os << "centers " << s.centers.size() << '\n';
  for (const auto& p : s.centers.points) {
    for (std::size_t d = 0; d < p.size(); ++d) os << (d ? " " : "") << p[d].exact_string();
    os << '\n';
  }
  os << "rbf_coeffs " << s.rbf_coeffs.size() << '\n';
  for (const auto& v : s.rbf_coeffs) os << v.exact_string() << '\n';
  os << "poly_coeffs " << s.poly_coeffs.size() << '\n';
  for (const auto& v : s.poly_coeffs) os << v.exact_string() << '\n';
}

inline Interpolant read_interpolant(std::istream& is) {
  auto expect = [&](const char* key) {
    const std::string t = detail::next_token(is, key);
    if (t != key) throw FormatError(std::string("expected '") + key + "', found '" + t + "'");
  };
  expect(kInterpolantMagic);
  if (detail::parse_long(detail::next_token(is, "version")) != kInterpolantVersion) {
    throw FormatError("unsupported interpolant version");
  }
  Interpolant s;
  expect("beta");
  s.kernel.beta = detail::parse_double(detail::next_token(is, "beta"));
  expect("c");
  s.kernel.c = detail::parse_double(detail::next_token(is, "c"));
  expect("prefactor");
  s.kernel.gamma_prefactor = detail::parse_long(detail::next_token(is, "prefactor")) != 0;
  validate(s.kernel);
  expect("m");
  if (detail::parse_long(detail::next_token(is, "m")) != cpd_order(s.kernel.beta)) {
    throw FormatError("stored polynomial order disagrees with beta");
  }
  expect("digits");
  s.solve_digits = static_cast<unsigned>(detail::parse_long(detail::next_token(is, "digits")));
  const PrecisionContext ctx = with_precision(s.solve_digits);
  expect("dimension");
  const long dim = detail::parse_long(detail::next_token(is, "dimension"));
  expect("centers");
  const long n = detail::parse_long(detail::next_token(is, "centers"));
  if (dim < 1 || n < 1) throw FormatError("empty interpolant");
  for (long i = 0; i < n; ++i) {
    Point p;
    for (long d = 0; d < dim; ++d) p.emplace_back(ctx, detail::next_token(is, "center"));
    s.centers.points.push_back(std::move(p));
  }
  expect("rbf_coeffs");
  if (detail::parse_long(detail::next_token(is, "rbf_coeffs")) != n) throw FormatError("coefficient count mismatch");
  for (long i = 0; i < n; ++i) s.rbf_coeffs.emplace_back(ctx, detail::next_token(is, "coefficient"));
  s.monomials = monomial_exponents(static_cast<std::size_t>(dim), cpd_order(s.kernel.beta) - 1);
  expect("poly_coeffs");
  const long q = detail::parse_long(detail::next_token(is, "poly_coeffs"));
  if (q != static_cast<long>(s.monomials.size())) throw FormatError("polynomial coefficient count mismatch");
  for (long i = 0; i < q; ++i) s.poly_coeffs.emplace_back(ctx, detail::next_token(is, "coefficient"));
  return s;
}

}  // namespace mnshape
