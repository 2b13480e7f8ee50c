#pragma once

// Extended-precision reals on top of GNU MPFR.
//
// Every XReal carries its own mantissa width. Values created from a
// PrecisionContext get that context's width; binary operations produce a
// result at the wider of the two operands, so precision never silently drops.
// MPFR rounds every elementary operation correctly, which makes all results
// reproducible bit for bit.

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <compare>
#include <concepts>
#include <ostream>
#include <string>
#include <string_view>

#include "mnshape/error.hpp"

namespace mnshape {

class PrecisionContext {
 public:
  static constexpr unsigned kMinDigits = 50;
  static constexpr unsigned kDefaultDigits = 220;
  // Extra mantissa bits beyond the decimal request.
  static constexpr mpfr_prec_t kGuardBits = 16;

  explicit PrecisionContext(unsigned digits = kDefaultDigits) : digits_(digits) {
    if (digits < kMinDigits) {
      throw PrecisionError("precision of " + std::to_string(digits) +
                           " digits is below the minimum of " + std::to_string(kMinDigits));
    }
  }

  unsigned digits() const noexcept { return digits_; }

  mpfr_prec_t bits() const noexcept {
    return static_cast<mpfr_prec_t>(std::ceil(digits_ * 3.321928094887362)) + kGuardBits;
  }

  /// Same context with `extra` more digits.
  PrecisionContext escalated(unsigned extra) const { return PrecisionContext(digits_ + extra); }

  friend bool operator==(const PrecisionContext&, const PrecisionContext&) = default;

 private:
  unsigned digits_;
};

inline PrecisionContext with_precision(long digits) {
  if (digits < static_cast<long>(PrecisionContext::kMinDigits)) {
    throw PrecisionError("precision of " + std::to_string(digits) +
                         " digits is below the minimum of " +
                         std::to_string(PrecisionContext::kMinDigits));
  }
  return PrecisionContext(static_cast<unsigned>(digits));
}

class XReal {
 public:
  XReal() : XReal(PrecisionContext(PrecisionContext::kMinDigits).bits()) {}

  XReal(const PrecisionContext& ctx, double v) : XReal(ctx.bits()) { mpfr_set_d(v_, v, MPFR_RNDN); }

  template <std::integral I>
  XReal(const PrecisionContext& ctx, I v) : XReal(ctx.bits()) {
    mpfr_set_si(v_, static_cast<long>(v), MPFR_RNDN);
  }

  /// Parses a decimal literal such as "0.32" or "-1.5e-7" at the context width.
  XReal(const PrecisionContext& ctx, std::string_view text) : XReal(ctx.bits()) { assign(text); }
  XReal(const PrecisionContext& ctx, const char* text) : XReal(ctx, std::string_view(text)) {}

  XReal(const XReal& o) : XReal(mpfr_get_prec(o.v_)) { mpfr_set(v_, o.v_, MPFR_RNDN); }
  XReal(XReal&& o) noexcept : XReal(MPFR_PREC_MIN) { mpfr_swap(v_, o.v_); }

  XReal& operator=(const XReal& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  XReal& operator=(XReal&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }

  ~XReal() { mpfr_clear(v_); }

  static XReal pi(mpfr_prec_t bits) {
    XReal r(bits);
    mpfr_const_pi(r.v_, MPFR_RNDN);
    return r;
  }
  static XReal pi(const PrecisionContext& ctx) { return pi(ctx.bits()); }

  static XReal euler_gamma(mpfr_prec_t bits) {
    XReal r(bits);
    mpfr_const_euler(r.v_, MPFR_RNDN);
    return r;
  }
  static XReal euler_gamma(const PrecisionContext& ctx) { return euler_gamma(ctx.bits()); }

  /// Integer value at an explicit mantissa width.
  static XReal integer(mpfr_prec_t bits, long v) {
    XReal r(bits);
    mpfr_set_si(r.v_, v, MPFR_RNDN);
    return r;
  }

  static XReal from_double(mpfr_prec_t bits, double v) {
    XReal r(bits);
    mpfr_set_d(r.v_, v, MPFR_RNDN);
    return r;
  }

  /// Rebuilds a value at an explicit mantissa width.
  static XReal with_bits(mpfr_prec_t bits, const XReal& src) {
    XReal r(bits);
    mpfr_set(r.v_, src.v_, MPFR_RNDN);
    return r;
  }

  static XReal infinity(mpfr_prec_t bits) {
    XReal r(bits);
    mpfr_set_inf(r.v_, 1);
    return r;
  }

  mpfr_prec_t bits() const noexcept { return mpfr_get_prec(v_); }
  mpfr_srcptr get() const noexcept { return v_; }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

  bool is_nan() const noexcept { return mpfr_nan_p(v_) != 0; }
  bool is_finite() const noexcept { return mpfr_number_p(v_) != 0; }
  bool is_zero() const noexcept { return mpfr_zero_p(v_) != 0; }
  int sign() const noexcept { return mpfr_sgn(v_); }

  /// Scientific notation with `significant` significant digits, e.g. "4.70e-13".
  std::string sci(int significant) const {
    if (!is_finite()) return is_nan() ? "nan" : (sign() > 0 ? "inf" : "-inf");
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%.*Re", std::max(significant - 1, 0), v_);
    std::string out(buf);
    mpfr_free_str(buf);
    return out;
  }

  /// Fixed notation with `decimals` digits after the point.
  std::string fixed(int decimals) const {
    if (!is_finite()) return sci(1);
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%.*Rf", decimals, v_);
    std::string out(buf);
    mpfr_free_str(buf);
    return out;
  }

  /// Enough decimal digits to reconstruct the value exactly at its own width.
  std::string exact_string() const {
    return sci(static_cast<int>(std::ceil(bits() * 0.30102999566398120)) + 2);
  }

  XReal operator-() const {
    XReal r(bits());
    mpfr_neg(r.v_, v_, MPFR_RNDN);
    return r;
  }

  XReal& operator+=(const XReal& o) { return *this = *this + o; }
  XReal& operator-=(const XReal& o) { return *this = *this - o; }
  XReal& operator*=(const XReal& o) { return *this = *this * o; }
  XReal& operator/=(const XReal& o) { return *this = *this / o; }
  template <class T>
  XReal& operator+=(T o) { return *this = *this + o; }
  template <class T>
  XReal& operator-=(T o) { return *this = *this - o; }
  template <class T>
  XReal& operator*=(T o) { return *this = *this * o; }
  template <class T>
  XReal& operator/=(T o) { return *this = *this / o; }

#define MNSHAPE_XREAL_BINARY(op, fn, fn_d, fn_si)                             \
  friend XReal operator op(const XReal& a, const XReal& b) {                  \
    XReal r(std::max(a.bits(), b.bits()));                                    \
    fn(r.v_, a.v_, b.v_, MPFR_RNDN);                                          \
    return r;                                                                 \
  }                                                                           \
  friend XReal operator op(const XReal& a, double b) {                        \
    XReal r(a.bits());                                                        \
    fn_d(r.v_, a.v_, b, MPFR_RNDN);                                           \
    return r;                                                                 \
  }                                                                           \
  template <std::integral I>                                                  \
  friend XReal operator op(const XReal& a, I b) {                             \
    XReal r(a.bits());                                                        \
    fn_si(r.v_, a.v_, static_cast<long>(b), MPFR_RNDN);                       \
    return r;                                                                 \
  }

  MNSHAPE_XREAL_BINARY(+, mpfr_add, mpfr_add_d, mpfr_add_si)
  MNSHAPE_XREAL_BINARY(-, mpfr_sub, mpfr_sub_d, mpfr_sub_si)
  MNSHAPE_XREAL_BINARY(*, mpfr_mul, mpfr_mul_d, mpfr_mul_si)
  MNSHAPE_XREAL_BINARY(/, mpfr_div, mpfr_div_d, mpfr_div_si)
#undef MNSHAPE_XREAL_BINARY

  friend XReal operator+(double a, const XReal& b) { return b + a; }
  friend XReal operator*(double a, const XReal& b) { return b * a; }
  friend XReal operator-(double a, const XReal& b) {
    XReal r(b.bits());
    mpfr_d_sub(r.v_, a, b.v_, MPFR_RNDN);
    return r;
  }
  friend XReal operator/(double a, const XReal& b) {
    XReal r(b.bits());
    mpfr_d_div(r.v_, a, b.v_, MPFR_RNDN);
    return r;
  }
  template <std::integral I>
  friend XReal operator+(I a, const XReal& b) { return b + a; }
  template <std::integral I>
  friend XReal operator*(I a, const XReal& b) { return b * a; }
  template <std::integral I>
  friend XReal operator-(I a, const XReal& b) {
    XReal r(b.bits());
    mpfr_si_sub(r.v_, static_cast<long>(a), b.v_, MPFR_RNDN);
    return r;
  }
  template <std::integral I>
  friend XReal operator/(I a, const XReal& b) {
    XReal r(b.bits());
    mpfr_si_div(r.v_, static_cast<long>(a), b.v_, MPFR_RNDN);
    return r;
  }

  friend bool operator==(const XReal& a, const XReal& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend std::partial_ordering operator<=>(const XReal& a, const XReal& b) {
    if (mpfr_unordered_p(a.v_, b.v_)) return std::partial_ordering::unordered;
    return to_ordering(mpfr_cmp(a.v_, b.v_));
  }
  friend bool operator==(const XReal& a, double b) { return !a.is_nan() && mpfr_cmp_d(a.v_, b) == 0; }
  friend std::partial_ordering operator<=>(const XReal& a, double b) {
    if (a.is_nan() || std::isnan(b)) return std::partial_ordering::unordered;
    return to_ordering(mpfr_cmp_d(a.v_, b));
  }

#define MNSHAPE_XREAL_UNARY(name, fn) \
  friend XReal name(const XReal& x) { \
    XReal r(x.bits());                \
    fn(r.v_, x.v_, MPFR_RNDN);        \
    return r;                         \
  }

  MNSHAPE_XREAL_UNARY(abs, mpfr_abs)
  MNSHAPE_XREAL_UNARY(sqrt, mpfr_sqrt)
  MNSHAPE_XREAL_UNARY(exp, mpfr_exp)
  MNSHAPE_XREAL_UNARY(log, mpfr_log)
  MNSHAPE_XREAL_UNARY(log10, mpfr_log10)
  MNSHAPE_XREAL_UNARY(sin, mpfr_sin)
  MNSHAPE_XREAL_UNARY(cos, mpfr_cos)
  MNSHAPE_XREAL_UNARY(gamma, mpfr_gamma)
#undef MNSHAPE_XREAL_UNARY

  friend XReal floor(const XReal& x) {
    XReal r(x.bits());
    mpfr_floor(r.v_, x.v_);
    return r;
  }

  friend XReal pow(const XReal& x, const XReal& y) {
    XReal r(std::max(x.bits(), y.bits()));
    mpfr_pow(r.v_, x.v_, y.v_, MPFR_RNDN);
    return r;
  }
  friend XReal pow(const XReal& x, double y) {
    XReal e(x.bits());
    mpfr_set_d(e.v_, y, MPFR_RNDN);
    return pow(x, e);
  }
  friend XReal pow(const XReal& x, long y) {
    XReal r(x.bits());
    mpfr_pow_si(r.v_, x.v_, y, MPFR_RNDN);
    return r;
  }
  friend XReal pow(const XReal& x, int y) { return pow(x, static_cast<long>(y)); }

  friend std::ostream& operator<<(std::ostream& os, const XReal& x) { return os << x.sci(17); }

 private:
  explicit XReal(mpfr_prec_t bits) { mpfr_init2(v_, bits); }

  static std::partial_ordering to_ordering(int c) {
    if (c < 0) return std::partial_ordering::less;
    if (c > 0) return std::partial_ordering::greater;
    return std::partial_ordering::equivalent;
  }

  void assign(std::string_view text) {
    const std::string s(text);
    char* end = nullptr;
    mpfr_strtofr(v_, s.c_str(), &end, 10, MPFR_RNDN);
    if (s.empty() || end != s.c_str() + s.size()) {
      throw FormatError("not a decimal number: '" + s + "'");
    }
  }

  mpfr_t v_;
};

/// log10|x| as a double; handy for reporting condition-number decades.
inline double log10_abs(const XReal& x) { return log10(abs(x)).to_double(); }

}  // namespace mnshape
