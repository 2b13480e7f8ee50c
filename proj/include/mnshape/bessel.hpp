#pragma once

// Modified Bessel function of the second kind, order zero, at the working
// precision of its argument.

#include "mnshape/error.hpp"
#include "mnshape/scalar.hpp"

namespace mnshape {

namespace detail {

// Intermediate width used inside the K0 kernels; covers the mild cancellation
// between the logarithmic and harmonic sums near x = 2.
inline constexpr mpfr_prec_t kBesselExtraBits = 40;

// |term| < 2^-bits * |sum|
inline bool below_ulp(const XReal& term, const XReal& sum, mpfr_prec_t bits) {
  if (term.is_zero()) return true;
  if (sum.is_zero()) return false;
  return mpfr_get_exp(term.get()) < mpfr_get_exp(sum.get()) - bits;
}

}  // namespace detail

/// Ascending series
///   K0(x) = -(ln(x/2) + gamma) I0(x) + sum_{k>=1} (x^2/4)^k / (k!)^2 * H_k.
/// Converges for every x > 0 but cancels for large x; used for x <= 2.
inline XReal bessel_k0_series(const XReal& x) {
  if (!(x > 0.0)) throw DomainError("K0 requires x > 0");
  const mpfr_prec_t bits = x.bits() + detail::kBesselExtraBits;
  const XReal xw = XReal::with_bits(bits, x);
  const XReal q = xw * xw / 4;

  XReal term = XReal::integer(bits, 1);
  XReal harmonic = XReal::integer(bits, 0);
  XReal i0 = term;
  XReal tail = harmonic;
  for (long k = 1;; ++k) {
    term = term * q / (k * k);
    harmonic += 1 / XReal::integer(bits, k);
    const XReal weighted = term * harmonic;
    i0 += term;
    tail += weighted;
    if (detail::below_ulp(weighted, tail, bits) && detail::below_ulp(term, i0, bits)) break;
  }
  const XReal result = tail - (log(xw / 2) + XReal::euler_gamma(bits)) * i0;
  return XReal::with_bits(x.bits(), result);
}

/// Steed/Temme continued fraction for K0, valid for x >= 2 (converges faster
/// as x grows).
inline XReal bessel_k0_continued_fraction(const XReal& x) {
  if (!(x >= 2.0)) throw DomainError("K0 continued fraction requires x >= 2");
  const mpfr_prec_t bits = x.bits() + detail::kBesselExtraBits;
  const XReal xw = XReal::with_bits(bits, x);
  const XReal one = XReal::integer(bits, 1);

  // Order zero: a1 = 1/4 - nu^2 = 1/4.
  XReal b = (xw + 1) * 2;
  XReal d = one / b;
  XReal delh = d;
  XReal q1 = XReal::integer(bits, 0);
  XReal q2 = one;
  const XReal a1 = one / 4;
  XReal q = a1;
  XReal c = a1;
  XReal a = -a1;
  XReal s = one + q * delh;

  constexpr long kMaxIterations = 10'000'000;
  for (long i = 1; i < kMaxIterations; ++i) {
    a -= 2 * i;
    c = -(a * c) / (i + 1);
    const XReal qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2;
    d = one / (b + a * d);
    delh = (b * d - 1) * delh;
    const XReal dels = q * delh;
    s += dels;
    if (detail::below_ulp(dels, s, bits)) {
      const XReal result = sqrt(XReal::pi(bits) / (2 * xw)) * exp(-xw) / s;
      return XReal::with_bits(x.bits(), result);
    }
  }
  throw NumericalError("K0 continued fraction failed to converge");
}

/// K0(x) for x > 0: ascending series up to x = 2, continued fraction above.
inline XReal bessel_k0(const XReal& x) {
  if (!(x > 0.0)) throw DomainError("K0 requires x > 0, got " + x.sci(6));
  return x <= 2.0 ? bessel_k0_series(x) : bessel_k0_continued_fraction(x);
}

}  // namespace mnshape
