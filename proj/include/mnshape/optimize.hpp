#pragma once

#include <cmath>
#include <utility>

namespace mnshape {

template <class Value>
struct ScalarMinimum {
  double x;
  Value value;
};

/// Golden-section search for a minimum of `f` on [lo, hi], stopping once the
/// bracket is narrower than `tol`. `f` may return any totally ordered value
/// type (double, XReal). The returned point is the best one evaluated, which
/// lets a monotone objective report its endpoint exactly.
template <class F>
auto golden_section_minimize(F&& f, double lo, double hi, double tol)
    -> ScalarMinimum<decltype(f(lo))> {
  using Value = decltype(f(lo));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

  ScalarMinimum<Value> best{lo, f(lo)};
  auto consider = [&](double x, const Value& v) {
    if (v < best.value) best = {x, v};
  };
  {
    Value fh = f(hi);
    consider(hi, fh);
  }

  double a = lo;
  double b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  Value f1 = f(x1);
  Value f2 = f(x2);
  consider(x1, f1);
  consider(x2, f2);

  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = std::move(f1);
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
      consider(x1, f1);
    } else {
      a = x1;
      x1 = x2;
      f1 = std::move(f2);
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
      consider(x2, f2);
    }
  }
  const double mid = 0.5 * (a + b);
  consider(mid, f(mid));
  return best;
}

}  // namespace mnshape
