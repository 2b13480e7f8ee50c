#pragma once

// Node sets: barycentric lattices on simplices, scattered 1-D nodes, uniform
// test grids, and fill distances.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mnshape/error.hpp"
#include "mnshape/mn_model.hpp"
#include "mnshape/scalar.hpp"

namespace mnshape {

using Point = std::vector<XReal>;

inline XReal squared_distance(const Point& a, const Point& b) {
  if (a.size() != b.size()) throw DomainError("points differ in dimension");
  if (a.empty()) throw DomainError("zero-dimensional point");
  XReal s = (a[0] - b[0]) * (a[0] - b[0]);
  for (std::size_t i = 1; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

inline XReal distance(const Point& a, const Point& b) { return sqrt(squared_distance(a, b)); }

enum class NodeKind { EvenSimplex, Scattered, UniformTest };

struct NodeSet {
  std::vector<Point> points;
  XReal fill_distance;
  NodeKind kind = NodeKind::UniformTest;
  int degree = 0;                     // EvenSimplex
  std::optional<std::uint64_t> seed;  // Scattered

  std::size_t size() const { return points.size(); }
  std::size_t dimension() const { return points.empty() ? 0 : points.front().size(); }
};

/// Throws DomainError when two points coincide.
inline void require_distinct(const std::vector<Point>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (squared_distance(pts[i], pts[j]).is_zero()) {
        throw DomainError("duplicate nodes at indices " + std::to_string(i) + " and " + std::to_string(j));
      }
    }
  }
}

class Simplex {
 public:
  explicit Simplex(std::vector<Point> vertices) : v_(std::move(vertices)) {
    const std::size_t n = v_.empty() ? 0 : v_.front().size();
    if (n == 0 || v_.size() != n + 1) throw DomainError("an n-simplex needs n+1 vertices in R^n");
    for (const auto& p : v_) {
      if (p.size() != n) throw DomainError("simplex vertices differ in dimension");
    }
    if (edge_determinant().is_zero()) throw DomainError("simplex vertices are affinely dependent");
  }

  /// The segment [a, b].
  static Simplex interval(const XReal& a, const XReal& b) { return Simplex({{a}, {b}}); }

  std::size_t dimension() const { return v_.size() - 1; }
  const std::vector<Point>& vertices() const { return v_; }

  XReal diameter() const {
    XReal best = squared_distance(v_[0], v_[1]);
    for (std::size_t i = 0; i < v_.size(); ++i) {
      for (std::size_t j = i + 1; j < v_.size(); ++j) {
        XReal d = squared_distance(v_[i], v_[j]);
        if (d > best) best = std::move(d);
      }
    }
    return sqrt(best);
  }

 private:
  // det[v1 - v0, ..., vn - v0] by elimination.
  XReal edge_determinant() const {
    const std::size_t n = dimension();
    std::vector<std::vector<XReal>> m(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) m[i].push_back(v_[i + 1][k] - v_[0][k]);
    }
    XReal det = XReal::integer(m[0][0].bits(), 1);
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < n; ++r) {
        if (abs(m[r][col]) > abs(m[piv][col])) piv = r;
      }
      if (m[piv][col].is_zero()) return XReal::integer(det.bits(), 0);
      if (piv != col) {
        std::swap(m[piv], m[col]);
        det = -det;
      }
      det *= m[col][col];
      for (std::size_t r = col + 1; r < n; ++r) {
        const XReal f = m[r][col] / m[col][col];
        for (std::size_t k = col; k < n; ++k) m[r][k] -= f * m[col][k];
      }
    }
    return det;
  }

  std::vector<Point> v_;
};

/// l = floor(2 / (3 C delta)) with C = max(2/(3 b0), 8 rho / c).
///
/// Evaluated in binary64 exactly as written: at (c >= 60, delta = 0.2) the
/// quotient rounds to 24.999..., giving the published lattice of 25 nodes.
inline int degree_from_delta(double c, const ProblemParams& p) {
  if (!(c > 0.0)) throw DomainError("degree_from_delta requires c > 0");
  if (!(p.delta > 0.0) || !(p.b0 > 0.0) || !(p.rho > 0.0)) {
    throw DomainError("delta, b0 and rho must be positive");
  }
  const double C = std::max(2.0 / (3.0 * p.b0), 8.0 * p.rho / c);
  const double q = 2.0 / (3.0 * C * p.delta);
  if (!(q >= 1.0)) {
    throw DegenerateDegree("floor(2/(3*C*delta)) < 1 at c=" + std::to_string(c) +
                           ", delta=" + std::to_string(p.delta));
  }
  if (q > static_cast<double>(std::numeric_limits<int>::max())) throw DomainError("degree overflows");
  return static_cast<int>(std::floor(q));
}

inline XReal degree_from_delta(const XReal& c, const ProblemParams& p) {
  return XReal::integer(c.bits(), degree_from_delta(c.to_double(), p));
}

namespace detail {

// Compositions of `total` into `parts` nonnegative parts, ascending lexicographic.
inline void compositions(int total, std::size_t parts, std::vector<int>& cur,
                         std::vector<std::vector<int>>& out) {
  if (cur.size() + 1 == parts) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = 0; k <= total; ++k) {
    cur.push_back(k);
    compositions(total - k, parts, cur, out);
    cur.pop_back();
  }
}

}  // namespace detail

inline std::vector<std::vector<int>> compositions(int total, std::size_t parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  if (parts == 0) return out;
  detail::compositions(total, parts, cur, out);
  return out;
}

/// Evenly spaced points of degree l: x = sum_i (k_i / l) v_i over k_1 + ... + k_{n+1} = l.
inline NodeSet barycentric_grid(const Simplex& s, int l) {
  if (l < 1) throw DegenerateDegree("lattice degree must be at least 1");
  const auto& v = s.vertices();
  const std::size_t n = s.dimension();
  const mpfr_prec_t bits = v[0][0].bits();
  NodeSet out;
  out.kind = NodeKind::EvenSimplex;
  out.degree = l;
  for (const auto& k : compositions(l, n + 1)) {
    Point x(n, XReal::integer(bits, 0));
    for (std::size_t i = 0; i <= n; ++i) {
      if (k[i] == 0) continue;
      for (std::size_t d = 0; d < n; ++d) x[d] += v[i][d] * k[i];
    }
    for (auto& xd : x) xd /= l;
    out.points.push_back(std::move(x));
  }
  out.fill_distance = s.diameter() / l;
  return out;
}

/// Counter-based generator: u_i = SplitMix64(seed + i * golden) mapped to [0, 1).
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits_at(std::uint64_t index) const {
    std::uint64_t z = seed_ + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform_at(std::uint64_t index) const {
    return static_cast<double>(bits_at(index) >> 11) * 0x1.0p-53;
  }

  double next() { return uniform_at(counter_++); }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

namespace detail {

// Number of full subintervals and whether a partial one remains. Ratios within
// 1e-9 of an integer count as integers so 5/0.2 is treated as exactly 25.
inline std::pair<long, bool> subinterval_count(double width, double delta) {
  const double ratio = width / delta;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) return {static_cast<long>(nearest), false};
  return {static_cast<long>(std::floor(ratio)), true};
}

}  // namespace detail

/// One node a_i + u_i delta per full subinterval of width delta, u_i in [0, 1);
/// b is appended when the last subinterval is partial.
inline NodeSet scattered_1d(double a, double b, double delta, std::uint64_t seed, const PrecisionContext& ctx) {
  if (!(delta > 0.0) || !(b - a > delta)) throw DomainError("scattered_1d needs 0 < delta < b - a");
  const auto [full, partial] = detail::subinterval_count(b - a, delta);
  RandomSource rng(seed);
  NodeSet out;
  out.kind = NodeKind::Scattered;
  out.seed = seed;
  const XReal xa(ctx, a);
  const XReal xd(ctx, delta);
  for (long i = 0; i < full; ++i) {
    out.points.push_back({xa + xd * (XReal(ctx, i) + rng.next())});
  }
  if (partial) out.points.push_back({XReal(ctx, b)});
  out.fill_distance = xd;
  return out;
}

/// count points with uniform spacing, both endpoints included.
inline NodeSet uniform_1d(double a, double b, int count, const PrecisionContext& ctx) {
  if (count < 2) throw DomainError("uniform_1d needs count >= 2");
  if (!(b > a)) throw DomainError("uniform_1d needs a < b");
  NodeSet out;
  out.kind = NodeKind::UniformTest;
  const XReal xa(ctx, a);
  const XReal h = (XReal(ctx, b) - xa) / (count - 1);
  for (int i = 0; i < count; ++i) {
    out.points.push_back({i == count - 1 ? XReal(ctx, b) : xa + h * i});
  }
  out.fill_distance = h / 2;
  return out;
}

/// max over probe points of the distance to the nearest node.
inline XReal fill_distance(const NodeSet& nodes, const NodeSet& probe) {
  if (nodes.points.empty() || probe.points.empty()) throw EmptySet("fill_distance needs nonempty sets");
  XReal worst = XReal::integer(nodes.points[0][0].bits(), 0);
  for (const auto& z : probe.points) {
    XReal nearest = squared_distance(z, nodes.points[0]);
    for (std::size_t j = 1; j < nodes.points.size(); ++j) {
      XReal d = squared_distance(z, nodes.points[j]);
      if (d < nearest) nearest = std::move(d);
    }
    if (nearest > worst) worst = std::move(nearest);
  }
  return sqrt(worst);
}

/// CSV `index,x1,...,xn`, preceded by a comment line carrying the seed for scattered sets.
inline void write_csv(std::ostream& os, const NodeSet& nodes) {
  if (nodes.seed) os << "# seed=" << *nodes.seed << '\n';
  os << "index";
  for (std::size_t d = 0; d < nodes.dimension(); ++d) os << ",x" << d + 1;
  os << '\n';
  for (std::size_t i = 0; i < nodes.points.size(); ++i) {
    os << i;
    for (const auto& x : nodes.points[i]) os << ',' << x.exact_string();
    os << '\n';
  }
}

}  // namespace mnshape
