#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "mnshape/rbf.hpp"

using namespace mnshape;

namespace {

const PrecisionContext kCtx(220);

ProblemParams baseline_params(double delta) {
  ProblemParams p;
  p.delta = delta;
  return p;
}

NodeSet even_nodes(double delta, double c, const PrecisionContext& ctx) {
  return barycentric_grid(Simplex::interval(XReal(ctx, 0), XReal(ctx, 5)), degree_from_delta(c, baseline_params(delta)));
}

std::vector<XReal> sinc_values(const NodeSet& nodes) {
  std::vector<XReal> v;
  for (const auto& x : nodes.points) v.push_back(sinc_target(x));
  return v;
}

XReal sinc_rms(const Interpolant& s, int n_t, const PrecisionContext& ctx) {
  return rms_error([](const Point& z) { return sinc_target(z); }, s, uniform_1d(0, 5, n_t, ctx));
}

NodeSet points_1d(const std::vector<const char*>& xs, const PrecisionContext& ctx) {
  NodeSet n;
  for (const char* x : xs) n.points.push_back({XReal(ctx, x)});
  return n;
}

XReal pow10(long e, const PrecisionContext& ctx) { return pow(XReal(ctx, 10), e); }

long kappa_decades(const XReal& cond) { return static_cast<long>(std::ceil(log10_abs(cond))); }

// Leibniz expansion; independent of elimination.
XReal leibniz_det(const Matrix<XReal>& m) {
  const std::size_t n = m.rows();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  XReal total = m(0, 0) * 0;
  do {
    int inversions = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) inversions += perm[i] > perm[j];
    }
    XReal term = m(0, perm[0]);
    for (std::size_t i = 1; i < n; ++i) term *= m(i, perm[i]);
    total += inversions % 2 ? -term : term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

std::vector<XReal> cramer(const Matrix<XReal>& m, const std::vector<XReal>& b) {
  const XReal det = leibniz_det(m);
  std::vector<XReal> x;
  for (std::size_t k = 0; k < m.cols(); ++k) {
    Matrix<XReal> mk = m;
    for (std::size_t i = 0; i < m.rows(); ++i) mk(i, k) = b[i];
    x.push_back(leibniz_det(mk) / det);
  }
  return x;
}

}  // namespace

TEST(KernelEval, Examples) {
  const XReal zero(kCtx, 0);
  const XReal c2(kCtx, 3600);
  EXPECT_LT(abs(kernel_eval({-1.0, 60.0, false}, zero) - XReal(kCtx, 1) / 60), pow10(-215, kCtx));
  EXPECT_LT(abs(kernel_eval({-1.0, 60.0, false}, c2 * 3) - XReal(kCtx, 1) / 120), pow10(-215, kCtx));
  EXPECT_EQ(kernel_eval({1.0, 1.0, false}, zero), -1.0);
}

TEST(KernelEval, SignConventionAndPrefactor) {
  const XReal r2(kCtx, 3);
  // beta = 3: (-1)^2 (1 + 3)^(3/2) = 8.
  EXPECT_LT(abs(kernel_eval({3.0, 1.0, false}, r2) - 8), pow10(-215, kCtx));
  // beta = 1.5: (-1)^1 4^(3/4).
  EXPECT_LT(abs(kernel_eval({1.5, 1.0, false}, r2) + pow(XReal(kCtx, 4), XReal(kCtx, "0.75"))), pow10(-215, kCtx));
  // beta = -1 with Gamma(1/2) = sqrt(pi).
  const XReal want = sqrt(XReal::pi(kCtx)) / 60;
  EXPECT_LT(abs(kernel_eval({-1.0, 60.0, true}, XReal(kCtx, 0)) - want), pow10(-215, kCtx));
  // beta = 1 with Gamma(-1/2) = -2 sqrt(pi).
  EXPECT_LT(abs(kernel_eval({1.0, 1.0, true}, XReal(kCtx, 0)) + 2 * sqrt(XReal::pi(kCtx))), pow10(-215, kCtx));
  // beta = -3 fast path equals the general power.
  const XReal general = pow(XReal(kCtx, 4), XReal(kCtx, "-1.5"));
  EXPECT_LT(abs(kernel_eval({-3.0, 1.0, false}, r2) - general), pow10(-215, kCtx));
  EXPECT_THROW(kernel_eval({-1.0, 1.0, false}, XReal(kCtx, -1)), DomainError);
}

TEST(CpdOrder, Examples) {
  EXPECT_EQ(cpd_order(-1.0), 0);
  EXPECT_EQ(cpd_order(1.0), 1);
  EXPECT_EQ(cpd_order(3.0), 2);
  EXPECT_EQ(cpd_order(0.5), 1);
  EXPECT_EQ(cpd_order(-5.0), 0);
  EXPECT_THROW(cpd_order(2.0), DomainError);
  EXPECT_THROW(cpd_order(0.0), DomainError);
}

TEST(MonomialExponents, LexicographicUpToDegree) {
  const auto e = monomial_exponents(2, 1);
  EXPECT_EQ(e, (std::vector<std::vector<int>>{{0, 0}, {0, 1}, {1, 0}}));
  EXPECT_TRUE(monomial_exponents(3, -1).empty());
  EXPECT_EQ(monomial_exponents(3, 2).size(), 10u);
}

TEST(Assemble, InverseMultiquadricHasNoPolynomialBlock) {
  const auto nodes = even_nodes(0.32, 60, kCtx);
  const auto sys = assemble(nodes, sinc_values(nodes), {-1.0, 60.0, false}, kCtx);
  EXPECT_EQ(sys.matrix.rows(), nodes.size());
  EXPECT_TRUE(sys.monomials.empty());
}

TEST(Assemble, SingleCenter) {
  const auto nodes = points_1d({"2"}, kCtx);
  const auto sys = assemble(nodes, {XReal(kCtx, 7)}, {-1.0, 4.0, false}, kCtx);
  ASSERT_EQ(sys.matrix.rows(), 1u);
  EXPECT_EQ(sys.matrix(0, 0), 0.25);
}

TEST(Assemble, ExactSymmetry) {
  const auto nodes = scattered_1d(0, 5, 0.3, 4, kCtx);
  const auto sys = assemble(nodes, sinc_values(nodes), {1.0, 7.0, false}, kCtx);
  for (std::size_t i = 0; i < sys.matrix.rows(); ++i) {
    for (std::size_t j = 0; j < sys.matrix.cols(); ++j) EXPECT_EQ(sys.matrix(i, j), sys.matrix(j, i));
  }
  const std::size_t n = nodes.size();
  EXPECT_EQ(sys.matrix.rows(), n + 1);
  EXPECT_TRUE(sys.matrix(n, n).is_zero());
}

TEST(Assemble, Errors) {
  const auto one = points_1d({"1"}, kCtx);
  EXPECT_THROW(assemble(one, {XReal(kCtx, 1)}, {3.0, 1.0, false}, kCtx), NotDetermining);
  const auto dup = points_1d({"1", "2", "1"}, kCtx);
  EXPECT_THROW(assemble(dup, sinc_values(dup), {-1.0, 1.0, false}, kCtx), DomainError);
  EXPECT_THROW(assemble(one, {}, {-1.0, 1.0, false}, kCtx), DomainError);
  EXPECT_THROW(assemble(one, {XReal(kCtx, 1)}, {-1.0, 0.0, false}, kCtx), DomainError);
}

TEST(Solve, IdentitySystem) {
  LinearSystem sys;
  sys.centers = points_1d({"0", "1", "2"}, kCtx);
  sys.matrix = Matrix<XReal>::identity(3, XReal(kCtx, 0), XReal(kCtx, 1));
  sys.rhs = {XReal(kCtx, 4), XReal(kCtx, -1), XReal(kCtx, "0.5")};
  const auto [s, report] = solve(sys, kCtx);
  EXPECT_EQ(s.rbf_coeffs, sys.rhs);
  EXPECT_EQ(report.condition_number, 1.0);
  EXPECT_TRUE(report.residual_norm.is_zero());
  EXPECT_EQ(report.digits_used, 220u);
}

TEST(Solve, Delta032ConditionAndRms) {
  const auto nodes = even_nodes(0.32, 60, kCtx);
  ASSERT_EQ(nodes.size(), 16u);
  const auto [s, report] = solve(assemble(nodes, sinc_values(nodes), {-1.0, 60.0, false}, kCtx), kCtx);
  const double cond = log10_abs(report.condition_number);
  EXPECT_GE(cond, 44.5);
  EXPECT_LE(cond, 50.5);
  EXPECT_NEAR(cond, std::log10(9.4e47), 3.0);
  EXPECT_NEAR(log10_abs(sinc_rms(s, 150, kCtx)), std::log10(4.7e-13), 2.0);
  EXPECT_GE(report.condition_number, 1.0);
}

TEST(Solve, Delta044Condition) {
  const auto nodes = even_nodes(0.44, 60, kCtx);
  ASSERT_EQ(nodes.size(), 12u);
  const auto [s, report] = solve(assemble(nodes, sinc_values(nodes), {-1.0, 60.0, false}, kCtx), kCtx);
  EXPECT_NEAR(log10_abs(report.condition_number), std::log10(1.1e35), 3.0);
  EXPECT_EQ(condition_number(assemble(nodes, sinc_values(nodes), {-1.0, 60.0, false}, kCtx).matrix, kCtx),
            report.condition_number);
}

TEST(Solve, EscalationAgreement) {
  const PrecisionContext hi(300);
  const auto nodes = even_nodes(0.2, 60, kCtx);
  const auto [a, ra] = solve(assemble(nodes, sinc_values(nodes), {-1.0, 60.0, false}, kCtx), kCtx);
  const auto [b, rb] = solve(assemble(nodes, sinc_values(nodes), {-1.0, 60.0, false}, hi), hi);
  const long kd = kappa_decades(ra.condition_number);
  const XReal scale = norm_inf(b.rbf_coeffs);
  for (std::size_t i = 0; i < a.rbf_coeffs.size(); ++i) {
    EXPECT_LE(abs(a.rbf_coeffs[i] - b.rbf_coeffs[i]) / scale, pow10(-220 + kd + 20, hi)) << i;
  }
}

TEST(Solve, InterpolationExactnessAtCenters) {
  for (double delta : {0.44, 0.2, 0.12}) {
    const auto nodes = even_nodes(delta, 60, kCtx);
    const auto values = sinc_values(nodes);
    const auto [s, report] = solve(assemble(nodes, values, {-1.0, 60.0, false}, kCtx), kCtx);
    const XReal bound = pow10(-220 + kappa_decades(report.condition_number) + 15, kCtx);
    for (std::size_t j = 0; j < nodes.size(); ++j) EXPECT_LE(abs(evaluate(s, nodes.points[j]) - values[j]), bound);
  }
}

TEST(Solve, ZeroDataGivesZeroInterpolant) {
  const auto nodes = even_nodes(0.44, 40, kCtx);
  const std::vector<XReal> zeros(nodes.size(), XReal(kCtx, 0));
  const auto [s, report] = solve(assemble(nodes, zeros, {1.0, 40.0, false}, kCtx), kCtx);
  for (const auto& c : s.rbf_coeffs) EXPECT_TRUE(c.is_zero());
  for (const auto& c : s.poly_coeffs) EXPECT_TRUE(c.is_zero());
  EXPECT_TRUE(evaluate(s, {XReal(kCtx, "1.234")}).is_zero());
}

TEST(Solve, MultiquadricReproducesConstants) {
  const auto nodes = points_1d({"0", "0.7", "1.9", "3.2", "5"}, kCtx);
  const std::vector<XReal> values(5, XReal(kCtx, "2.5"));
  const auto [s, report] = solve(assemble(nodes, values, {1.0, 2.0, false}, kCtx), kCtx);
  ASSERT_EQ(s.poly_coeffs.size(), 1u);
  for (const char* x : {"0.1", "2.5", "4.99", "-1"}) {
    EXPECT_LT(abs(evaluate(s, {XReal(kCtx, x)}) - XReal(kCtx, "2.5")), pow10(-200, kCtx)) << x;
  }
}

TEST(Solve, MomentConditions) {
  for (double beta : {1.0, 3.0, 5.0}) {
    const auto nodes = scattered_1d(0, 5, 0.5, 8, kCtx);
    const auto [s, report] = solve(assemble(nodes, sinc_values(nodes), {beta, 3.0, false}, kCtx), kCtx);
    const XReal bound = pow10(-220 + kappa_decades(report.condition_number) + 15, kCtx);
    ASSERT_EQ(s.poly_coeffs.size(), static_cast<std::size_t>(cpd_order(beta)));
    for (const auto& q : s.monomials) {
      XReal moment(kCtx, 0);
      for (std::size_t j = 0; j < nodes.size(); ++j) moment += s.rbf_coeffs[j] * monomial(nodes.points[j], q);
      EXPECT_LE(abs(moment), bound) << beta;
    }
  }
}

TEST(Solve, PermutationInvariance) {
  const auto nodes = scattered_1d(0, 5, 0.4, 21, kCtx);
  auto values = sinc_values(nodes);
  const KernelSpec k{-1.0, 30.0, false};
  const auto [s1, r1] = solve(assemble(nodes, values, k, kCtx), kCtx);
  NodeSet shuffled = nodes;
  std::reverse(shuffled.points.begin(), shuffled.points.end());
  std::swap(shuffled.points[2], shuffled.points[7]);
  const auto [s2, r2] = solve(assemble(shuffled, sinc_values(shuffled), k, kCtx), kCtx);
  const XReal bound = pow10(-220 + kappa_decades(r1.condition_number) + 15, kCtx);
  for (const char* x : {"0.05", "1.3", "2.71", "4.4", "5"}) {
    EXPECT_LE(abs(evaluate(s1, {XReal(kCtx, x)}) - evaluate(s2, {XReal(kCtx, x)})), bound) << x;
  }
}

TEST(Solve, SmallSystemsMatchCramer) {
  const PrecisionContext ctx(100);
  const std::vector<std::vector<const char*>> sets{{"0.3"}, {"0", "1.5"}, {"0", "1", "3.5"}, {"0.2", "1", "2.2", "4.9"}};
  for (double beta : {-1.0, 1.0}) {
    for (const auto& xs : sets) {
      const auto nodes = points_1d(xs, ctx);
      const auto sys = assemble(nodes, sinc_values(nodes), {beta, 2.5, false}, ctx);
      if (sys.matrix.rows() > 5) continue;
      const auto want = cramer(sys.matrix, sys.rhs);
      const auto [s, report] = solve(sys, ctx);
      std::vector<XReal> got = s.rbf_coeffs;
      got.insert(got.end(), s.poly_coeffs.begin(), s.poly_coeffs.end());
      const XReal scale = norm_inf(want);
      for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_LE(abs(got[i] - want[i]) / scale, pow10(-100 + 20, ctx)) << beta << ' ' << xs.size();
      }
    }
  }
}

TEST(Solve, SingularMatrixAtInsufficientPrecision) {
  const PrecisionContext low(50);
  const auto nodes = even_nodes(0.06, 170, low);
  EXPECT_THROW(solve(assemble(nodes, sinc_values(nodes), {-1.0, 170.0, false}, low), low), SingularMatrix);
}

TEST(RmsError, BasicProperties) {
  const auto nodes = even_nodes(0.44, 60, kCtx);
  const auto [s, report] = solve(assemble(nodes, sinc_values(nodes), {-1.0, 60.0, false}, kCtx), kCtx);
  EXPECT_LT(rms_error([](const Point& z) { return sinc_target(z); }, s, nodes), pow10(-150, kCtx));
  Interpolant zero = s;
  for (auto& c : zero.rbf_coeffs) c = XReal(kCtx, 0);
  const XReal e(kCtx, "0.125");
  EXPECT_EQ(rms_error([&](const Point&) { return e; }, zero, uniform_1d(0, 5, 17, kCtx)), 0.125);
  EXPECT_THROW(rms_error([&](const Point&) { return e; }, zero, NodeSet{}), EmptySet);
}

TEST(SincTarget, Values) {
  EXPECT_EQ(sinc_target(XReal(kCtx, 0)), 1.0);
  EXPECT_LT(abs(sinc_target(XReal::pi(kCtx))), pow10(-215, kCtx));
  using D = boost::multiprecision::cpp_dec_float_50;
  const D oracle = boost::multiprecision::sin(D(1));
  const PrecisionContext c50(50);
  EXPECT_LT(abs(sinc_target(XReal(c50, 1)) - XReal(c50, oracle.str(50, std::ios::scientific))), XReal(c50, "1e-45"));
  EXPECT_NEAR(sinc_target(XReal(kCtx, 1)).to_double(), 0.841470984807897, 1e-15);
  const XReal tiny = pow10(-100, kCtx);
  EXPECT_LT(abs(sinc_target(tiny) - (1 - tiny * tiny / 6)), pow10(-215, kCtx));
  EXPECT_EQ(sinc_target(XReal(kCtx, "-0.5")), sinc_target(XReal(kCtx, "0.5")));
}

TEST(Serialization, RoundTripPreservesEvaluation) {
  const auto nodes = even_nodes(0.32, 60, kCtx);
  const auto [s, report] = solve(assemble(nodes, sinc_values(nodes), {-1.0, 60.0, false}, kCtx), kCtx);
  std::stringstream ss;
  write_interpolant(ss, s);
  const Interpolant back = read_interpolant(ss);
  EXPECT_EQ(back.kernel.c, 60.0);
  EXPECT_EQ(back.solve_digits, 220u);
  ASSERT_EQ(back.rbf_coeffs.size(), s.rbf_coeffs.size());
  for (std::size_t i = 0; i < s.rbf_coeffs.size(); ++i) EXPECT_EQ(back.rbf_coeffs[i], s.rbf_coeffs[i]);
  EXPECT_EQ(sinc_rms(back, 150, kCtx), sinc_rms(s, 150, kCtx));
}

TEST(Serialization, RoundTripWithPolynomial) {
  const auto nodes = scattered_1d(0, 5, 0.5, 3, kCtx);
  const auto [s, report] = solve(assemble(nodes, sinc_values(nodes), {3.0, 1.5, false}, kCtx), kCtx);
  std::stringstream ss;
  write_interpolant(ss, s);
  const Interpolant back = read_interpolant(ss);
  ASSERT_EQ(back.poly_coeffs.size(), 2u);
  EXPECT_EQ(evaluate(back, {XReal(kCtx, "2.2")}), evaluate(s, {XReal(kCtx, "2.2")}));
}

TEST(Serialization, RejectsMalformedInput) {
  std::stringstream bad("not-an-interpolant 1\n");
  EXPECT_THROW(read_interpolant(bad), FormatError);
  std::stringstream version("mnshape-interpolant 9\n");
  EXPECT_THROW(read_interpolant(version), FormatError);
  std::stringstream truncated("mnshape-interpolant 1\nbeta -1\nc 60\n");
  EXPECT_THROW(read_interpolant(truncated), FormatError);
}
