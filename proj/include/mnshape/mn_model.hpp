#pragma once

// The MN(c) cost function of the (inverse) multiquadric error bound and the
// search for its minimizer, the predicted optimal shape parameter.
//
// Everything is evaluated in log space: ln MN(c) is a sum of logarithmic
// terms, so e^(c sigma / 2) never overflows.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "mnshape/bessel.hpp"
#include "mnshape/error.hpp"
#include "mnshape/optimize.hpp"
#include "mnshape/scalar.hpp"

namespace mnshape {

struct ProblemParams {
  int n = 1;
  double beta = -1.0;
  double sigma = 1.0;
  double b0 = 5.0;
  double delta = 0.2;
  double rho = 1.0;
  // Scales the error bound only; never moves the minimizer.
  double delta0 = 1.0;

  double c_min() const { return 24.0 * rho * delta; }
  // c_min() rounds in binary64 (24 * 0.2 > 4.8); values within this relative
  // slack of it count as inside the domain.
  bool below_domain(double c) const { return c < c_min() * (1.0 - 1e-12); }
  double c_break() const { return 12.0 * rho * b0; }
};

enum class CaseTag { CaseI, CaseII, CaseIII };

inline const char* to_string(CaseTag t) {
  switch (t) {
    case CaseTag::CaseI: return "I";
    case CaseTag::CaseII: return "II";
    case CaseTag::CaseIII: return "III";
  }
  return "?";
}

/// Piece of the two-branch definition: Lower is [24 rho delta, 12 rho b0),
/// Upper is [12 rho b0, inf).
enum class MnBranch { Lower, Upper };

inline const char* to_string(MnBranch b) { return b == MnBranch::Lower ? "lower" : "upper"; }

/// True when beta is one of 0, 2, 4, ...
inline bool is_even_nonnegative_integer(double beta) {
  return beta >= 0.0 && std::floor(beta) == beta && std::fmod(beta, 2.0) == 0.0;
}

inline CaseTag classify_case(int n, double beta) {
  if (n < 1) throw DomainError("dimension must be a positive integer");
  if (!std::isfinite(beta) || is_even_nonnegative_integer(beta)) {
    throw DomainError("beta must be real and not in {0, 2, 4, ...}");
  }
  if (beta == -1.0 && n == 1) return CaseTag::CaseIII;
  if (beta > 0.0) return CaseTag::CaseI;
  const double s = n + beta;
  if (s >= 1.0 || s == -1.0) return CaseTag::CaseII;
  throw UnsupportedCase("no MN function covers n=" + std::to_string(n) +
                        ", beta=" + std::to_string(beta) +
                        " (needs beta>0, n+beta>=1, n+beta=-1, or beta=-1 with n=1)");
}

inline void validate(const ProblemParams& p) {
  classify_case(p.n, p.beta);
  if (!(p.sigma > 0.0)) throw DomainError("sigma must be positive");
  if (!(p.b0 > 0.0)) throw DomainError("b0 must be positive");
  if (!(p.delta > 0.0)) throw DomainError("delta must be positive");
  if (!(p.rho > 0.0)) throw DomainError("rho must be positive");
  if (!(p.delta0 > 0.0)) throw DomainError("delta0 must be positive");
  if (!(p.delta < p.b0 / 2.0)) throw DomainError("delta must be smaller than b0/2");
}

namespace detail {

inline XReal lit(const XReal& like, double v) { return XReal::from_double(like.bits(), v); }

inline XReal ln_two_thirds(mpfr_prec_t bits) {
  return log(XReal::integer(bits, 2) / XReal::integer(bits, 3));
}

/// K0(1), memoized per mantissa width and thread.
inline const XReal& k0_at_one(mpfr_prec_t bits) {
  thread_local std::map<mpfr_prec_t, XReal> cache;
  auto it = cache.find(bits);
  if (it == cache.end()) it = cache.emplace(bits, bessel_k0(XReal::integer(bits, 1))).first;
  return it->second;
}

inline void require_in_domain(const XReal& c, const ProblemParams& p) {
  if (!(c >= p.c_min() * (1.0 - 1e-12))) {
    throw DomainError("c = " + c.sci(8) + " lies below 24*rho*delta = " + std::to_string(p.c_min()));
  }
}

}  // namespace detail

/// M(c) = 1/sqrt(K0(1)) for c <= 1/sigma, else (1/K0(1) + 2 sqrt(3) sqrt(c sigma) e^(c sigma))^(1/2).
inline XReal m_factor(const XReal& c, const XReal& sigma) {
  if (!(c > 0.0) || !(sigma > 0.0)) throw DomainError("M(c) requires c > 0 and sigma > 0");
  const mpfr_prec_t bits = std::max(c.bits(), sigma.bits());
  const XReal& k0 = detail::k0_at_one(bits);
  if (c <= 1 / sigma) return 1 / sqrt(k0);
  const XReal cs = c * sigma;
  return sqrt(1 / k0 + 2 * sqrt(XReal::integer(bits, 3)) * sqrt(cs) * exp(cs));
}

/// ln M(c), without ever forming e^(c sigma).
inline XReal log_m_factor(const XReal& c, const XReal& sigma) {
  if (!(c > 0.0) || !(sigma > 0.0)) throw DomainError("M(c) requires c > 0 and sigma > 0");
  const mpfr_prec_t bits = std::max(c.bits(), sigma.bits());
  const XReal& k0 = detail::k0_at_one(bits);
  if (c <= 1 / sigma) return -log(k0) / 2;
  const XReal cs = c * sigma;
  // ln(a + b e^t) = t + ln(b + a e^-t)
  return (cs + log(2 * sqrt(XReal::integer(bits, 3)) * sqrt(cs) + exp(-cs) / k0)) / 2;
}

/// ln MN(c) of the requested branch formula, evaluated at c regardless of
/// which side of 12 rho b0 c lies on. Used for one-sided limits.
inline XReal log_mn_branch(const XReal& c, const ProblemParams& p, MnBranch branch) {
  const CaseTag tag = classify_case(p.n, p.beta);
  const XReal rho = detail::lit(c, p.rho);
  const XReal delta = detail::lit(c, p.delta);
  const XReal b0 = detail::lit(c, p.b0);
  const XReal sigma = detail::lit(c, p.sigma);
  const XReal beta = detail::lit(c, p.beta);
  const XReal ln23 = detail::ln_two_thirds(c.bits());
  const XReal ln_c = log(c);

  XReal out;
  if (tag == CaseTag::CaseIII) {
    if (branch == MnBranch::Lower) {
      out = log(8 * rho) / 2 + (beta - 1) / 2 * ln_c + c / (24 * delta * rho) * ln23;
    } else {
      out = log(2 / (3 * b0)) / 2 + beta / 2 * ln_c + b0 / (2 * delta) * ln23;
    }
    return out + log_m_factor(c, sigma);
  }
  if (branch == MnBranch::Lower) {
    out = log(8 * rho) / 2 + (beta - 1 - p.n) / 4 * ln_c + c * sigma / 2 +
          c / (24 * delta * rho) * ln23;
  } else {
    out = log(2 / (3 * b0)) / 2 + (1 + beta - p.n) / 4 * ln_c + c * sigma / 2 +
          b0 / (2 * delta) * ln23;
  }
  return out;
}

inline MnBranch branch_of(const XReal& c, const ProblemParams& p) {
  return c < p.c_break() ? MnBranch::Lower : MnBranch::Upper;
}

/// ln MN(c) for cases I and II.
inline XReal log_mn_general(const XReal& c, const ProblemParams& p) {
  if (classify_case(p.n, p.beta) == CaseTag::CaseIII) {
    throw DomainError("log_mn_general does not apply to beta=-1, n=1");
  }
  detail::require_in_domain(c, p);
  return log_mn_branch(c, p, branch_of(c, p));
}

/// ln MN(c) for case III (beta = -1, n = 1).
inline XReal log_mn_case3(const XReal& c, const ProblemParams& p) {
  if (classify_case(p.n, p.beta) != CaseTag::CaseIII) {
    throw DomainError("log_mn_case3 applies only to beta=-1, n=1");
  }
  detail::require_in_domain(c, p);
  return log_mn_branch(c, p, branch_of(c, p));
}

/// ln MN(c), dispatching on the parameter case.
inline XReal log_mn(const XReal& c, const ProblemParams& p) {
  return classify_case(p.n, p.beta) == CaseTag::CaseIII ? log_mn_case3(c, p) : log_mn_general(c, p);
}

/// Logarithm of the c-dependent part of the error bound including sqrt(Delta0).
/// Differs from log_mn by a constant.
inline XReal log_error_bound(const XReal& c, const ProblemParams& p) {
  return log_mn(c, p) + log(detail::lit(c, p.delta0)) / 2;
}

struct SearchConfig {
  double c_max = 0.0;  // <= 0 selects 40 rho b0
  double tol_c = 1e-6;
  double eps_flat = std::log(10.0);
  double w_max = 0.0;  // <= 0 selects (12 rho b0 - 24 rho delta) / 2
  int scan_points = 2000;
  unsigned digits = 60;
};

struct MNSample {
  double c;
  XReal log_mn;
};

struct PredictionResult {
  double c_star = 0.0;
  XReal log_mn_star;
  MnBranch branch = MnBranch::Lower;
  // c_star sits at 12 rho b0 but the minimum is the lower branch's left limit.
  bool left_limit = false;
  double flat_lo = 0.0;
  double flat_hi = 0.0;
  double flat_bottom_width = 0.0;
  double w_max = 0.0;
  double c_max = 0.0;
  bool reliable = true;
};

namespace detail {

struct Piece {
  double lo;
  double hi;
  MnBranch branch;
};

// Stationary points of the log-linear-plus-power pieces, where one exists in closed form.
inline std::vector<double> stationary_candidates(const ProblemParams& p) {
  const double slope23 = std::log(2.0 / 3.0) / (24.0 * p.delta * p.rho);
  std::vector<double> out;
  auto push = [&](double power, double linear) {
    if (linear != 0.0) {
      const double c = -power / linear;
      if (c > 0.0 && std::isfinite(c)) out.push_back(c);
    }
  };
  if (classify_case(p.n, p.beta) == CaseTag::CaseIII) {
    // Only the c <= 1/sigma stretch, where M(c) is constant.
    push((p.beta - 1.0) / 2.0, slope23);
  } else {
    push((p.beta - 1.0 - p.n) / 4.0, p.sigma / 2.0 + slope23);
    push((1.0 + p.beta - p.n) / 4.0, p.sigma / 2.0);
  }
  return out;
}

}  // namespace detail

/// Minimizes ln MN(c) over [24 rho delta, c_max].
///
/// Candidates are the closed-form stationary points, the interval ends and
/// both one-sided values at 12 rho b0, plus a uniform scan of each smooth
/// piece; the best scan point is then polished by golden-section search.
inline PredictionResult predict_c(const ProblemParams& p, const SearchConfig& cfg = {}) {
  validate(p);
  const PrecisionContext ctx(cfg.digits);
  const CaseTag tag = classify_case(p.n, p.beta);
  const double c_lo = p.c_min();
  const double c_break = p.c_break();

  // The objective is the whole bound ln(sqrt(Delta0) MN); the constant offset
  // must not move the minimizer.
  const XReal offset = log(XReal(ctx, p.delta0)) / 2;
  auto eval = [&](double c, MnBranch branch) {
    return log_mn_branch(XReal(ctx, c), p, branch) + offset;
  };
  auto eval_true = [&](double c) { return log_error_bound(XReal(ctx, c), p); };

  double c_hi = cfg.c_max > 0.0 ? cfg.c_max : 40.0 * p.rho * p.b0;
  if (!(c_hi > c_lo)) throw DomainError("c_max must exceed 24*rho*delta");
  // The upper end must sit where ln MN is increasing, otherwise the finite
  // search interval could cut off the minimum.
  for (int i = 0; i < 30; ++i) {
    const double probe = c_hi * (1.0 - 1e-6);
    if (probe > c_lo && eval_true(c_hi) > eval_true(probe)) break;
    c_hi *= 2.0;
  }

  std::vector<double> cuts{c_lo};
  if (tag == CaseTag::CaseIII && 1.0 / p.sigma > c_lo && 1.0 / p.sigma < std::min(c_break, c_hi)) {
    cuts.push_back(1.0 / p.sigma);
  }
  if (c_break > c_lo && c_break < c_hi) cuts.push_back(c_break);
  cuts.push_back(c_hi);

  std::vector<detail::Piece> pieces;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const MnBranch br = cuts[i] < c_break ? MnBranch::Lower : MnBranch::Upper;
    pieces.push_back({cuts[i], cuts[i + 1], br});
  }

  struct Best {
    double c;
    XReal value;
    MnBranch branch;
    bool left_limit;
  };
  std::vector<Best> candidates;

  const int per_piece = std::max(16, cfg.scan_points / static_cast<int>(pieces.size()));
  for (const auto& piece : pieces) {
    std::vector<XReal> values;
    std::vector<double> xs;
    for (int i = 0; i <= per_piece; ++i) {
      const double c = i == per_piece ? piece.hi : piece.lo + (piece.hi - piece.lo) * i / per_piece;
      xs.push_back(c);
      values.push_back(eval(c, piece.branch));
    }
    std::size_t k = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
      if (values[i] < values[k]) k = i;
    }
    const double lo = xs[k == 0 ? 0 : k - 1];
    const double hi = xs[std::min(k + 1, xs.size() - 1)];
    auto refined = golden_section_minimize([&](double c) { return eval(c, piece.branch); }, lo, hi,
                                           cfg.tol_c);
    const bool at_break = piece.branch == MnBranch::Lower && refined.x == c_break;
    candidates.push_back({refined.x, refined.value, piece.branch, at_break});
    for (double s : detail::stationary_candidates(p)) {
      if (s >= piece.lo && s <= piece.hi) candidates.push_back({s, eval(s, piece.branch), piece.branch, false});
    }
  }

  auto best = std::min_element(candidates.begin(), candidates.end(),
                               [](const Best& a, const Best& b) { return a.value < b.value; });

  PredictionResult r;
  r.c_star = best->c;
  r.log_mn_star = best->value;
  r.branch = best->branch;
  r.left_limit = best->left_limit;
  r.c_max = c_hi;
  if (r.left_limit) {
    // MN is continuous at 12 rho b0 unless the parameters break the branch
    // match; report the attained value when it is no worse.
    XReal attained = eval_true(c_break);
    if (!(attained > r.log_mn_star)) {
      r.log_mn_star = std::move(attained);
      r.branch = MnBranch::Upper;
      r.left_limit = false;
    }
  }

  // Flat bottom: the connected stretch around c_star within eps_flat of the minimum.
  const XReal threshold = r.log_mn_star + cfg.eps_flat;
  const double step = (c_hi - c_lo) / cfg.scan_points;
  auto below = [&](double c) { return eval_true(c) <= threshold; };
  auto walk = [&](double dir, double limit) {
    double inside = r.c_star;
    for (;;) {
      double next = inside + dir * step;
      if ((dir < 0 && next <= limit) || (dir > 0 && next >= limit)) {
        if (below(limit)) return limit;
        next = limit;
      }
      if (!below(next)) {
        double a = inside;
        double b = next;
        while (std::abs(b - a) > cfg.tol_c) {
          const double mid = 0.5 * (a + b);
          (below(mid) ? a : b) = mid;
        }
        return a;
      }
      inside = next;
    }
  };
  r.flat_lo = walk(-1.0, c_lo);
  r.flat_hi = walk(+1.0, c_hi);
  r.flat_bottom_width = r.flat_hi - r.flat_lo;
  r.w_max = cfg.w_max > 0.0 ? cfg.w_max : 0.5 * (c_break - c_lo);
  r.reliable = r.flat_bottom_width <= r.w_max;
  r.log_mn_star -= offset;
  return r;
}

/// `count` samples of ln MN(c) at uniform spacing over [c_lo, c_hi].
inline std::vector<MNSample> sample_curve(const ProblemParams& p, double c_lo, double c_hi, int count,
                                          const PrecisionContext& ctx) {
  validate(p);
  if (p.below_domain(c_lo)) throw DomainError("c_lo must be at least 24*rho*delta");
  if (!(c_hi > c_lo)) throw DomainError("c_hi must exceed c_lo");
  if (count < 2) throw DomainError("need at least two samples");
  std::vector<MNSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double c = i == count - 1 ? c_hi : c_lo + (c_hi - c_lo) * i / (count - 1);
    out.push_back({c, log_mn(XReal(ctx, c), p)});
  }
  return out;
}

}  // namespace mnshape
