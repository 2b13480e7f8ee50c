#pragma once

// Table runners: evenly spaced and scattered 1-D interpolation of sinc over a
// grid of shape parameters, with per-cell precision escalation.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "mnshape/error.hpp"
#include "mnshape/geometry.hpp"
#include "mnshape/mn_model.hpp"
#include "mnshape/rbf.hpp"
#include "mnshape/scalar.hpp"

namespace mnshape {

enum class RunMode { EvenSimplex, Scattered };

inline const char* to_string(RunMode m) { return m == RunMode::EvenSimplex ? "even" : "scattered"; }

struct RunConfig {
  ProblemParams params;
  std::vector<double> c_grid;
  RunMode mode = RunMode::EvenSimplex;
  double a = 0.0;
  double b = 5.0;
  int n_t = 150;
  std::uint64_t seed = 1;
  unsigned digits = PrecisionContext::kDefaultDigits;
  std::string output_path;
  bool allow_below_range = false;
  // Escalation protocol: retry at higher precision on a singular pivot or when
  // the +verify_step check disagrees.
  unsigned escalation_step = 80;
  int max_escalations = 2;
  bool verify = true;
  int verify_sig_figs = 2;
  unsigned jobs = 1;  // does not affect output
};

struct ExperimentRow {
  double delta = 0.0;
  double c = 0.0;
  XReal rms;
  XReal cond;
  int n_d = 0;
  int n_t = 0;
  std::optional<std::uint64_t> seed;
  unsigned digits_used = 0;
  bool skipped = false;
  bool numerical_failure = false;
  std::string note;
};

inline void validate(const RunConfig& cfg) {
  validate(cfg.params);
  if (cfg.c_grid.empty()) throw DomainError("c grid is empty");
  for (std::size_t i = 1; i < cfg.c_grid.size(); ++i) {
    if (!(cfg.c_grid[i] > cfg.c_grid[i - 1])) throw DomainError("c grid must be strictly increasing");
  }
  if (!(cfg.c_grid.front() > 0.0)) throw DomainError("c values must be positive");
  if (!cfg.allow_below_range && cfg.params.below_domain(cfg.c_grid.front())) {
    throw DomainError("c grid starts below 24*rho*delta; pass allow_below_range to probe there");
  }
  if (!(cfg.b > cfg.a)) throw DomainError("domain must satisfy a < b");
  if (cfg.n_t < 2) throw DomainError("need at least two test points");
  with_precision(cfg.digits);
}

/// True when a and b agree to `sig` significant figures (half a unit in the last kept place).
inline bool agree_to_sig_figs(const XReal& a, const XReal& b, int sig) {
  if (a.is_zero() || b.is_zero()) return a.is_zero() && b.is_zero();
  if (!a.is_finite() || !b.is_finite()) return false;
  const XReal scale = abs(a) > abs(b) ? abs(a) : abs(b);
  const long e = static_cast<long>(std::floor(log10_abs(scale)));
  const XReal unit = pow(XReal::integer(a.bits(), 10), e - sig + 1);
  return abs(a - b) <= unit / 2;
}

struct CellResult {
  XReal rms;
  XReal cond;
  unsigned digits = 0;
};

/// Interpolates sinc at `nodes`, reports RMS on `test` and COND. Starts at
/// cfg.digits; a SingularMatrix or a disagreement with the verify run at
/// +escalation_step digits triggers a retry at
/// max(d + step, ceil(1.5 log10 COND)), at most max_escalations times.
inline CellResult interpolate_cell(const NodeSet& nodes, const NodeSet& test, double c, const RunConfig& cfg) {
  const KernelSpec kernel{cfg.params.beta, c, false};
  auto run = [&](unsigned digits) {
    const PrecisionContext ctx(digits);
    std::vector<XReal> values;
    values.reserve(nodes.size());
    for (const auto& x : nodes.points) values.push_back(sinc_target(XReal::with_bits(ctx.bits(), x[0])));
    const auto sys = assemble(nodes, values, kernel, ctx);
    auto [s, report] = solve(sys, ctx);
    const TargetFunction f = [&](const Point& z) { return sinc_target(XReal::with_bits(ctx.bits(), z[0])); };
    return CellResult{rms_error(f, s, test), report.condition_number, digits};
  };

  unsigned digits = cfg.digits;
  std::string last_problem;
  for (int attempt = 0; attempt <= cfg.max_escalations; ++attempt) {
    unsigned next = digits + cfg.escalation_step;
    try {
      CellResult r = run(digits);
      const unsigned by_cond =
          static_cast<unsigned>(std::ceil(1.5 * std::max(0.0, log10_abs(r.cond))));
      next = std::max(next, by_cond);
      if (!cfg.verify) return r;
      const CellResult check = run(digits + cfg.escalation_step);
      if (agree_to_sig_figs(r.rms, check.rms, cfg.verify_sig_figs) &&
          agree_to_sig_figs(r.cond, check.cond, cfg.verify_sig_figs)) {
        return r;
      }
      last_problem = "RMS " + r.rms.sci(3) + " vs " + check.rms.sci(3) + " at +" +
                     std::to_string(cfg.escalation_step) + " digits";
    } catch (const SingularMatrix& e) {
      next = std::max(next, static_cast<unsigned>(std::ceil(1.5 * digits)));
      last_problem = e.what();
    }
    digits = next;
  }
  throw NumericalError("precision escalation exhausted at c=" + detail::double_token(c) + ": " + last_problem);
}

namespace detail {

// Runs job(i) for i in [0, count) on up to `jobs` threads; results land by index.
inline void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& job) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

inline ExperimentRow blank_row(const RunConfig& cfg, double c) {
  ExperimentRow row;
  row.delta = cfg.params.delta;
  row.c = c;
  row.n_t = cfg.n_t;
  const XReal nan_value = XReal::from_double(PrecisionContext(cfg.digits).bits(), std::nan(""));
  row.rms = nan_value;
  row.cond = nan_value;
  return row;
}

inline void fill_row(ExperimentRow& row, const NodeSet& nodes, const NodeSet& test, const RunConfig& cfg) {
  row.n_d = static_cast<int>(nodes.size());
  try {
    CellResult r = interpolate_cell(nodes, test, row.c, cfg);
    row.rms = std::move(r.rms);
    row.cond = std::move(r.cond);
    row.digits_used = r.digits;
  } catch (const NumericalError& e) {
    row.numerical_failure = true;
    row.note = e.what();
  }
}

}  // namespace detail

/// One row per c: lattice degree from the node rule at that c, sinc data, fixed test grid.
inline std::vector<ExperimentRow> run_even_table(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.mode != RunMode::EvenSimplex) throw ConfigError("run_even_table needs mode EvenSimplex");
  const PrecisionContext ctx(cfg.digits);
  const NodeSet test = uniform_1d(cfg.a, cfg.b, cfg.n_t, ctx);
  const Simplex segment = Simplex::interval(XReal(ctx, cfg.a), XReal(ctx, cfg.b));
  std::vector<ExperimentRow> rows;
  for (double c : cfg.c_grid) rows.push_back(detail::blank_row(cfg, c));
  detail::parallel_for(rows.size(), cfg.jobs, [&](std::size_t i) {
    ExperimentRow& row = rows[i];
    int l = 0;
    try {
      l = degree_from_delta(row.c, cfg.params);
    } catch (const DegenerateDegree& e) {
      row.skipped = true;
      row.note = e.what();
      return;
    }
    detail::fill_row(row, barycentric_grid(segment, l), test, cfg);
  });
  return rows;
}

/// One scattered node set per table (seed recorded), shared by every c.
inline std::vector<ExperimentRow> run_scattered_table(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.mode != RunMode::Scattered) throw ConfigError("run_scattered_table needs mode Scattered");
  const PrecisionContext ctx(cfg.digits);
  const NodeSet test = uniform_1d(cfg.a, cfg.b, cfg.n_t, ctx);
  const NodeSet nodes = scattered_1d(cfg.a, cfg.b, cfg.params.delta, cfg.seed, ctx);
  std::vector<ExperimentRow> rows;
  for (double c : cfg.c_grid) {
    rows.push_back(detail::blank_row(cfg, c));
    rows.back().seed = cfg.seed;
  }
  detail::parallel_for(rows.size(), cfg.jobs, [&](std::size_t i) { detail::fill_row(rows[i], nodes, test, cfg); });
  return rows;
}

struct FailureSweep {
  std::vector<ExperimentRow> rows;
  PredictionResult prediction;
};

/// Table rows next to the MN prediction for the same parameters.
inline FailureSweep run_failure_sweep(const RunConfig& cfg, const SearchConfig& search = {}) {
  FailureSweep out;
  out.prediction = predict_c(cfg.params, search);
  out.rows = cfg.mode == RunMode::EvenSimplex ? run_even_table(cfg) : run_scattered_table(cfg);
  return out;
}

/// Index of the smallest finite RMS, if any.
inline std::optional<std::size_t> rms_argmin(const std::vector<ExperimentRow>& rows) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].skipped || rows[i].numerical_failure || !rows[i].rms.is_finite()) continue;
    if (!best || rows[i].rms < rows[*best].rms) best = i;
  }
  return best;
}

inline bool any_numerical_failure(const std::vector<ExperimentRow>& rows) {
  return std::any_of(rows.begin(), rows.end(), [](const ExperimentRow& r) { return r.numerical_failure; });
}

inline constexpr const char* kTableCsvHeader = "delta,c,rms,cond,n_d,n_t,seed,digits";

inline void write_row(std::ostream& os, const ExperimentRow& r) {
  const bool empty = r.skipped || r.numerical_failure;
  os << detail::double_token(r.delta) << ',' << detail::double_token(r.c) << ','
     << (empty ? "nan" : r.rms.sci(3)) << ',' << (empty ? "nan" : r.cond.sci(3)) << ',';
  if (r.skipped) {
    os << "nan";
  } else {
    os << r.n_d;
  }
  os << ',' << r.n_t << ',';
  if (r.seed) os << *r.seed;
  os << ',';
  if (empty) {
    os << "nan";
  } else {
    os << r.digits_used;
  }
  os << '\n';
}

/// `# <metadata>` line, the column header, then one line per row in grid order.
inline void write_table_csv(std::ostream& os, const std::string& metadata_json, const std::vector<ExperimentRow>& rows) {
  os << "# " << metadata_json << '\n' << kTableCsvHeader << '\n';
  for (const auto& r : rows) write_row(os, r);
}

/// CSV `c,log10_mn`.
inline void write_curve_csv(std::ostream& os, const std::string& metadata_json, const std::vector<MNSample>& samples) {
  os << "# " << metadata_json << '\n' << "c,log10_mn\n";
  for (const auto& s : samples) {
    const XReal l10 = s.log_mn / log(XReal::integer(s.log_mn.bits(), 10));
    os << detail::double_token(s.c) << ',' << l10.sci(12) << '\n';
  }
}

}  // namespace mnshape
