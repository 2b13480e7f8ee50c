#pragma once

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mnshape/mnshape.hpp"

namespace mnshape::cli {

enum ExitCode : int { kOk = 0, kConfig = 2, kNumerical = 3 };

inline const std::string kEvenGrid = "20:100:10";
inline const std::string kScatteredGrid = "20,30,40,48,50,52,54,56,60,70";
inline const std::string kSweepGrid = "30:110:10";

/// Default working precision: MNSHAPE_DIGITS if set, else 220.
inline unsigned default_digits() {
  if (const char* env = std::getenv("MNSHAPE_DIGITS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0') throw PrecisionError(std::string("MNSHAPE_DIGITS is not an integer: ") + env);
    return with_precision(v).digits();
  }
  return PrecisionContext::kDefaultDigits;
}

/// Parses "20,30,40" or "start:stop:step" (stop inclusive).
inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw FormatError("bad number '" + s + "' in c grid");
    }
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw FormatError("range grid must be start:stop:step");
    const double start = number(parts[0]);
    const double stop = number(parts[1]);
    const double step = number(parts[2]);
    if (!(step > 0.0) || stop < start) throw FormatError("range grid needs step > 0 and stop >= start");
    const long count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) out.push_back(start + step * static_cast<double>(i));
    return out;
  }
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) {
    if (!p.empty()) out.push_back(number(p));
  }
  if (out.empty()) throw FormatError("empty c grid");
  return out;
}

inline nlohmann::ordered_json to_json(const ProblemParams& p) {
  return {{"n", p.n},         {"beta", p.beta}, {"sigma", p.sigma},  {"b0", p.b0},
          {"delta", p.delta}, {"rho", p.rho},   {"delta0", p.delta0}};
}

inline nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["params"] = to_json(cfg.params);
  j["c_grid"] = cfg.c_grid;
  j["mode"] = to_string(cfg.mode);
  j["domain"] = {cfg.a, cfg.b};
  j["n_t"] = cfg.n_t;
  if (cfg.mode == RunMode::Scattered) j["seed"] = cfg.seed;
  j["digits"] = cfg.digits;
  j["escalation_step"] = cfg.escalation_step;
  j["max_escalations"] = cfg.max_escalations;
  j["verify"] = cfg.verify;
  j["output_path"] = cfg.output_path;
  return j;
}

inline nlohmann::ordered_json to_json(const SearchConfig& s) {
  return {{"c_max", s.c_max},   {"tol_c", s.tol_c},           {"eps_flat", s.eps_flat},
          {"w_max", s.w_max},   {"scan_points", s.scan_points}, {"digits", s.digits}};
}

inline std::string prediction_line(const PredictionResult& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "c_star=%.6f reliable=%s", r.c_star, r.reliable ? "true" : "false");
  return buf;
}

inline std::string prediction_details(const PredictionResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "branch=%s%s log10_mn_star=%.6f flat_bottom=[%.6f,%.6f] width=%.6f w_max=%.6f c_max=%.6f",
                to_string(r.branch), r.left_limit ? "(left-limit)" : "",
                r.log_mn_star.to_double() / std::log(10.0), r.flat_lo, r.flat_hi, r.flat_bottom_width, r.w_max,
                r.c_max);
  return buf;
}

namespace detail {

struct Options {
  ProblemParams params;
  unsigned digits = PrecisionContext::kDefaultDigits;
  std::string output = "-";
  unsigned jobs = 1;
  // mn-curve
  std::optional<double> c_min;
  double c_max_curve = 120.0;
  int count = 500;
  // predict-c
  SearchConfig search;
  bool verbose = false;
  // tables / interpolate
  std::string grid;
  std::string mode = "even";
  double a = 0.0;
  double b = 5.0;
  int n_t = 150;
  std::uint64_t seed = 1;
  int seeds = 1;
  double c = 60.0;
  bool prefactor = false;
  bool no_verify = false;
  int max_escalations = 2;
};

inline void add_params(CLI::App& app, Options& o) {
  app.add_option("--n", o.params.n, "dimension")->capture_default_str();
  app.add_option("--beta", o.params.beta, "kernel exponent")->capture_default_str();
  app.add_option("--sigma", o.params.sigma, "band limit")->capture_default_str();
  app.add_option("--b0", o.params.b0, "domain diameter bound")->capture_default_str();
  app.add_option("--rho", o.params.rho, "constant rho")->capture_default_str();
  app.add_option("--delta", o.params.delta, "fill distance")->capture_default_str();
  app.add_option("--delta0", o.params.delta0, "error bound constant (does not move c_star)")->capture_default_str();
}

inline void add_run(CLI::App& app, Options& o, const std::string& default_grid) {
  app.add_option("--c-grid", o.grid, "c values: list 20,30,40 or range 20:100:10 (default " + default_grid + ")");
  app.add_option("--a", o.a, "domain left end")->capture_default_str();
  app.add_option("--b", o.b, "domain right end")->capture_default_str();
  app.add_option("--nt", o.n_t, "number of uniform test points")->capture_default_str();
  app.add_option("--digits", o.digits, "starting working precision (decimal digits)")->capture_default_str();
  app.add_option("--jobs", o.jobs, "worker threads")->capture_default_str();
  app.add_option("--max-escalations", o.max_escalations, "precision retries per cell")->capture_default_str();
  app.add_flag("--no-verify", o.no_verify, "skip the +80-digit agreement check");
  app.add_option("-o,--output", o.output, "CSV path, '-' for stdout")->capture_default_str();
}

inline RunConfig run_config(const Options& o, RunMode mode, const std::string& default_grid) {
  RunConfig cfg;
  cfg.params = o.params;
  cfg.c_grid = parse_grid(o.grid.empty() ? default_grid : o.grid);
  cfg.mode = mode;
  cfg.a = o.a;
  cfg.b = o.b;
  cfg.n_t = o.n_t;
  cfg.seed = o.seed;
  cfg.digits = with_precision(o.digits).digits();
  cfg.output_path = o.output;
  cfg.verify = !o.no_verify;
  cfg.max_escalations = o.max_escalations;
  cfg.jobs = std::max(1u, o.jobs);
  return cfg;
}

inline RunMode parse_mode(const std::string& m) {
  if (m == "even") return RunMode::EvenSimplex;
  if (m == "scattered") return RunMode::Scattered;
  throw ConfigError("mode must be 'even' or 'scattered'");
}

// Writes to `path`, or to `out` for "-".
template <class Writer>
void emit(const std::string& path, std::ostream& out, Writer&& writer) {
  if (path.empty() || path == "-") {
    writer(out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  writer(f);
  if (!f) throw ConfigError("write to '" + path + "' failed");
}

inline int report_rows(const std::vector<ExperimentRow>& rows, std::ostream& err) {
  for (const auto& r : rows) {
    if (r.numerical_failure) err << "numerical failure at c=" << r.c << ": " << r.note << '\n';
  }
  return any_numerical_failure(rows) ? kNumerical : kOk;
}

}  // namespace detail

/// Runs the mnshape command line; returns the process exit code.
inline int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  detail::Options o;
  CLI::App app{"Shape parameter prediction and (inverse) multiquadric interpolation experiments", "mnshape"};
  app.require_subcommand(1);

  auto* curve = app.add_subcommand("mn-curve", "sample log10 MN(c) on a uniform c grid");
  detail::add_params(*curve, o);
  curve->add_option("--c-min", o.c_min, "first c (default 24*rho*delta)");
  curve->add_option("--c-max", o.c_max_curve, "last c")->capture_default_str();
  curve->add_option("--count", o.count, "number of samples")->capture_default_str();
  curve->add_option("--digits", o.digits, "working precision")->capture_default_str();
  curve->add_option("-o,--output", o.output, "CSV path, '-' for stdout")->capture_default_str();

  auto* predict = app.add_subcommand("predict-c", "minimize MN(c) and report the predicted shape parameter");
  detail::add_params(*predict, o);
  predict->add_option("--c-max", o.search.c_max, "search upper end (0: 40*rho*b0)")->capture_default_str();
  predict->add_option("--tol", o.search.tol_c, "c tolerance")->capture_default_str();
  predict->add_option("--eps-flat", o.search.eps_flat, "flat-bottom threshold in ln MN")->capture_default_str();
  predict->add_option("--w-max", o.search.w_max, "reliable width limit (0: (12 rho b0 - 24 rho delta)/2)")
      ->capture_default_str();
  predict->add_option("--scan-points", o.search.scan_points, "grid points of the initial scan")
      ->capture_default_str();
  predict->add_flag("-v,--verbose", o.verbose, "also print branch and flat-bottom details");

  auto* interp = app.add_subcommand("interpolate", "interpolate sinc at one c and save the interpolant");
  detail::add_params(*interp, o);
  interp->add_option("--c", o.c, "shape parameter")->capture_default_str();
  interp->add_option("--mode", o.mode, "even or scattered")->capture_default_str();
  interp->add_option("--seed", o.seed, "scattered node seed")->capture_default_str();
  interp->add_option("--a", o.a, "domain left end")->capture_default_str();
  interp->add_option("--b", o.b, "domain right end")->capture_default_str();
  interp->add_option("--nt", o.n_t, "number of uniform test points")->capture_default_str();
  interp->add_option("--digits", o.digits, "working precision")->capture_default_str();
  interp->add_flag("--gamma-prefactor", o.prefactor, "use Gamma(-beta/2) instead of the sign factor");
  interp->add_option("-o,--output", o.output, "interpolant path, '-' for stdout")->capture_default_str();

  auto* even = app.add_subcommand("table-even", "evenly spaced table: node rule per c, sinc target");
  detail::add_params(*even, o);
  detail::add_run(*even, o, kEvenGrid);

  auto* scattered = app.add_subcommand("table-scattered", "scattered table: one random node set per seed");
  detail::add_params(*scattered, o);
  detail::add_run(*scattered, o, kScatteredGrid);
  scattered->add_option("--seed", o.seed, "first seed")->capture_default_str();
  scattered->add_option("--seeds", o.seeds, "number of consecutive seeds")->capture_default_str();

  auto* sweep = app.add_subcommand("failure-sweep", "table rows next to the MN prediction");
  detail::add_params(*sweep, o);
  detail::add_run(*sweep, o, kSweepGrid);
  sweep->add_option("--mode", o.mode, "even or scattered")->capture_default_str();
  sweep->add_option("--seed", o.seed, "scattered node seed")->capture_default_str();

  try {
    o.digits = default_digits();
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  }

  try {
    if (curve->parsed()) {
      validate(o.params);
      const PrecisionContext ctx = with_precision(o.digits);
      const double lo = o.c_min.value_or(o.params.c_min());
      const auto samples = sample_curve(o.params, lo, o.c_max_curve, o.count, ctx);
      nlohmann::ordered_json meta{{"command", "mn-curve"}, {"params", to_json(o.params)}, {"c_min", lo},
                                  {"c_max", o.c_max_curve}, {"count", o.count},       {"digits", o.digits}};
      detail::emit(o.output, out, [&](std::ostream& os) { write_curve_csv(os, meta.dump(), samples); });
      return kOk;
    }
    if (predict->parsed()) {
      const auto r = predict_c(o.params, o.search);
      out << prediction_line(r) << '\n';
      if (o.verbose) out << prediction_details(r) << '\n';
      return kOk;
    }
    if (interp->parsed()) {
      validate(o.params);
      const PrecisionContext ctx = with_precision(o.digits);
      const RunMode mode = detail::parse_mode(o.mode);
      NodeSet nodes = mode == RunMode::EvenSimplex
                          ? barycentric_grid(Simplex::interval(XReal(ctx, o.a), XReal(ctx, o.b)),
                                             degree_from_delta(o.c, o.params))
                          : scattered_1d(o.a, o.b, o.params.delta, o.seed, ctx);
      std::vector<XReal> values;
      for (const auto& x : nodes.points) values.push_back(sinc_target(x));
      const auto sys = assemble(nodes, values, KernelSpec{o.params.beta, o.c, o.prefactor}, ctx);
      const auto [s, report] = solve(sys, ctx);
      const NodeSet test = uniform_1d(o.a, o.b, o.n_t, ctx);
      const XReal rms = rms_error([](const Point& z) { return sinc_target(z); }, s, test);
      detail::emit(o.output, out, [&](std::ostream& os) { write_interpolant(os, s); });
      err << "rms=" << rms.sci(3) << " cond=" << report.condition_number.sci(3) << " n_d=" << nodes.size()
          << " n_t=" << o.n_t << " digits=" << report.digits_used << '\n';
      return kOk;
    }
    if (even->parsed()) {
      const RunConfig cfg = detail::run_config(o, RunMode::EvenSimplex, kEvenGrid);
      const auto rows = run_even_table(cfg);
      detail::emit(o.output, out, [&](std::ostream& os) { write_table_csv(os, to_json(cfg).dump(), rows); });
      return detail::report_rows(rows, err);
    }
    if (scattered->parsed()) {
      if (o.seeds < 1) throw ConfigError("--seeds must be at least 1");
      RunConfig cfg = detail::run_config(o, RunMode::Scattered, kScatteredGrid);
      auto meta = to_json(cfg);
      meta["seeds"] = o.seeds;
      std::vector<ExperimentRow> rows;
      for (int k = 0; k < o.seeds; ++k) {
        cfg.seed = o.seed + static_cast<std::uint64_t>(k);
        auto part = run_scattered_table(cfg);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      detail::emit(o.output, out, [&](std::ostream& os) { write_table_csv(os, meta.dump(), rows); });
      return detail::report_rows(rows, err);
    }
    if (sweep->parsed()) {
      const RunConfig cfg = detail::run_config(o, detail::parse_mode(o.mode), kSweepGrid);
      const auto result = run_failure_sweep(cfg);
      auto meta = to_json(cfg);
      meta["search"] = to_json(SearchConfig{});
      detail::emit(o.output, out, [&](std::ostream& os) { write_table_csv(os, meta.dump(), result.rows); });
      std::ostream& summary = (o.output.empty() || o.output == "-") ? err : out;
      summary << prediction_line(result.prediction) << '\n' << prediction_details(result.prediction) << '\n';
      if (const auto best = rms_argmin(result.rows)) {
        summary << "measured_argmin=" << mnshape::detail::double_token(result.rows[*best].c)
                << " rms=" << result.rows[*best].rms.sci(3) << '\n';
      }
      return detail::report_rows(result.rows, err);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
  return kConfig;
}

}  // namespace mnshape::cli
