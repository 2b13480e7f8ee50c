#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "mnshape_cli.hpp"

using namespace mnshape;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "mnshape");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("mnshape_test_" + name);
}

class EnvGuard {
 public:
  EnvGuard(const char* name, const char* value) : name_(name) { setenv(name, value, 1); }
  ~EnvGuard() { unsetenv(name_); }

 private:
  const char* name_;
};

}  // namespace

TEST(ParseGrid, ListAndRange) {
  EXPECT_EQ(cli::parse_grid("20:100:10"), (std::vector<double>{20, 30, 40, 50, 60, 70, 80, 90, 100}));
  EXPECT_EQ(cli::parse_grid("48,50,52"), (std::vector<double>{48, 50, 52}));
  EXPECT_EQ(cli::parse_grid("0.5:1:0.25"), (std::vector<double>{0.5, 0.75, 1.0}));
  EXPECT_THROW(cli::parse_grid("20:100"), FormatError);
  EXPECT_THROW(cli::parse_grid("20,abc"), FormatError);
  EXPECT_THROW(cli::parse_grid(""), FormatError);
  EXPECT_THROW(cli::parse_grid("100:20:10"), FormatError);
}

TEST(PredictC, OutputFormat) {
  const CliRun r = run({"predict-c", "--delta", "0.32"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 1u);
  EXPECT_TRUE(std::regex_match(l[0], std::regex(R"(c_star=[0-9]+\.[0-9]{6} reliable=(true|false))"))) << l[0];
  const CliRun v = run({"predict-c", "--delta", "0.32", "-v"});
  ASSERT_EQ(lines(v.out).size(), 2u);
  EXPECT_EQ(lines(v.out)[0], l[0]);
  EXPECT_NE(v.out.find("flat_bottom=["), std::string::npos);
}

TEST(PredictC, DeltaZeroDoesNotMoveCStar) {
  const CliRun a = run({"predict-c", "--delta", "0.24", "--delta0", "0.001"});
  const CliRun b = run({"predict-c", "--delta", "0.24", "--delta0", "1000"});
  EXPECT_EQ(a.out, b.out);
}

TEST(MnCurve, FiveHundredRowsByDefault) {
  const CliRun r = run({"mn-curve", "--delta", "0.2", "--digits", "60"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 502u);
  EXPECT_EQ(l[0].rfind("# {", 0), 0u);
  EXPECT_EQ(l[1], "c,log10_mn");
  // 24 * 0.2 rounds one ulp above 4.8.
  EXPECT_EQ(l[2].rfind("4.80000000000000", 0), 0u) << l[2];
  EXPECT_EQ(l.back().rfind("120,", 0), 0u);
  const auto meta = nlohmann::json::parse(l[0].substr(2));
  EXPECT_EQ(meta["command"], "mn-curve");
  EXPECT_EQ(meta["count"], 500);
}

TEST(TableEven, CsvWithJsonHeader) {
  const auto path = temp_file("even.csv");
  const CliRun r = run({"table-even", "--delta", "0.44", "--nt", "50", "-o", path.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  std::ifstream f(path);
  std::stringstream text;
  text << f.rdbuf();
  std::filesystem::remove(path);
  const auto l = lines(text.str());
  ASSERT_EQ(l.size(), 11u);
  const auto meta = nlohmann::json::parse(l[0].substr(2));
  EXPECT_EQ(meta["params"]["delta"], 0.44);
  EXPECT_EQ(meta["c_grid"].size(), 9u);
  EXPECT_EQ(meta["n_t"], 50);
  EXPECT_EQ(l[1], kTableCsvHeader);
  EXPECT_EQ(l[2].rfind("0.44,20,", 0), 0u);
  EXPECT_NE(l[6].find(",12,50,,"), std::string::npos) << l[6];
}

TEST(TableScattered, SeedsAreConsecutive) {
  const CliRun r = run({"table-scattered", "--delta", "0.48", "--c-grid", "50,60", "--seed", "5", "--seeds", "2"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 6u);
  EXPECT_NE(l[2].find(",150,5,"), std::string::npos);
  EXPECT_NE(l[5].find(",150,6,"), std::string::npos);
}

TEST(FailureSweep, SummaryOnStderrWhenCsvOnStdout) {
  const CliRun r = run({"failure-sweep", "--delta", "0.36", "--c-grid", "50,60,70"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("c_star="), std::string::npos);
  EXPECT_NE(r.err.find("measured_argmin=60"), std::string::npos) << r.err;
  EXPECT_EQ(lines(r.out).size(), 5u);
}

TEST(ExitCodes, ConfigurationErrors) {
  EXPECT_EQ(run({"predict-c", "--no-such-flag"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"table-even", "--digits", "49"}).code, 2);
  EXPECT_EQ(run({"predict-c", "--beta", "-0.5"}).code, 2);
  EXPECT_EQ(run({"predict-c", "--delta", "100"}).code, 2);
  EXPECT_EQ(run({"table-even", "--c-grid", "60,50"}).code, 2);
  EXPECT_EQ(run({"interpolate", "--mode", "lattice"}).code, 2);
  EXPECT_EQ(run({"table-even", "-o", "/nonexistent-dir/x.csv", "--c-grid", "60"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(ExitCodes, NumericalFailure) {
  const CliRun r = run({"table-even", "--delta", "0.06", "--c-grid", "170", "--nt", "50", "--digits", "50",
                     "--max-escalations", "0"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("numerical failure"), std::string::npos);
  EXPECT_NE(lines(r.out).back().find("nan"), std::string::npos);
}

TEST(Environment, DigitsOverride) {
  {
    EnvGuard g("MNSHAPE_DIGITS", "120");
    const CliRun r = run({"table-even", "--delta", "0.44", "--c-grid", "60", "--no-verify"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto meta = nlohmann::json::parse(lines(r.out)[0].substr(2));
    EXPECT_EQ(meta["digits"], 120);
    // An explicit flag wins over the environment.
    const CliRun f = run({"table-even", "--delta", "0.44", "--c-grid", "60", "--no-verify", "--digits", "90"});
    EXPECT_EQ(nlohmann::json::parse(lines(f.out)[0].substr(2))["digits"], 90);
  }
  {
    EnvGuard g("MNSHAPE_DIGITS", "abc");
    EXPECT_EQ(run({"predict-c"}).code, 2);
  }
  {
    EnvGuard g("MNSHAPE_DIGITS", "10");
    EXPECT_EQ(run({"predict-c"}).code, 2);
  }
}

TEST(Interpolate, RoundTripMatchesReportedRms) {
  const auto path = temp_file("s.txt");
  const CliRun r = run({"interpolate", "--delta", "0.32", "--c", "60", "-o", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::smatch m;
  ASSERT_TRUE(std::regex_search(r.err, m, std::regex(R"(rms=(\S+) cond=(\S+) n_d=16 n_t=150 digits=220)"))) << r.err;
  std::ifstream f(path);
  const Interpolant s = read_interpolant(f);
  std::filesystem::remove(path);
  const PrecisionContext ctx(220);
  const XReal rms = rms_error([](const Point& z) { return sinc_target(z); }, s, uniform_1d(0, 5, 150, ctx));
  EXPECT_EQ(rms.sci(3), m[1].str());
  EXPECT_NEAR(std::log10(std::stod(m[1].str())), std::log10(4.7e-13), 2.0);
}
