#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "dpps/cli.hpp"
#include "dpps/harness.hpp"

namespace dpps {
namespace {

namespace fs = std::filesystem;

const fs::path kConfigDir = fs::path(DPPS_SOURCE_DIR) / "configs";

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_of(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dpps_cli_test_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const auto path = dir_ / name;
    std::ofstream(path) << text;
    return path;
  }

  // Writes a summary file with `agents` agents whose upper band reaches 40 + agent index.
  fs::path summary_with(std::size_t agents) {
    std::vector<AgentSummary> s;
    for (std::size_t a = 0; a < agents; ++a) {
      AgentSummary x;
      x.name = "agent" + std::to_string(a);
      x.t = {1, 50, 100};
      x.mean = {0.5, 10.0, 20.0 + static_cast<double>(a)};
      x.q_lo = {0.0, 5.0, 12.0};
      x.q_hi = {1.0, 22.0, 40.0 + static_cast<double>(a)};
      s.push_back(x);
    }
    const auto path = dir_ / ("summary" + std::to_string(agents) + ".json");
    write_summary_json(path, s);
    return path;
  }

  fs::path dir_;
};

// ---- run ----

TEST_F(Cli, SmokeConfigRunsQuickly) {
  const auto start = std::chrono::steady_clock::now();
  const auto r = cli({"--out-dir", dir_.string(), "run", (kConfigDir / "smoke.cfg").string()});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_LT(seconds, 1.0);
  EXPECT_TRUE(fs::exists(dir_ / "smoke_trace.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "smoke_summary.json"));
  for (const char* name : {"dpps", "beta_ts", "ucb"}) EXPECT_NE(r.out.find(name), std::string::npos);
  const auto summaries = read_summary_json(dir_ / "smoke_summary.json");
  ASSERT_EQ(summaries.size(), 3u);
  EXPECT_EQ(summaries[0].t.back(), 10u);
}

TEST_F(Cli, UnknownKeyIsAUsageErrorNamingTheKey) {
  const auto cfg = write("typo.cfg", "env = bernoulli6\nhorizon = 10\nreplications = 1\n[agent d]\ntype = dpps\nalpha_ = 2\n");
  const auto r = cli({"--out-dir", dir_.string(), "run", cfg.string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("alpha_"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "trace.csv"));
}

TEST_F(Cli, FailuresHaveDistinctMessagesAndCodes) {
  const auto missing = cli({"run", (dir_ / "absent.cfg").string()});
  EXPECT_EQ(missing.code, kExitUsage);
  EXPECT_NE(missing.err.find("cannot open config file"), std::string::npos) << missing.err;

  const auto schema = cli({"run", write("bad.cfg", "env = bernoulli6\n").string()});
  EXPECT_EQ(schema.code, kExitUsage);
  EXPECT_NE(schema.err.find("no [agent"), std::string::npos) << schema.err;

  // A regular file where a directory is needed makes every output unwritable.
  const auto blocker = write("blocker", "x");
  const auto unwritable = cli({"--out-dir", (blocker / "sub").string(), "run", (kConfigDir / "smoke.cfg").string()});
  EXPECT_EQ(unwritable.code, kExitRuntime);
  EXPECT_NE(unwritable.err.find("cannot create output directory"), std::string::npos) << unwritable.err;

  EXPECT_NE(missing.err, schema.err);
  EXPECT_NE(schema.err, unwritable.err);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"fly"}).code, kExitUsage);
  EXPECT_EQ(cli({"run"}).code, kExitUsage);
  EXPECT_EQ(cli({"--threads", "0", "run", (kConfigDir / "smoke.cfg").string()}).code, kExitUsage);
  EXPECT_EQ(cli({"diagnose", "--alpha", "-1"}).code, kExitUsage);
  EXPECT_EQ(cli({"diagnose", "-N", "0"}).code, kExitUsage);
  const auto help = cli({"--help"});
  EXPECT_EQ(help.code, kExitOk);
  for (const char* sub : {"run", "plot", "diagnose", "density"}) EXPECT_NE(help.out.find(sub), std::string::npos);
}

TEST_F(Cli, SeedOverrideChangesTraceAndThreadsDoNot) {
  auto trace_for = [&](const std::vector<std::string>& extra, const std::string& sub) {
    std::vector<std::string> args = {"--out-dir", (dir_ / sub).string()};
    args.insert(args.end(), extra.begin(), extra.end());
    args.push_back("run");
    args.push_back((kConfigDir / "smoke.cfg").string());
    const auto r = cli(args);
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return slurp(dir_ / sub / "smoke_trace.csv");
  };
  const auto a = trace_for({}, "a");
  const auto b = trace_for({"--threads", "3"}, "b");
  const auto c = trace_for({"--seed", "99"}, "c");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

// ---- plot ----

TEST_F(Cli, PlotOneAgentHasOneCurveAndBand) {
  const auto svg = dir_ / "one.svg";
  const auto r = cli({"plot", summary_with(1).string(), svg.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto text = slurp(svg);
  EXPECT_EQ(count_of(text, "class=\"band\""), 1u);
  EXPECT_EQ(count_of(text, "class=\"mean\""), 1u);
  EXPECT_EQ(count_of(text, "class=\"legend-entry\""), 1u);
}

TEST_F(Cli, PlotLegendListsThreeAgents) {
  const auto svg = dir_ / "three.svg";
  ASSERT_EQ(cli({"plot", summary_with(3).string(), svg.string(), "--title", "a <b> & c"}).code, kExitOk);
  const auto text = slurp(svg);
  EXPECT_EQ(count_of(text, "class=\"legend-entry\""), 3u);
  for (const char* name : {">agent0<", ">agent1<", ">agent2<"}) EXPECT_NE(text.find(name), std::string::npos);
  EXPECT_NE(text.find("a &lt;b&gt; &amp; c"), std::string::npos);
}

TEST_F(Cli, PlotAxisCoversUpperQuantile) {
  const auto svg = dir_ / "axis.svg";
  ASSERT_EQ(cli({"plot", summary_with(3).string(), svg.string()}).code, kExitOk);
  const auto text = slurp(svg);
  std::smatch m;
  ASSERT_TRUE(std::regex_search(text, m, std::regex("data-y-max=\"([0-9.eE+-]+)\"")));
  const double y_max = std::stod(m[1]);
  EXPECT_GE(y_max, 42.0);
  EXPECT_LE(y_max, 2.0 * 42.0);
}

TEST_F(Cli, PlotDoesNotTouchRunOutputs) {
  ASSERT_EQ(cli({"--out-dir", dir_.string(), "run", (kConfigDir / "smoke.cfg").string()}).code, kExitOk);
  const auto trace = dir_ / "smoke_trace.csv";
  const auto summary = dir_ / "smoke_summary.json";
  const auto trace_before = slurp(trace);
  const auto summary_before = slurp(summary);
  const auto mtime = fs::last_write_time(trace);
  ASSERT_EQ(cli({"--out-dir", dir_.string(), "plot", summary.string()}).code, kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "regret.svg"));
  EXPECT_EQ(slurp(trace), trace_before);
  EXPECT_EQ(slurp(summary), summary_before);
  EXPECT_EQ(fs::last_write_time(trace), mtime);
}

TEST_F(Cli, PlotMissingSummaryFails) {
  const auto r = cli({"plot", (dir_ / "none.json").string(), (dir_ / "x.svg").string()});
  EXPECT_NE(r.code, kExitOk);
  EXPECT_FALSE(r.err.empty());
  EXPECT_FALSE(fs::exists(dir_ / "x.svg"));
}

// ---- diagnose ----

TEST_F(Cli, DiagnoseDefaultTail) {
  const auto r = cli({"diagnose", "--alpha", "2", "-N", "100"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  // (2/3)^99
  EXPECT_NE(r.out.find("E[T_N] (r = 1): 3.689e-18"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("truncation is adequate"), std::string::npos);
  EXPECT_NE(r.out.find("of 100"), std::string::npos);
}

TEST_F(Cli, DiagnoseRecommendsLargerTruncationForLargeAlpha) {
  const auto r = cli({"diagnose", "--alpha", "20", "-N", "100"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("recommendation"), std::string::npos) << r.out;
  const auto rep = diagnose_truncation(20.0, 100, 1.0, 1);
  EXPECT_NEAR(rep.expected_tail, std::pow(20.0 / 21.0, 99), 1e-15);
  // Smallest N with (20/21)^(N-1) <= 1e-10.
  const double n_star = 1.0 + std::log(1e-10) / std::log(20.0 / 21.0);
  EXPECT_EQ(rep.recommended_truncation, static_cast<std::size_t>(std::ceil(n_star)));
  EXPECT_GT(rep.recommended_truncation, 300u);
}

TEST_F(Cli, DiagnoseSingleAtomWarns) {
  const auto r = cli({"diagnose", "-N", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("warning"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("E[T_N] (r = 1): 1.000e+00"), std::string::npos) << r.out;
  const auto rep = diagnose_truncation(2.0, 1, 1.0, 1);
  ASSERT_EQ(rep.weights.size(), 1u);
  EXPECT_DOUBLE_EQ(rep.weights[0], 1.0);
}

TEST_F(Cli, DiagnoseCountsSmallWeights) {
  const auto rep = diagnose_truncation(2.0, 100, 1.0, 5);
  ASSERT_EQ(rep.weights.size(), 100u);
  std::size_t below = 0;
  double total = 0.0;
  for (double w : rep.weights) {
    below += w < 1e-10;
    total += w;
  }
  EXPECT_EQ(rep.below_threshold, below);
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(diagnose_truncation(2.0, 100, 1.0, 5).weights, rep.weights);
}

// ---- density ----

struct Envelope {
  std::vector<double> x, lower, median, upper;
};

Envelope read_envelope(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,lower,median,upper");
  Envelope e;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    EXPECT_EQ(row.size(), 4u);
    e.x.push_back(row[0]);
    e.lower.push_back(row[1]);
    e.median.push_back(row[2]);
    e.upper.push_back(row[3]);
  }
  return e;
}

double at(const Envelope& e, const std::vector<double>& ys, double x) {
  std::size_t i = 0;
  while (i + 1 < e.x.size() && e.x[i] < x) ++i;
  return ys[i];
}

TEST_F(Cli, DensityOfEmptyFileIsThePrior) {
  const auto data = write("empty.txt", "");
  const auto csv = dir_ / "prior.csv";
  const auto r = cli({"density", data.string(), "--base", "gaussian 0 1", "--draws", "400", "--grid-min", "-3",
                      "--grid-max", "3", "--grid-points", "61", "--csv", csv.string(), "--svg",
                      (dir_ / "prior.svg").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("prior-only"), std::string::npos);
  const auto e = read_envelope(csv);
  ASSERT_EQ(e.x.size(), 61u);
  EXPECT_DOUBLE_EQ(e.x.front(), -3.0);
  EXPECT_DOUBLE_EQ(e.x.back(), 3.0);
  // The prior median CDF sits near the base CDF, here 0.5 at zero.
  EXPECT_NEAR(at(e, e.median, 0.0), 0.5, 0.1);
  for (std::size_t i = 0; i < e.x.size(); ++i) {
    EXPECT_LE(e.lower[i], e.median[i]);
    EXPECT_LE(e.median[i], e.upper[i]);
  }
  EXPECT_TRUE(fs::exists(dir_ / "prior.svg"));
}

TEST_F(Cli, DensityOfBimodalDataHasPlateauBetweenModes) {
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> left(-3.0, 0.5), right(3.0, 0.5);
  std::ostringstream text;
  for (int i = 0; i < 100; ++i) text << left(gen) << "\n" << right(gen) << "\n";
  const auto data = write("bimodal.txt", text.str());
  const auto csv = dir_ / "bimodal.csv";
  const auto r = cli({"density", data.string(), "--alpha", "2", "--base", "gaussian 0 3", "--grid-min", "-6",
                      "--grid-max", "6", "--grid-points", "121", "--csv", csv.string(), "--svg",
                      (dir_ / "bimodal.svg").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("observations: 200"), std::string::npos);
  const auto e = read_envelope(csv);

  // Slope of the median CDF over the gap versus across one mode.
  const double gap_slope = (at(e, e.median, 1.0) - at(e, e.median, -1.0)) / 2.0;
  const double mode_slope = (at(e, e.median, -2.5) - at(e, e.median, -3.5)) / 1.0;
  EXPECT_LT(gap_slope, 0.02);
  EXPECT_GT(mode_slope, 0.2);
  EXPECT_NEAR(at(e, e.median, 0.0), 0.5, 0.05);
}

TEST_F(Cli, DensityMalformedLineIsNamed) {
  const auto data = write("bad.txt", "1\n2\n3\n4\n5\n6\nseven\n8\n");
  const auto r = cli({"density", data.string(), "--csv", (dir_ / "d.csv").string(), "--svg", (dir_ / "d.svg").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find(":7:"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "d.csv"));
}

TEST_F(Cli, DensityIsDeterministicGivenSeed) {
  const auto data = write("d.txt", "9.5\n10.2\n11\n");
  auto run = [&](const std::string& tag, const std::string& seed) {
    const auto csv = dir_ / (tag + ".csv");
    EXPECT_EQ(cli({"--seed", seed, "density", data.string(), "--csv", csv.string(), "--svg",
                   (dir_ / (tag + ".svg")).string()})
                  .code,
              kExitOk);
    return slurp(csv);
  };
  EXPECT_EQ(run("a", "4"), run("b", "4"));
  EXPECT_NE(run("a", "4"), run("c", "5"));
}

TEST_F(Cli, DensityRejectsBadOptions) {
  const auto data = write("d.txt", "1\n");
  EXPECT_EQ(cli({"density", data.string(), "--quantiles", "0.9", "0.1"}).code, kExitUsage);
  EXPECT_EQ(cli({"density", data.string(), "--base", "cauchy 0 1"}).code, kExitUsage);
  EXPECT_EQ(cli({"density", data.string(), "--alpha", "0"}).code, kExitUsage);
  EXPECT_EQ(cli({"density", (dir_ / "none.txt").string()}).code, kExitUsage);
}

// ---- the installed binary ----

int shell(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(Cli, BinaryExitCodes) {
  const std::string bin = DPPS_CLI_PATH;
  const std::string quiet = " >/dev/null 2>&1";
  EXPECT_EQ(shell(bin + " diagnose" + quiet), 0);
  EXPECT_EQ(shell(bin + " run " + (dir_ / "absent.cfg").string() + quiet), 1);
  EXPECT_EQ(shell(bin + " --bogus" + quiet), 1);
  const auto blocker = write("blocker", "x");
  EXPECT_EQ(shell(bin + " --out-dir " + (blocker / "sub").string() + " run " + (kConfigDir / "smoke.cfg").string() +
                  quiet),
            2);
  EXPECT_EQ(shell(bin + " --out-dir " + dir_.string() + " run " + (kConfigDir / "smoke.cfg").string() + quiet), 0);
  EXPECT_TRUE(fs::exists(dir_ / "smoke_trace.csv"));
}

}  // namespace
}  // namespace dpps
