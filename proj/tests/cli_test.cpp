// Copyright 2026 The privexp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end checks of the command-line tool: exit codes, output schemas
// and byte-for-byte reproducibility.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "privexp/serialization.hpp"
#include "test_util.hpp"

namespace privexp {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("privexp_cli_" + std::string(::testing::UnitTest::GetInstance()
                                             ->current_test_info()
                                             ->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunResult Run(const std::string& args) const {
    const fs::path out = dir_ / "stdout", err = dir_ / "stderr";
    const std::string cmd = std::string(PRIVEXP_CLI) + " " + args + " >" + out.string() + " 2>" +
                            err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = Slurp(out);
    r.err = Slurp(err);
    return r;
  }

  std::string Write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p.string();
  }

  static std::string Fixture(const char* name) {
    return std::string(PRIVEXP_FIXTURE_DIR) + "/" + name;
  }

  fs::path dir_;
};

TEST_F(Cli, ExponentPhiMatchesLibrary) {
  const RunResult r = Run("exponent phi --model " + Fixture("binary.json") + " --s 0.5");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const io::Json j = io::ParseJson(r.out);
  EXPECT_EQ(j.at("schema"), "privexp-v1");
  EXPECT_EQ(j.at("kind"), "phi");
  const SourceModel src = testing::BinarySource(0.75, 0.2);
  const double lib = SolvePhi(src, testing::EnergyConstraint(src.x_alphabet(), 0.5)).value;
  EXPECT_NEAR(j.at("value_nats").get<double>(), lib, 1e-12);
  EXPECT_TRUE(j.contains("policy"));
}

TEST_F(Cli, ExponentNuReportsTauStar) {
  const RunResult r = Run("exponent nu --model " + Fixture("binary.json") + " --s 0.5");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const io::Json j = io::ParseJson(r.out);
  ASSERT_TRUE(j.contains("tau_star"));
  EXPECT_GT(j.at("tau_star").get<double>(), 0.0);
  EXPECT_LT(j.at("tau_star").get<double>(), 1.0);
}

TEST_F(Cli, InputErrorsExitTwo) {
  RunResult r = Run("exponent phi --model /nonexistent.json --s 0.5");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(Run("simulate np-exact --model " + Fixture("binary.json") +
                " --n 5 --epsilon 1.5")
                .exit_code,
            2);
  EXPECT_EQ(Run("exponent bogus --model " + Fixture("binary.json")).exit_code, 2);
  EXPECT_EQ(Run("exponent phi --model " + Write("bad.json", "{oops") + " --s 1").exit_code, 2);
}

TEST_F(Cli, InfeasibleBudgetExitsThree) {
  const std::string model = Write("costly.json", R"({
    "schema": "privexp-v1", "x_alphabet": [0, 1],
    "hypotheses": [{"p_x": [0.5, 0.5]}, {"p_x": [0.2, 0.8]}],
    "distortion": {"kind": "matrix", "y_alphabet": [0, 1], "d": [[1, 2], [2, 1]]}})");
  EXPECT_EQ(Run("exponent phi --model " + model + " --s 0.5").exit_code, 3);
  // A sweep reports bad rows and exits 3 after writing the table.
  const RunResult r = Run("sweep phi --model " + model + " --s-grid 0.5,1.5");
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.out.find("0.5,nan"), std::string::npos) << r.out;
}

TEST_F(Cli, ResourceCapExitsFour) {
  EXPECT_EQ(Run("simulate bayes-exact --model " + Fixture("table1_dishwasher.json") +
                " --n 2000")
                .exit_code,
            4);
}

TEST_F(Cli, NonConvergenceExitsFiveUnlessAllowed) {
  const std::string args = "exponent phi --model " + Fixture("table1_dishwasher.json") +
                           " --s 300 --max-iter 1 --gap-tol 1e-15";
  EXPECT_EQ(Run(args).exit_code, 5);
  const RunResult r = Run(args + " --allow-nonconverged");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_FALSE(io::ParseJson(r.out).at("converged").get<bool>());
}

TEST_F(Cli, SweepIsMonotoneAndByteReproducible) {
  const std::string args = "sweep phi --model " + Fixture("binary.json") + " --range 0.05 1 20";
  const RunResult a = Run(args), b = Run(args);
  ASSERT_EQ(a.exit_code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  std::istringstream in(a.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "s,value_nats,tau_star,dist_h0,dist_h1,converged");
  double prev = INFINITY;
  int rows = 0;
  while (std::getline(in, line)) {
    const double v = std::stod(line.substr(line.find(',') + 1));
    EXPECT_LE(v, prev + 2e-8);
    prev = v;
    ++rows;
  }
  EXPECT_EQ(rows, 20);
}

TEST_F(Cli, ThreadCountDoesNotChangeOutput) {
  const std::string sweep =
      "sweep nu --model " + Fixture("binary.json") + " --range 0.1 0.9 6 --no-warm-start";
  EXPECT_EQ(Run("--threads 1 " + sweep).out, Run("--threads 3 " + sweep).out);
  const std::string twophase = "simulate twophase --model " + Fixture("ternary_learnable.json") +
                               " --s 1 --n 5000 --xi 0.02 --replicas 50 --seed 9";
  const RunResult one = Run("--threads 1 " + twophase);
  ASSERT_EQ(one.exit_code, 0) << one.err;
  EXPECT_EQ(one.out, Run("--threads 4 " + twophase).out);
  const std::string trend = "simulate trend --model " + Fixture("binary.json") +
                            " --mode bayes --n 10:200:10";
  EXPECT_EQ(Run("--threads 1 " + trend).out, Run(trend + " --threads 3").out);
}

TEST_F(Cli, SeededRunsAreByteReproducible) {
  const std::string trace_args = "trace --model " + Fixture("table1_dishwasher.json") +
                                 " --s 250 --kind nu --hypothesis h1 --length 500 --seed 77";
  const RunResult a = Run(trace_args), b = Run(trace_args);
  ASSERT_EQ(a.exit_code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "slot,demand_w,supply_w,renewable_w");
  EXPECT_NE(a.out, Run("trace --model " + Fixture("table1_dishwasher.json") +
                       " --s 250 --kind nu --hypothesis h1 --length 500 --seed 78")
                       .out);
  const std::string mc = "simulate montecarlo --model " + Fixture("binary.json") +
                         " --s 0.5 --n 1000 --seed 5";
  EXPECT_EQ(Run(mc).out, Run(mc).out);
}

TEST_F(Cli, TraceFollowsDemandAtZeroRate) {
  const std::string csv = Write("demand.csv", "slot,demand_w\n0,0\n1,200\n2,1200\n3,500\n");
  const RunResult r =
      Run("trace --model " + Fixture("table1_dishwasher.json") + " --s 0 --demand " + csv +
          " --seed 1 --audit-out " + (dir_ / "audit.json").string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out,
            "slot,demand_w,supply_w,renewable_w\n0,0,0,0\n1,200,200,0\n2,1200,1200,0\n"
            "3,500,500,0\n");
  EXPECT_TRUE(fs::exists(dir_ / "audit.json"));
}

TEST_F(Cli, TwoPhaseWritesTraceAndAudit) {
  const std::string trace = (dir_ / "trace.csv").string();
  const RunResult r = Run("simulate twophase --model " + Fixture("ternary_learnable.json") +
                          " --s 1 --n 2000 --xi 0.02 --replicas 20 --seed 3 --trace-out " + trace);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const io::Json j = io::ParseJson(r.out);
  EXPECT_EQ(j.at("type"), "two_phase_audit");
  EXPECT_TRUE(j.contains("ledger"));
  const std::string csv = Slurp(trace);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "slot,x,y,phase,distortion");
}

TEST_F(Cli, OracleModesRun) {
  const std::string spec = Write(
      "spec.json", R"({"n": 1, "y_alphabet": [0, 1], "p_h0": [0.75, 0.25], "p_h1": [0.2, 0.8]})");
  const RunResult bayes = Run("simulate bayes-exact --spec " + spec);
  ASSERT_EQ(bayes.exit_code, 0) << bayes.err;
  EXPECT_NEAR(io::ParseJson(bayes.out).at("bayes_error").get<double>(), 0.225, 1e-15);
  EXPECT_EQ(Run("simulate np-exact --spec " + spec + " --epsilon 0.1").exit_code, 0);
  const RunResult thr = Run("simulate np-threshold --spec " + spec + " --delta-prime 0.01");
  ASSERT_EQ(thr.exit_code, 0) << thr.err;
  EXPECT_TRUE(io::ParseJson(thr.out).at("bound_holds").get<bool>());
}

TEST_F(Cli, HelpNamesTheComputedConstructs) {
  const RunResult top = Run("--help");
  EXPECT_EQ(top.exit_code, 0);
  EXPECT_NE(Run("exponent --help").out.find("min KL(p_Y|h0 || p_Y|h1)"), std::string::npos);
  EXPECT_NE(Run("sweep --help").out.find("phi(s, s) or nu(s, s)"), std::string::npos);
  const std::string sim = Run("simulate --help").out;
  EXPECT_NE(sim.find("Neyman-Pearson"), std::string::npos);
  EXPECT_NE(sim.find("Bayes-optimal"), std::string::npos);
  EXPECT_NE(sim.find("learn-then-protect"), std::string::npos);
  EXPECT_NE(Run("trace --help").out.find("renewable-rate constraint"), std::string::npos);
}

}  // namespace
}  // namespace privexp
