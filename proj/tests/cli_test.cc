/*
 * Copyright 2026 The qchannel Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "commands.h"
#include "run_config.h"
#include "table.h"

namespace qchannel::cli {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qchannel");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("qchannel_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST(ParseTest, AchievabilityDefaults) {
  std::string err;
  const char* argv[] = {"qchannel", "achievability", "--d", "12", "--k", "2", "--sigma", "0.1",
                        "--seed", "7"};
  const ParseResult r = parse(10, argv, nullptr, &err);
  ASSERT_EQ(r.status, ParseStatus::kRun) << err;
  EXPECT_EQ(r.config.d, 12);
  EXPECT_EQ(r.config.k, 2);
  EXPECT_EQ(r.config.sigma, 0.1);
  EXPECT_EQ(r.config.seed, 7u);
  EXPECT_EQ(r.config.trials, 500);
  EXPECT_EQ(r.config.t_grid.size(), 59u);
  EXPECT_EQ(r.config.t_grid.front(), 2);
  EXPECT_EQ(r.config.t_grid.back(), 60);
}

TEST(ParseTest, ConstraintViolationNamesFlag) {
  const CliRun r = run_cli({"achievability", "--k", "13", "--d", "12"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--k"), std::string::npos);
  EXPECT_NE(r.err.find("k <= d"), std::string::npos);
}

TEST(ParseTest, EmptyArgvIsMisuse) {
  const CliRun r = run_cli({});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST(ParseTest, UnknownFlagAndTypeMismatch) {
  EXPECT_EQ(run_cli({"bounds", "--bogus", "1"}).code, 2);
  EXPECT_EQ(run_cli({"bounds", "--d", "twelve"}).code, 2);
  EXPECT_EQ(run_cli({"noise-sweep", "--sigma-grid", "0.1,x"}).code, 2);
  EXPECT_EQ(run_cli({"bounds", "--format", "xml"}).code, 2);
}

TEST(ParseTest, HelpExitsZeroAndListsParameters) {
  const CliRun r = run_cli({"noise-sweep", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--sigma-grid"), std::string::npos);
  EXPECT_NE(r.out.find("--trials"), std::string::npos);
}

TEST(ParseTest, GridSyntax) {
  EXPECT_EQ(parse_int_grid("2:5"), (std::vector<int>{2, 3, 4, 5}));
  EXPECT_EQ(parse_int_grid("1, 4:10:3 ,20"), (std::vector<int>{1, 4, 7, 10, 20}));
  EXPECT_EQ(parse_real_grid("0.5,1e-2"), (std::vector<double>{0.5, 0.01}));
  EXPECT_ANY_THROW(parse_int_grid("3:1"));
  EXPECT_ANY_THROW(parse_int_grid("1,,2"));
  EXPECT_ANY_THROW(parse_real_grid("nan"));
}

TEST(TableTest, CsvAndJson) {
  Table t({"a", "b", "c"});
  t.add_row({Cell(std::int64_t{3}), Cell(0.1 + 0.2), Cell(std::monostate{})});
  t.add_row({Cell(std::int64_t{-1}), Cell(1e-20), Cell(2.0)});
  EXPECT_EQ(format_csv(t), "a,b,c\n3,0.3,\n-1,1e-20,2\n");
  const auto j = nlohmann::json::parse(format_json(t));
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["a"], 3);
  EXPECT_TRUE(j[0]["c"].is_null());
  EXPECT_EQ(j[0]["b"].get<double>(), 0.3);
  EXPECT_ANY_THROW(t.add_row({Cell(1.0)}));
}

TEST_F(CliTest, AtomicWriteLeavesNoTemporaries) {
  write_atomically(dir_ / "x.csv", "hello\n");
  write_atomically(dir_ / "x.csv", "again\n");
  EXPECT_EQ(slurp(dir_ / "x.csv"), "again\n");
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir_)) {
    (void)e;
    ++files;
  }
  EXPECT_EQ(files, 1);
}

TEST_F(CliTest, NoiseSweepSmoke) {
  const CliRun r = run_cli({"noise-sweep", "--sigma-grid", "0.1,1", "--trials", "10", "--out",
                            dir_.string(), "--quiet"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(dir_ / "noise-sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_EQ(csv.rfind("sigma,snr_db,", 0), 0u);
  const auto m = nlohmann::json::parse(slurp(dir_ / "noise-sweep.manifest.json"));
  EXPECT_EQ(m["subcommand"], "noise-sweep");
  EXPECT_EQ(m["params"]["trials"], "10");
  EXPECT_TRUE(m.contains("wall_time_seconds"));
  EXPECT_TRUE(m.contains("version"));
}

TEST_F(CliTest, AchievabilityColumns) {
  const CliRun r = run_cli({"achievability", "--t-grid", "2,3", "--trials", "5", "--n-outer", "10",
                            "--n-inner", "10", "--out", dir_.string(), "--quiet"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(dir_ / "achievability.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "T,mi_bits,mi_stderr,entropy_bits,ml_rate,ml_stderr,lasso_rate,lasso_stderr,ols_rate,"
            "ols_stderr");
}

TEST_F(CliTest, ReplayIsByteIdenticalAcrossWorkers) {
  ASSERT_EQ(run_cli({"curvature-sweep", "--alpha-grid", "0,1", "--trials", "12", "--out",
                     dir_.string(), "--workers", "1", "--quiet"})
                .code,
            0);
  const std::string first = slurp(dir_ / "curvature-sweep.csv");
  for (const char* workers : {"1", "4"}) {
    const fs::path other = dir_ / (std::string("w") + workers);
    const CliRun r = run_cli({"replay", (dir_ / "curvature-sweep.manifest.json").string(),
                              "--workers", workers, "--out", other.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(other / "curvature-sweep.csv"), first);
  }
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  std::ofstream(dir_ / "run.ini") << "[bounds]\nd = 100\nk = 5\nt = 10\n";
  const CliRun r = run_cli({"--config", (dir_ / "run.ini").string(), "bounds", "--k", "4", "--out",
                            dir_.string(), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir_ / "bounds.json"));
  EXPECT_EQ(j[0]["d"], 100);
  EXPECT_EQ(j[0]["k"], 4);
  EXPECT_EQ(j[0]["T"], 10);
}

TEST_F(CliTest, EnvironmentSetsDefaultOutputDirectory) {
  ::setenv(std::string(kOutputDirEnv).c_str(), dir_.string().c_str(), 1);
  const CliRun r = run_cli({"bounds"});
  ::unsetenv(std::string(kOutputDirEnv).c_str());
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(dir_ / "bounds.csv");
  // The default budget puts d_crit beyond 2^62: the cell is left blank.
  EXPECT_EQ(csv.back(), '\n');
  EXPECT_EQ(csv[csv.size() - 2], ',');
}

TEST_F(CliTest, RuntimeErrorsExitOne) {
  // Unusable manifests are usage errors.
  std::ofstream(dir_ / "bad.json") << "{\"subcommand\": \"bounds\", \"params\": {\"k\": \"0\"}}";
  EXPECT_EQ(run_cli({"replay", (dir_ / "bad.json").string()}).code, 2);
  std::ofstream(dir_ / "broken.json") << "{";
  EXPECT_EQ(run_cli({"replay", (dir_ / "broken.json").string()}).code, 2);
  // An output directory that cannot be created is a runtime failure.
  std::ofstream(dir_ / "blocker") << "x";
  const CliRun r = run_cli({"bounds", "--out", (dir_ / "blocker" / "sub").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
}

}  // namespace
}  // namespace qchannel::cli
