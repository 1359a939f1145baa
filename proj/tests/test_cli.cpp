/*
 * Copyright (c) 2026, The fatal-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
*/


#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef FATALSIM_PATH
#error "FATALSIM_PATH must point at the fatalsim binary"
#endif
#ifndef FATAL_SCENARIOS
#error "FATAL_SCENARIOS must point at the scenarios directory"
#endif

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result sh(const std::string& args) {
  const std::string cmd = std::string(FATALSIM_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::filesystem::path scratch() {
  auto p = std::filesystem::temp_directory_path() / "fatalsim_cli_test";
  std::filesystem::create_directories(p);
  return p;
}

TEST(Cli, SolveWritesCheckableAssignment) {
  const auto file = scratch() / "assign.txt";
  const Result s = sh("solve --theta 1.2 --d 1000 -o " + file.string());
  ASSERT_EQ(s.code, 0) << s.out;
  const Result c = sh("check " + file.string());
  EXPECT_EQ(c.code, 0) << c.out;
}

TEST(Cli, SolveInfeasibleExitsTwo) {
  const Result s = sh("solve --theta 1.3 -o -");
  EXPECT_EQ(s.code, 2);
  EXPECT_NE(s.out.find("1.247"), std::string::npos) << s.out;
}

TEST(Cli, CheckReportsBrokenRelation) {
  const auto file = scratch() / "bad.txt";
  const Result s = sh("solve --theta 1.1 -o " + file.string());
  ASSERT_EQ(s.code, 0);
  std::ifstream in(file);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  in.close();
  const auto pos = text.find("T2 = ");
  ASSERT_NE(pos, std::string::npos) << text;
  const auto eol = text.find('\n', pos);
  text.replace(pos, eol - pos, "T2 = 1");
  std::ofstream(file) << text;
  const Result c = sh("check " + file.string());
  EXPECT_NE(c.code, 0);
  EXPECT_NE(c.out.find("T2"), std::string::npos) << c.out;
}

TEST(Cli, SimulateThenVerifyAgree) {
  const auto dir = scratch();
  const auto trace = dir / "ff.trace";
  const auto report = dir / "ff.report";
  const Result s = sh("simulate " + std::string(FATAL_SCENARIOS) +
                      "/faultfree.cfg --seed 5 --trace " + trace.string() +
                      " --report " + report.string());
  ASSERT_EQ(s.code, 0) << s.out;
  EXPECT_EQ(s.out.rfind("PASS", 0), 0u) << s.out;
  const Result v = sh("verify " + trace.string() + " --report -");
  EXPECT_EQ(v.code, 0);
  std::ifstream in(report);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_NE(v.out.find(text), std::string::npos);
}

TEST(Cli, SweepPrintsTable) {
  const Result s = sh("sweep " + std::string(FATAL_SCENARIOS) +
                      "/faultfree.cfg --trials 4 --k 1,2 --jobs 2");
  EXPECT_EQ(s.code, 0) << s.out;
  EXPECT_NE(s.out.find("k"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(sh("frobnicate").code, 2);
  EXPECT_EQ(sh("simulate /nonexistent/x.cfg").code, 2);
  EXPECT_EQ(sh("verify /nonexistent/x.trace").code, 2);
}

TEST(Cli, TablesListsMachines) {
  const Result t = sh("tables");
  EXPECT_EQ(t.code, 0);
  EXPECT_NE(t.out.find("core"), std::string::npos);
  EXPECT_NE(t.out.find("accept"), std::string::npos);
}

}  // namespace
