/*
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

#include <sys/wait.h>

#include <cstdlib>

#include "doctest.h"
#include "evobench/metrics.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

struct Cli {
  int code = -1;
  std::string out;
  std::string err;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

Cli cli(const evotest::TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = "cd " + quote(dir.path().string()) + " && EVOBENCH_REPORT_DIR= " + quote(EVOBENCH_CLI) +
                          " " + args + " >" + quote(out.string()) + " 2>" + quote(err.string());
  const int status = std::system(cmd.c_str());
  Cli c;
  c.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  c.out = evobench::read_text_file(out);
  c.err = evobench::read_text_file(err);
  return c;
}

const char* kSmall = " --users 60 --venues 40 --tweets 400 --checkins 300";

}  // namespace

TEST_CASE("gen is deterministic for a seed") {
  evotest::TempDir dir("cli-gen");
  REQUIRE(cli(dir, std::string("gen --seed 42 --out a") + kSmall).code == 0);
  const auto c = cli(dir, std::string("gen --seed 42 --out b") + kSmall);
  REQUIRE(c.code == 0);
  CHECK(c.out.find("twitter") != std::string::npos);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    const auto name = e.path().filename();
    if (name.extension() != ".jsonl") continue;
    ++files;
    CHECK_MESSAGE(evobench::read_text_file(e.path()) == evobench::read_text_file(dir / "b" / name), name);
  }
  CHECK(files == 3);
  REQUIRE(cli(dir, std::string("gen --seed 43 --out c") + kSmall).code == 0);
  CHECK(evobench::read_text_file(dir / "a" / "twitter.jsonl") != evobench::read_text_file(dir / "c" / "twitter.jsonl"));
}

TEST_CASE("run writes reports and prints the verdict") {
  evotest::TempDir dir("cli-run");
  const auto c = cli(dir,
                     "run --methodology query-evolution --analyst 1 --backend raw --views all --tweets 2000 "
                     "--checkins 1500 --data data --work work --out reports");
  INFO(c.err);
  REQUIRE(c.code == 0);
  CHECK(c.out.find("verdict: equal") != std::string::npos);
  CHECK(c.out.find("metric,cold,warm,delta,ratio") != std::string::npos);
  REQUIRE(fs::exists(dir / "reports"));
  std::size_t runs = 0;
  for (const auto& e : fs::directory_iterator(dir / "reports")) {
    ++runs;
    CHECK(fs::exists(e.path() / "report.json"));
    CHECK(fs::exists(e.path() / "report.csv"));
    CHECK(fs::exists(e.path() / "report.svg"));
    const auto reports = evobench::metrics::reports_from_json(evobench::read_text_file(e.path() / "report.json"));
    CHECK(reports.size() == 2);

    const auto masked = cli(dir, "report --mask-timing --format json " + quote((e.path() / "report.json").string()));
    REQUIRE(masked.code == 0);
    const auto back = evobench::metrics::reports_from_json(masked.out);
    REQUIRE(back.size() == 2);
    CHECK(back[1] == evobench::metrics::mask_timing(reports[1]));
    const auto csv = cli(dir, "report --format csv " + quote((e.path() / "report.json").string()));
    CHECK(csv.code == 0);
    CHECK(csv.out.rfind("response_seconds,", 0) == 0);
  }
  CHECK(runs == 1);
}

TEST_CASE("duplicate analyst order is a usage error") {
  evotest::TempDir dir("cli-order");
  const auto c = cli(dir, "run --methodology user-evolution --order 1,1,2,3,4,5,6,7");
  CHECK(c.code == 2);
  CHECK(c.err.find("duplicate") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "reports"));
}

TEST_CASE("bad arguments exit 2") {
  evotest::TempDir dir("cli-args");
  CHECK(cli(dir, "run --no-such-flag").code == 2);
  CHECK(cli(dir, "run --analyst 9").code == 2);
  CHECK(cli(dir, "run --methodology nope").code == 2);
  CHECK(cli(dir, "run --order 1,x").code == 2);
  CHECK(cli(dir, "frobnicate").code == 2);
  CHECK(cli(dir, "report").code == 2);
}

TEST_CASE("dump-plan prints the plan and its revision") {
  evotest::TempDir dir("cli-dump");
  const auto c = cli(dir, "dump-plan --analyst 1 --version 2 --signature");
  REQUIRE(c.code == 0);
  CHECK(c.out.find(";; signature ") != std::string::npos);
  CHECK(c.out.find(";; revision from v1 {") != std::string::npos);
  CHECK(c.out.find("join") != std::string::npos);
  CHECK(cli(dir, "dump-plan --analyst 1 --version 5").code != 0);
}
