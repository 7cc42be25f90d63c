/*
 * Copyright 2026 The levshap Authors.
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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "levshap/bench.hpp"
#include "levshap/cli.hpp"
#include "levshap/errors.hpp"

using namespace levshap;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "levshap");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("levshap_test_" + name);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("m grid parsing") {
    CHECK(parse_m_grid("5n,10n", 12) == std::vector<std::int64_t>{60, 120});
    CHECK(parse_m_grid("2^n, 40, n, 3*n", 6) == std::vector<std::int64_t>{64, 40, 6, 18});
    CHECK_THROWS_AS(parse_m_grid("5x", 6), DomainError);
    CHECK_THROWS_AS(parse_m_grid("", 6), DomainError);
    CHECK_THROWS_AS(parse_m_grid("0", 6), DomainError);
    CHECK(parse_real_grid("0,5e-3,1") == std::vector<double>{0.0, 5e-3, 1.0});
    CHECK_THROWS_AS(parse_real_grid("0,abc"), DomainError);
  }

  TEST_CASE("estimate on an additive game") {
    const Run r = cli({"estimate", "--game", "additive:1,2,3", "--estimator", "leverage", "--m", "64",
                       "--seed", "0"});
    CHECK(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    const auto phi = j["phi"].get<std::vector<double>>();
    REQUIRE(phi.size() == 3);
    CHECK(phi[0] == doctest::Approx(1.0));
    CHECK(phi[1] == doctest::Approx(2.0));
    CHECK(phi[2] == doctest::Approx(3.0));
    const auto diag = nlohmann::json::parse(r.err);
    CHECK(diag["evals_used"] == 8);
    CHECK(diag.contains("c"));
    CHECK(diag.contains("rows_per_size"));
  }

  TEST_CASE("estimate is reproducible") {
    const std::vector<std::string> args{"estimate", "--game", "interaction:3", "--n", "12",
                                        "--estimator", "kernel", "--m", "120", "--seed", "4"};
    const Run a = cli(args);
    const Run b = cli(args);
    CHECK(a.code == kExitOk);
    CHECK(a.out == b.out);
  }

  TEST_CASE("estimate over the wire protocol") {
    const std::string server = std::string(LEVSHAP_PYTHON) + " " LEVSHAP_FIXTURE_DIR "/additive_server.py 1,2,3,4,5,6,7,8";
    const auto diag_path = temp_path("diag.json");
    const Run r = cli({"estimate", "--game", "external:" + server, "--n", "8", "--m", "80",
                       "--diagnostics", diag_path.string()});
    CHECK(r.code == kExitOk);
    const auto phi = nlohmann::json::parse(r.out)["phi"].get<std::vector<double>>();
    for (int i = 0; i < 8; ++i) CHECK(phi[static_cast<std::size_t>(i)] == doctest::Approx(i + 1.0));
    CHECK(r.err.empty());
    CHECK(nlohmann::json::parse(slurp(diag_path))["solver"] == "projected");
    std::filesystem::remove(diag_path);
  }

  TEST_CASE("exact subcommand") {
    const Run r = cli({"exact", "--game", "glove"});
    CHECK(r.code == kExitOk);
    const auto phi = nlohmann::json::parse(r.out)["phi"].get<std::vector<double>>();
    CHECK(phi[2] == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("usage errors exit with 2") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"estimate", "--game", "additive:1,2,3"}).code == kExitUsage);
    CHECK(cli({"estimate", "--game", "additive:1,2,3", "--m", "2"}).code == kExitUsage);
    CHECK(cli({"estimate", "--game", "additive:1,2,3", "--m", "8", "--paired", "maybe"}).code == kExitUsage);
    CHECK(cli({"estimate", "--game", "bogus", "--m", "8"}).code == kExitUsage);
    CHECK(cli({"estimate", "--game", "additive:1,2,3", "--m", "8", "--estimator", "perm"}).code == kExitUsage);
    CHECK(cli({"estimate", "--game", "additive:1,2,3", "--m", "8", "--paired", "off",
               "--replacement", "without"}).code == kExitUsage);
    CHECK(cli({"sweep-size", "--game", "interaction:0", "--n", "8"}).code == kExitUsage);
    CHECK(cli({"sweep-size", "--out", temp_path("x.csv").string(), "--m-grid", "5q"}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
  }

  TEST_CASE("runtime failures exit with 1") {
    const std::string server = std::string(LEVSHAP_PYTHON) + " " LEVSHAP_FIXTURE_DIR "/additive_server.py 1,2,3 0 --fault exit";
    const Run r = cli({"estimate", "--game", "external:" + server, "--n", "3", "--m", "8"});
    CHECK(r.code == kExitFailure);
    CHECK(r.err.find("error") != std::string::npos);
    CHECK(cli({"exact", "--game", "interaction:0", "--n", "23"}).code == kExitFailure);
  }

  TEST_CASE("sweep-size writes one row per cell, byte-identically") {
    const auto a = temp_path("a.csv");
    const auto b = temp_path("b.csv");
    const auto summary = temp_path("summary.json");
    const std::vector<std::string> base{"sweep-size", "--game", "interaction:0", "--n", "10",
                                        "--seeds", "3", "--m-grid", "5n,10n"};
    auto args_a = base;
    args_a.insert(args_a.end(), {"--out", a.string(), "--summary", summary.string(), "--jobs", "2"});
    auto args_b = base;
    args_b.insert(args_b.end(), {"--out", b.string()});
    CHECK(cli(args_a).code == kExitOk);
    CHECK(cli(args_b).code == kExitOk);
    const std::string csv = slurp(a);
    CHECK(csv == slurp(b));
    std::istringstream in(csv);
    const auto rows = read_csv(in);
    CHECK(rows.size() == 3 * 2 * 3);
    CHECK(rows[0].m == 50);
    CHECK(nlohmann::json::parse(slurp(summary)).size() == 3 * 2 * 2);
    for (const auto& p : {a, b, summary}) std::filesystem::remove(p);
  }

  TEST_CASE("sweep-noise, sweep-gamma and ablate") {
    const auto out = temp_path("sweep.csv");
    CHECK(cli({"sweep-noise", "--n", "8", "--seeds", "2", "--m-grid", "10n", "--sigma-grid", "0,0.1",
               "--estimator", "leverage", "--out", out.string()}).code == kExitOk);
    {
      std::ifstream f(out);
      CHECK(read_csv(f).size() == 2 * 2);
    }
    CHECK(cli({"sweep-gamma", "--n", "8", "--seeds", "2", "--m-grid", "10n", "--gamma-grid", "0.1,1",
               "--out", out.string()}).code == kExitOk);
    {
      std::ifstream f(out);
      const auto rows = read_csv(f);
      CHECK(rows.size() == 2 * 3 * 2);
      CHECK(rows[0].gamma.has_value());
    }
    CHECK(cli({"ablate", "--n", "8", "--seeds", "2", "--m-grid", "10n", "--out", out.string()}).code == kExitOk);
    {
      std::ifstream f(out);
      CHECK(read_csv(f).size() == 6 * 2);
    }
    CHECK(cli({"sweep-gamma", "--n", "16", "--out", out.string()}).code == kExitUsage);
    std::filesystem::remove(out);
  }

  TEST_CASE("config file") {
    const auto cfg = temp_path("sweep.ini");
    const auto out = temp_path("cfg.csv");
    {
      std::ofstream f(cfg);
      f << "# sweep settings\n"
        << "game = \"additive:1,2,3,4,5\"\n"
        << "seeds = 2\n"
        << "m-grid = \"2n,4n\"\n"
        << "out = \"" << out.string() << "\"\n";
    }
    const Run r = cli({"sweep-size", "--config", cfg.string()});
    CHECK(r.code == kExitOk);
    std::ifstream f(out);
    const auto rows = read_csv(f);
    CHECK(rows.size() == 3 * 2 * 2);
    for (const auto& row : rows) CHECK(*row.l2_error <= 1e-10);
    std::filesystem::remove(cfg);
    std::filesystem::remove(out);
  }

  TEST_CASE("verify") {
    const Run ok = cli({"verify", "--max-n", "7"});
    CHECK(ok.code == kExitOk);
    CHECK(ok.out.find("FAIL") == std::string::npos);
    const Run bad = cli({"verify", "--max-n", "5", "--corrupt-weights"});
    CHECK(bad.code == kExitFailure);
    CHECK(bad.err.find("shapley_equals_regression") != std::string::npos);
    CHECK(cli({"verify", "--max-n", "40"}).code == kExitUsage);
  }
}
