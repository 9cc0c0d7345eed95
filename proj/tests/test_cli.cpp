#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#ifndef BALCL_CLI_PATH
#error "BALCL_CLI_PATH must point at the CLI binary"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(BALCL_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe)) res.out.append(buf, got);
  int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

fs::path work_dir() {
  static fs::path dir = [] {
    auto d = fs::temp_directory_path() / "balcl_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int line_count(const std::string& text) {
  int lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  return lines;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

}  // namespace

TEST_CASE("gen star writes a 31x31 matrix CSV plus sidecar") {
  auto out = work_dir() / "star.csv";
  auto res = run_cli("gen star --nl 3 --out " + out.string());
  CHECK(res.exit_code == 0);
  REQUIRE(fs::exists(out));
  CHECK(line_count(slurp(out)) == 31);  // no header in matrix form
  auto meta = json::parse(slurp(out.string() + ".meta.json"));
  CHECK(meta.contains("config"));
  CHECK(meta["n_points"] == 31);
}

TEST_CASE("gen groups and twogauss produce loadable inputs") {
  auto groups = work_dir() / "groups.csv";
  CHECK(run_cli("gen groups --k-prime 3 --nl 2 --out " + groups.string()).exit_code == 0);
  CHECK(line_count(slurp(groups)) == 9);

  auto tg = work_dir() / "tg.csv";
  CHECK(run_cli("gen twogauss --n 300 --seed 5 --out " + tg.string()).exit_code == 0);
  CHECK(line_count(slurp(tg)) == 301);  // header + rows
}

TEST_CASE("validate distinguishes metrics from non-metrics") {
  auto star = work_dir() / "star.csv";
  if (!fs::exists(star)) run_cli("gen star --nl 3 --out " + star.string());
  auto good = run_cli("validate --in " + star.string());
  CHECK(good.exit_code == 0);
  CHECK(good.out.find("metric OK") != std::string::npos);

  auto bad = work_dir() / "bad.csv";
  write_file(bad, "0,1,5\n1,0,1\n5,1,0\n");
  auto res = run_cli("validate --in " + bad.string());
  CHECK(res.exit_code == 2);
  CHECK(res.out.find("not a metric") != std::string::npos);
}

TEST_CASE("cluster lp-round on groups is exact, JSON echoes the config") {
  auto groups = work_dir() / "groups.csv";
  if (!fs::exists(groups)) run_cli("gen groups --k-prime 3 --nl 2 --out " + groups.string());
  auto out = work_dir() / "lp.json";
  std::string cmd = "cluster --in " + groups.string() +
                    " --algo lp-round --objective kmedian --k 6 --p 2 --ell 0.1 --cap-l 0.4" +
                    " --seed 3 --out " + out.string();
  auto res = run_cli(cmd);
  REQUIRE(res.exit_code == 0);
  auto j = json::parse(slurp(out));
  CHECK(j["value"].get<double>() == doctest::Approx(0.0));
  CHECK(j["objective"] == "kmedian");
  REQUIRE(j.contains("config"));
  CHECK(j["config"]["k"] == 6);
  CHECK(j["config"]["p"] == 2);
  REQUIRE(j.contains("violations"));
  CHECK(j["violations"]["max_upper_factor"].get<double>() <= 1.0 + 1e-7);

  SUBCASE("rerunning overwrites with identical bytes") {
    auto first = slurp(out);
    auto res2 = run_cli(cmd);
    REQUIRE(res2.exit_code == 0);
    CHECK(slurp(out) == first);
  }
}

TEST_CASE("cluster kmeanspp emits a feasible assignment with CSV sidecar") {
  auto tg = work_dir() / "tg.csv";
  if (!fs::exists(tg)) run_cli("gen twogauss --n 300 --seed 5 --out " + tg.string());
  auto out = work_dir() / "km.csv";
  auto res = run_cli("cluster --in " + tg.string() +
                     " --algo kmeanspp --k 2 --ell 0.1 --cap-l 0.95 --seed 1 --format csv --out " +
                     out.string());
  REQUIRE(res.exit_code == 0);
  auto text = slurp(out);
  CHECK(text.rfind("point,center,mult", 0) == 0);
  CHECK(line_count(text) == 301);
  auto meta = json::parse(slurp(out.string() + ".meta.json"));
  CHECK(meta.contains("value"));
  CHECK(meta.contains("violations"));
}

TEST_CASE("oracle solves the groups instance exactly") {
  auto groups = work_dir() / "groups.csv";
  if (!fs::exists(groups)) run_cli("gen groups --k-prime 3 --nl 2 --out " + groups.string());
  auto out = work_dir() / "oracle.json";
  auto res = run_cli("oracle --in " + groups.string() +
                     " --objective kmedian --k 3 --ell 0.2 --cap-l 1.0 --out " + out.string());
  REQUIRE(res.exit_code == 0);
  auto j = json::parse(slurp(out));
  CHECK(j["value"].get<double>() == doctest::Approx(0.0));
}

TEST_CASE("dispatch fit and route round-trip") {
  auto tg = work_dir() / "tg.csv";
  if (!fs::exists(tg)) run_cli("gen twogauss --n 300 --seed 5 --out " + tg.string());
  auto model = work_dir() / "model.bin";
  auto res = run_cli("dispatch fit --in " + tg.string() +
                     " --algo kmeanspp --k 2 --sample-size 100 --seed 4 --out " + model.string());
  REQUIRE(res.exit_code == 0);
  REQUIRE(fs::exists(model));
  auto meta = json::parse(slurp(model.string() + ".meta.json"));
  CHECK(meta["type"] == "kmeanspp-nn");

  auto routes = work_dir() / "routes.csv";
  auto res2 = run_cli("dispatch route --model " + model.string() + " --in " + tg.string() +
                      " --format csv --out " + routes.string());
  REQUIRE(res2.exit_code == 0);
  auto text = slurp(routes);
  CHECK(text.rfind("c0", 0) == 0);
  CHECK(line_count(text) == 301);

  SUBCASE("baseline dispatchers fit and route too") {
    for (std::string algo : {"random", "bpt", "lsh"}) {
      auto m = work_dir() / (algo + ".bin");
      std::string extra = (algo == "bpt") ? " --k 2" : " --k 3";
      auto fit = run_cli("dispatch fit --in " + tg.string() + " --algo " + algo + extra +
                         " --sample-size 64 --seed 6 --out " + m.string());
      REQUIRE(fit.exit_code == 0);
      auto rt = run_cli("dispatch route --model " + m.string() + " --in " + tg.string() +
                        " --format json --out " + (work_dir() / (algo + ".json")).string());
      REQUIRE(rt.exit_code == 0);
      auto j = json::parse(slurp(work_dir() / (algo + ".json")));
      CHECK(j["routes"].size() == 300);
    }
  }
}

TEST_CASE("simulate runs a small experiment from a config file") {
  auto cfgpath = work_dir() / "sim.json";
  json cfg = {
      {"train", {{"gen", "twogauss"}, {"n", 300}, {"seed", 1}}},
      {"test", {{"gen", "twogauss"}, {"n", 150}, {"seed", 2}}},
      {"ks", {2}},
      {"dispatcher", "kmeanspp"},
      {"subsample", 100},
      {"lambda", 0.1},
      {"epochs", 40},
      {"seed", 8},
  };
  write_file(cfgpath, cfg.dump());
  auto out = work_dir() / "sim_out.json";
  auto res = run_cli("simulate --config " + cfgpath.string() + " --out " + out.string());
  REQUIRE(res.exit_code == 0);
  auto j = json::parse(slurp(out));
  REQUIRE(j.contains("results"));
  REQUIRE(j["results"].size() == 1);
  auto& r = j["results"][0];
  CHECK(r["k"] == 2);
  double acc = r["accuracy"].get<double>();
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);
  CHECK(r.contains("cluster_sizes"));
}

TEST_CASE("exit codes") {
  SUBCASE("unknown subcommand is a usage error") {
    CHECK(run_cli("frobnicate").exit_code == 1);
  }

  SUBCASE("missing required option is a usage error") {
    CHECK(run_cli("cluster --algo kmeanspp --k 2").exit_code == 1);
  }

  SUBCASE("invalid parameter combination is reported as bad input") {
    auto tg = work_dir() / "tg.csv";
    if (!fs::exists(tg)) run_cli("gen twogauss --n 300 --seed 5 --out " + tg.string());
    // k*L < p: rejected by constraint validation.
    auto res = run_cli("cluster --in " + tg.string() +
                       " --algo lp-round --k 3 --p 2 --ell 0.1 --cap-l 0.6");
    CHECK(res.exit_code == 1);
  }

  SUBCASE("provably infeasible problems exit 2") {
    auto chain = work_dir() / "chain.csv";
    std::string rows = "f0\n";
    for (int j = 0; j < 8; ++j) rows += std::to_string(j) + ".0\n";
    write_file(chain, rows);
    auto res = run_cli("cluster --in " + chain.string() +
                       " --algo kcenter-stable --k 2 --ell 0.25 --cap-l 0.75");
    CHECK(res.exit_code == 2);
  }

  SUBCASE("missing input file is bad input") {
    CHECK(run_cli("validate --in /nonexistent/nope.csv").exit_code == 1);
  }
}
