#include "doctest.h"

#include "fracperim/cli.hpp"

#include "json.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "fracperim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = fracperim::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("fracperim_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string source_config(const std::string& name) { return std::string(FRACPERIM_SOURCE_DIR) + "/configs/" + name; }

std::string digest_of(const std::string& config_path, std::vector<std::string> extra = {}) {
  std::vector<std::string> args = {"perimeter", "--config", config_path};
  args.insert(args.end(), extra.begin(), extra.end());
  const Run r = run(args);
  REQUIRE(r.code == 0);
  return json::parse(r.out).at("config_digest").get<std::string>();
}

json without_clock(json j) {
  j.erase("wall_clock_seconds");
  return j;
}

bool single_error_line(const std::string& err, const std::string& kind) {
  return err.rfind("error: " + kind + ": ", 0) == 0 && err.find('\n') == err.size() - 1;
}

}  // namespace

TEST_CASE("perimeter of the unit interval") {
  const Run r = run({"perimeter", "--config", source_config("interval_perimeter.json")});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("command") == "perimeter");
  CHECK(j.at("results").at("estimates").at(0).at("value").get<double>() == 8.0);
  CHECK(j.at("config_digest").get<std::string>().size() == 16);
}

TEST_CASE("sweep CSV rescaled column is 2/s") {
  const Run r = run({"sweep", "--config", source_config("interval_sweep.json"), "--format", "csv"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "s,value,std_error,rescaled,target");
  int rows = 0;
  while (std::getline(in, line)) {
    double s, value, err, rescaled, target;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &s, &value, &err, &rescaled, &target) == 5);
    CHECK(rescaled == doctest::Approx(2.0 / s).epsilon(1e-12));
    CHECK(target == 2.0);
    ++rows;
  }
  CHECK(rows == 7);
}

TEST_CASE("moment-norm and lemmas") {
  const Run m = run({"moment-norm", "--config", source_config("moment_norm.json")});
  REQUIRE(m.code == 0);
  for (const auto& row : json::parse(m.out).at("results").at("values"))
    CHECK(row.at("value").get<double>() == doctest::Approx(2.0).epsilon(1e-12));
  const Run b = run({"lemmas", "--config", source_config("boundary_term.json")});
  CHECK(b.code == 0);
  CHECK(json::parse(b.out).at("results").at("verdict") == "pass");
}

TEST_CASE("kernel validation exit codes") {
  CHECK(run({"validate-kernel", "--config", source_config("euclidean_kernel.json")}).code == 0);
  const Run bad = run({"validate-kernel", "--config", source_config("asymmetric_kernel.json")});
  CHECK(bad.code == 1);
  CHECK(single_error_line(bad.err, "verdict"));
  CHECK(bad.err.find("h.0") != std::string::npos);
}

TEST_CASE("usage and config errors") {
  const Run none = run({"perimeter"});
  CHECK(none.code == 2);
  CHECK(single_error_line(none.err, "usage"));
  CHECK(run({"frobnicate", "--config", source_config("interval_perimeter.json")}).code == 2);
  CHECK(run({"perimeter", "--config", "/nonexistent/config.json"}).code == 2);
  CHECK(run({"perimeter", "--config", source_config("interval_perimeter.json"), "--threads", "0"}).code == 2);

  const std::string typo = write_file("typo.json", "{\n  \"dim\": 1,\n  \"kernl\": {}\n}\n");
  const Run t = run({"perimeter", "--config", typo});
  CHECK(t.code == 2);
  CHECK(single_error_line(t.err, "config"));
  CHECK(t.err.find("line 3, column 3") != std::string::npos);
  CHECK(t.err.find("kernl") != std::string::npos);

  const std::string broken = write_file("broken.json", "{\n  \"dim\": 1,\n  \"s\": 0.5\n");
  const Run b = run({"perimeter", "--config", broken});
  CHECK(b.code == 2);
  CHECK(single_error_line(b.err, "config"));
  CHECK(b.err.find("line 4") != std::string::npos);

  const std::string expr = write_file(
      "expr.json", R"({"dim": 2, "kernel": {"gauge": "expression", "expression": "1 + * x1", "c": 2}})");
  const Run e = run({"validate-kernel", "--config", expr});
  CHECK(e.code == 2);
  CHECK(e.err.find("expression column") != std::string::npos);

  const std::string mask = write_file("mask_only.json", R"({"dim": 2, "minimize": {"cells": 8, "mask_file": "m.txt"}})");
  const Run mo = run({"minimize", "--config", mask});
  CHECK(mo.code == 2);
  CHECK(mo.err.find("flat_target") != std::string::npos);

  const std::string no_set = write_file("no_set.json", R"({"dim": 1, "s": 0.5})");
  const Run ns = run({"perimeter", "--config", no_set});
  CHECK(ns.code == 2);
  CHECK(single_error_line(ns.err, "config"));
}

TEST_CASE("config digest is canonical") {
  const std::string base = digest_of(source_config("interval_perimeter.json"));
  const std::string reordered = write_file(
      "reordered.json",
      "{\"s\":0.5,\"engine\":{\"engine\":\"exact1d\"},\n\n  \"set\": {\"intervals\": [[0, 1.0]], \"type\": \"intervals\"}, "
      "\"dim\": 1}");
  CHECK(digest_of(reordered) == base);
  const std::string defaults = write_file(
      "defaults.json",
      R"({"dim": 1, "set": {"type": "intervals", "intervals": [[0, 1]]}, "s": 0.5,
          "engine": {"engine": "exact1d", "seed": 1}, "domain": "whole"})");
  CHECK(digest_of(defaults) == base);
  const std::string changed = write_file(
      "changed.json", R"({"dim": 1, "set": {"type": "intervals", "intervals": [[0, 2]]}, "s": 0.5, "engine": {"engine": "exact1d"}})");
  CHECK(digest_of(changed) != base);
  CHECK(digest_of(source_config("interval_perimeter.json"), {"--threads", "3"}) == base);
  CHECK(digest_of(source_config("interval_perimeter.json"), {"--seed", "99"}) != base);
}

TEST_CASE("repeated runs are identical apart from the clock") {
  const std::string cfg = source_config("disk_perimeter.json");
  const json a = json::parse(run({"perimeter", "--config", cfg, "--threads", "1"}).out);
  const json b = json::parse(run({"perimeter", "--config", cfg, "--threads", "1"}).out);
  const json c = json::parse(run({"perimeter", "--config", cfg, "--threads", "3"}).out);
  CHECK(without_clock(a).dump() == without_clock(b).dump());
  CHECK(without_clock(a).dump() == without_clock(c).dump());
}

TEST_CASE("output directory") {
  const fs::path out = scratch_dir() / "out_perimeter";
  const Run r = run({"perimeter", "--config", source_config("interval_perimeter.json"), "--out", out.string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "perimeter.json"));
  CHECK(fs::exists(out / "perimeter.csv"));
}

TEST_CASE("minimize with a mask file") {
  // 8 free cells plus a four-cell frame on each side: 16 x 16, lower half filled
  std::string text;
  for (int y = 0; y < 16; ++y) text += std::string(16, y < 8 ? '0' : '1') + "\n";
  write_file("half.txt", text);
  const std::string cfg = write_file(
      "mask.json",
      R"({"dim": 2, "engine": {"seed": 3},
          "minimize": {"cells": 8, "mask_file": "half.txt", "flat_target": 2.0, "s_list": [0.6], "anneal": true}})");
  const fs::path out = scratch_dir() / "out_minimize";
  const Run r = run({"minimize", "--config", cfg, "--out", out.string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "minimize.csv"));
  bool snapshot = false;
  for (const auto& e : fs::directory_iterator(out)) snapshot = snapshot || e.path().filename().string().rfind("occupancy_", 0) == 0;
  CHECK(snapshot);

  write_file("short.txt", "0101\n");
  const std::string bad = write_file(
      "mask_bad.json", R"({"dim": 2, "minimize": {"cells": 8, "mask_file": "short.txt", "flat_target": 2.0, "s_list": [0.6]}})");
  CHECK(run({"minimize", "--config", bad}).code == 2);
}

TEST_CASE("installed binary") {
  const std::string cmd = std::string(FRACPERIM_CLI_PATH) + " perimeter --format csv --config " +
                          source_config("interval_perimeter.json") + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string text;
  char buf[256];
  while (std::fgets(buf, sizeof buf, pipe)) text += buf;
  const int status = ::pclose(pipe);
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(text == "s,value,std_error,p1,p2,p1_error,p2_error\n0.5,8,0,8,0,0,0\n");

  FILE* bad = ::popen((std::string(FRACPERIM_CLI_PATH) + " --version >/dev/null 2>&1; " + FRACPERIM_CLI_PATH +
                       " perimeter --config /nonexistent.json 2>/dev/null")
                          .c_str(),
                      "r");
  REQUIRE(bad != nullptr);
  while (std::fgets(buf, sizeof buf, bad)) {
  }
  const int bad_status = ::pclose(bad);
  CHECK(WEXITSTATUS(bad_status) == 2);
}
