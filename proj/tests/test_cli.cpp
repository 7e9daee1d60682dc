#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "ashield/cli.hpp"
#include "ashield/io.hpp"

using namespace ashield;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / ("ashield-cli-" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Redirect fd 1 to a file around an in-process cli invocation.
int run_capturing_stdout(const std::vector<std::string>& args, const std::string& out_path) {
  std::fflush(stdout);
  const int saved = dup(1);
  FILE* f = std::fopen(out_path.c_str(), "wb");
  REQUIRE(f != nullptr);
  dup2(fileno(f), 1);
  const int code = cli::run(args);
  std::fflush(stdout);
  dup2(saved, 1);
  close(saved);
  std::fclose(f);
  return code;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("gen-data writes the requested dataset") {
  const std::string out = temp_path("gen.jsonl");
  const int code = cli::run({"gen-data", "--out", out, "--clips-per-family", "10",
                             "--seed", "0"});
  CHECK(code == 0);
  const DatasetManifest m = read_dataset(out);
  CHECK(m.clips.size() == 30);
  fs::remove(out);
}

TEST_CASE("unknown flags and commands are config errors") {
  CHECK(cli::run({"gen-data", "--out", "/tmp/x.jsonl", "--bogus", "1"}) == 2);
  CHECK(cli::run({"frobnicate"}) == 2);
  CHECK(cli::run({"gen-data"}) == 2);                      // missing --out
  CHECK(cli::run({"train", "--data"}) == 2);               // dangling value
  CHECK(cli::run({"gen-data", "--out", "/tmp/x.jsonl", "--clips-per-family", "ten"}) == 2);
}

TEST_CASE("missing input files are io errors") {
  CHECK(cli::run({"train", "--data", temp_path("nope.jsonl"), "--out",
                  temp_path("nope-ck.json"), "--steps", "1"}) == 3);
  CHECK(cli::run({"eval", "--checkpoint", temp_path("nope-ck.json"), "--data",
                  temp_path("nope.jsonl"), "--out", temp_path("nope-r.json")}) == 3);
}

TEST_CASE("gen-train-eval pipeline produces a report") {
  const std::string data = temp_path("pipe.jsonl");
  const std::string ckpt = temp_path("pipe-ck.json");
  const std::string metrics = temp_path("pipe-metrics.jsonl");
  const std::string report = temp_path("pipe-report.json");
  const std::string roc = temp_path("pipe-roc.txt");

  CHECK(cli::run({"gen-data", "--out", data, "--clips-per-family", "20", "--seed", "0"}) == 0);
  CHECK(cli::run({"train", "--data", data, "--out", ckpt, "--metrics", metrics, "--steps",
                  "5", "--seed", "0"}) == 0);
  CHECK(cli::run({"eval", "--checkpoint", ckpt, "--data", data, "--protocol", "in_domain",
                  "--out", report, "--emit-roc", roc}) == 0);

  const auto doc = nlohmann::json::parse(slurp(report));
  CHECK(doc.contains("auc"));
  CHECK(doc.contains("config"));
  CHECK(doc.at("n_fake").get<int>() == 3);

  // roc file: two columns, starts at 0 0 and ends at 1 1
  std::ifstream rin(roc);
  double a, b, last_a = -1, last_b = -1;
  bool first = true;
  while (rin >> a >> b) {
    if (first) {
      CHECK(a == 0.0);
      CHECK(b == 0.0);
      first = false;
    }
    last_a = a;
    last_b = b;
  }
  CHECK(last_a == 1.0);
  CHECK(last_b == 1.0);

  const auto rows = read_metrics(metrics);
  CHECK(rows.size() == 5);

  for (const auto& p : {data, ckpt, metrics, report, roc}) fs::remove(p);
}

TEST_CASE("config files feed flags with flag precedence") {
  const std::string cfg_path = temp_path("cfg.json");
  {
    std::ofstream out(cfg_path);
    out << R"({"clips-per-family": 10, "seed": 3})";
  }
  const std::string out1 = temp_path("cfg-a.jsonl");
  CHECK(cli::run({"gen-data", "--out", out1, "--config", cfg_path}) == 0);
  CHECK(read_dataset(out1).clips.size() == 30);

  // the flag wins over the file
  const std::string out2 = temp_path("cfg-b.jsonl");
  CHECK(cli::run({"gen-data", "--out", out2, "--config", cfg_path, "--clips-per-family",
                  "20"}) == 0);
  CHECK(read_dataset(out2).clips.size() == 60);

  // unknown keys in the file are rejected, not ignored
  {
    std::ofstream out(cfg_path);
    out << R"({"clips-per-family": 10, "turbo": true})";
  }
  CHECK(cli::run({"gen-data", "--out", out1, "--config", cfg_path}) == 2);

  for (const auto& p : {cfg_path, out1, out2}) fs::remove(p);
}

TEST_CASE("inspect prints a stable diagnostic table") {
  const std::string data = temp_path("ins.jsonl");
  REQUIRE(cli::run({"gen-data", "--out", data, "--clips-per-family", "10", "--seed", "0"}) == 0);
  const DatasetManifest m = read_dataset(data);

  std::string real_id, fake_id;
  for (const auto& c : m.clips) {
    if (c.label == Label::real && real_id.empty()) real_id = c.id;
    if (c.label == Label::fake && fake_id.empty()) fake_id = c.id;
  }

  const std::string cap1 = temp_path("ins1.txt");
  const std::string cap2 = temp_path("ins2.txt");
  CHECK(run_capturing_stdout({"inspect", "--data", data, "--id", real_id}, cap1) == 0);
  CHECK(run_capturing_stdout({"inspect", "--data", data, "--id", real_id}, cap2) == 0);
  CHECK(slurp(cap1) == slurp(cap2));  // byte-identical across runs
  CHECK(slurp(cap1).find("residual-norm") != std::string::npos);

  // the real clip's residual column dominates the fake clip's
  const std::string cap3 = temp_path("ins3.txt");
  CHECK(run_capturing_stdout({"inspect", "--data", data, "--id", fake_id}, cap3) == 0);
  const auto mean_residual = [](const std::string& text) {
    std::istringstream in(text);
    std::string line;
    double sum = 0.0;
    int n = 0;
    while (std::getline(in, line)) {
      std::istringstream row(line);
      int frame;
      double norm, dist, res;
      int center;
      if (row >> frame >> norm >> center >> dist >> res) {
        sum += res;
        ++n;
      }
    }
    return n > 0 ? sum / n : 0.0;
  };
  CHECK(mean_residual(slurp(cap1)) > mean_residual(slurp(cap3)));

  CHECK(cli::run({"inspect", "--data", data, "--id", "no-such-clip"}) == 2);

  for (const auto& p : {data, cap1, cap2, cap3}) fs::remove(p);
}

TEST_SUITE_END();
