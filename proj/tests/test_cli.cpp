#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "flowgran/corpus.hpp"

using namespace flowgran;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(FLOWGRAN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workspace {
  fs::path root;
  Workspace() : root(fs::temp_directory_path() / "flowgran_cli_test") {
    fs::remove_all(root);
    fs::create_directories(root / "mmd");
    std::ofstream(root / "mmd" / "d1.mmd")
        << "graph TD\nA[Start] --> B[Check]\nB --> C[End]\nB --> D[Retry]\nD --> B\n";
    std::ofstream(root / "mmd" / "d2.mmd")
        << "graph TD\nP[Open] --> Q[Read]\nQ --> R[Close]\n";
  }
  ~Workspace() { fs::remove_all(root); }
};

}  // namespace

TEST_CASE("usage errors exit 2, runtime errors exit 1, help exits 0") {
  CHECK(run("") == 2);
  CHECK(run("granulate") == 2);  // missing required options
  CHECK(run("no-such-command") == 2);
  CHECK(run("--help") == 0);
  CHECK(run("render --in /nonexistent.mmd --out /tmp/x.svg") == 1);
}

TEST_CASE("render writes an svg file") {
  Workspace ws;
  const auto mmd = ws.root / "one.mmd";
  std::ofstream(mmd) << "graph TD\nA[Start] --> B[End]\n";
  const auto svg = ws.root / "one.svg";
  CHECK(run("render --in " + mmd.string() + " --out " + svg.string()) == 0);
  const std::string text = slurp(svg);
  CHECK(text.rfind("<svg", 0) == 0);
  CHECK(text.find("Start") != std::string::npos);
}

TEST_CASE("granulate then synth then train then eval round-trip") {
  Workspace ws;
  const std::string data = (ws.root / "dataset").string();

  // Enough parents that the 50 percent split leaves more than 10 test items
  // (the full protocol reports R@10) and a trainable train split.
  for (int i = 3; i < 60; ++i) {
    std::ofstream(ws.root / "mmd" / ("x" + std::to_string(i) + ".mmd"))
        << "graph TD\nA[Start" << i << "] --> B[Mid" << i << "]\nB --> C[End" << i << "]\n";
  }

  REQUIRE(run("granulate --in " + (ws.root / "mmd").string() + " --out " + data +
              " --seed 3 --test-percent 50") == 0);
  REQUIRE(fs::exists(fs::path(data) / "manifest.jsonl"));
  const auto records = read_manifest(fs::path(data) / "manifest.jsonl");
  REQUIRE(records.size() >= 4);
  bool has_train = false, has_test = false;
  for (const auto& r : records) {
    CHECK(fs::exists(fs::path(data) / r.svg_path));
    has_train |= r.split == "train";
    has_test |= r.split == "test";
  }
  CHECK(has_train);
  CHECK(has_test);

  REQUIRE(run("synth --dataset " + data + " --seed 3") == 0);
  const auto synthed = read_manifest(fs::path(data) / "manifest.jsonl");
  for (const auto& r : synthed) {
    if (r.split == "test") {
      CHECK(r.hard_neg_captions.size() == 6);
      CHECK(r.hard_neg_image_paths.size() == 8);
    } else {
      CHECK(r.hard_neg_captions.size() == 3);
      CHECK(r.hard_neg_image_paths.size() == 4);
    }
    CHECK(r.hard_pos_captions.size() == 1);
    for (const auto& p : r.hard_neg_image_paths) CHECK(fs::exists(fs::path(data) / p));
  }

  const std::string model = (ws.root / "enc.txt").string();
  const std::string trace = (ws.root / "trace.csv").string();
  REQUIRE(run("train-toy --dataset " + data + " --model " + model + " --trace " + trace +
              " --epochs 1 --batch-size 4 --feature-dim 64 --embed-dim 8") == 0);
  CHECK(slurp(trace).rfind("step,l_cl,l_sc,l_do,total\n", 0) == 0);

  const std::string report = (ws.root / "report.csv").string();
  REQUIRE(run("eval --dataset " + data + " --model " + model + " --report " + report) == 0);
  const std::string csv = slurp(report);
  CHECK(csv.find("image->caption") != std::string::npos);
  CHECK(csv.find("hard:caption->image") != std::string::npos);
}

TEST_CASE("import writes mmd files and skips junk") {
  Workspace ws;
  const auto json_dir = ws.root / "records";
  fs::create_directories(json_dir);
  std::ofstream(json_dir / "good.json")
      << R"({"mermaid_code": "graph TD\nA[Start] --> B[End]"})";
  std::ofstream(json_dir / "bad.json") << "nope";
  const auto out_dir = ws.root / "imported";
  CHECK(run("import --in " + json_dir.string() + " --out " + out_dir.string()) == 0);
  REQUIRE(fs::exists(out_dir / "good.mmd"));
  CHECK(slurp(out_dir / "good.mmd").rfind("graph TD", 0) == 0);
  CHECK_FALSE(fs::exists(out_dir / "bad.mmd"));
}
