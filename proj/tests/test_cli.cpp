#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "colddiff_cli.hpp"

namespace fs = std::filesystem;
using namespace colddiff;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "colddiff");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  set_thread_count(0);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("colddiff_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string out_dir() const { return (root_ / "runs").string(); }

  // The single run directory created under out_dir().
  fs::path only_run() const {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root_ / "runs")) dirs.push_back(e.path());
    EXPECT_EQ(dirs.size(), 1u);
    return dirs.empty() ? fs::path{} : dirs.front();
  }

  fs::path root_;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

TEST_F(Cli, NoArgumentsPrintsUsage) {
  auto r = invoke({});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_NE(r.err.find("kind=usage"), std::string::npos);
}

TEST_F(Cli, UnknownFlagIsUsageError) {
  auto r = invoke({"degrade", "--preset", "blur/mnist", "--frobnicate", "3"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--frobnicate"), std::string::npos);
}

TEST_F(Cli, InvalidValuesAreUsageErrors) {
  EXPECT_EQ(invoke({"degrade", "--preset", "blur/mnist", "--t", "41", "--out", out_dir()}).code, 2);
  EXPECT_EQ(invoke({"degrade", "--preset", "no/such", "--out", out_dir()}).code, 2);
  EXPECT_EQ(invoke({"degrade", "--preset", "blur/mnist", "--seed", "abc", "--out", out_dir()}).code, 2);
  EXPECT_EQ(invoke({"stability", "--mode", "sideways", "--out", out_dir()}).code, 2);
  EXPECT_EQ(invoke({"train", "--preset", "blur/mnist", "--schedule", "step", "--out", out_dir()}).code, 2);
  EXPECT_FALSE(fs::exists(out_dir()));
}

TEST_F(Cli, MissingInputExitsThreeWithoutOutputs) {
  auto r = invoke({"degrade", "--preset", "blur/mnist", "--in", (root_ / "absent").string(), "--out", out_dir()});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_NE(r.err.find("kind=missing_input"), std::string::npos);
  EXPECT_FALSE(fs::exists(out_dir()));

  EXPECT_EQ(invoke({"sample", "--checkpoint", (root_ / "none.cdck").string(), "--out", out_dir()}).code, 3);
  EXPECT_EQ(invoke({"degrade", "--config", (root_ / "none.ini").string(), "--preset", "blur/mnist"}).code, 3);
}

TEST_F(Cli, PresetsListsRegistry) {
  auto r = invoke({"presets"});
  ASSERT_EQ(r.code, 0);
  for (const auto& name : preset_names()) EXPECT_NE(r.out.find(name + "\t"), std::string::npos) << name;
}

TEST_F(Cli, LinearStabilityTable) {
  auto r = invoke({"stability", "--family", "linear", "--eps", "0.1,1,10", "--t", "64", "--out", out_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    if (line.rfind("linear/test", 0) != 0) continue;
    std::istringstream f(line);
    std::string preset, family;
    double eps, naive, cold;
    int t;
    f >> preset >> family >> eps >> t >> naive >> cold;
    EXPECT_EQ(t, 64);
    EXPECT_LT(cold, 1e-9);
    EXPECT_GE(naive, eps * (1 - 1e-9));
    ++rows;
  }
  EXPECT_EQ(rows, 3);
  const fs::path dir = only_run();
  EXPECT_TRUE(fs::exists(dir / "stability.jsonl"));
  auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["subcommand"], "stability");
}

TEST_F(Cli, DegradeWritesGridsAndManifest) {
  auto r = invoke({"degrade", "--preset", "blur/mnist", "--t", "20", "--limit", "8", "--seed", "5", "--out", out_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  const fs::path dir = only_run();
  EXPECT_NE(dir.filename().string().find("-seed5"), std::string::npos);
  Image clean = load_image((dir / "clean.png").string());
  Image deg = load_image((dir / "degraded_t20.png").string());
  EXPECT_EQ(clean.shape(), deg.shape());
  auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m["subcommand"], "degrade");
  EXPECT_EQ(m["config"]["degradation.preset"], "blur/mnist");
  EXPECT_EQ(m["config"]["run.seed"], "5");
  EXPECT_EQ(m["version"], COLDDIFF_VERSION);
  for (const auto& a : m["artifacts"]) EXPECT_TRUE(fs::exists(dir / a.get<std::string>())) << a;

  // config.ini reproduces the run
  auto again = invoke({"degrade", "--config", (dir / "config.ini").string(), "--out", (root_ / "again").string()});
  ASSERT_EQ(again.code, 0) << again.err;
  fs::path other = fs::directory_iterator(root_ / "again")->path();
  EXPECT_EQ(slurp(dir / "degraded_t20.png"), slurp(other / "degraded_t20.png"));
}

TEST_F(Cli, DryRunTouchesNothing) {
  for (std::vector<std::string> args : {std::vector<std::string>{"degrade", "--preset", "blur/mnist"},
                                        {"train", "--preset", "blur/mnist", "--steps", "5"},
                                        {"stability", "--family", "linear"},
                                        {"eval", "--a", "mnist", "--b", "mnist"}}) {
    args.insert(args.end(), {"--dry-run", "--out", out_dir()});
    auto r = invoke(args);
    EXPECT_EQ(r.code, 0) << args[0] << ": " << r.err;
    EXPECT_NE(r.out.find("plan: " + args[0]), std::string::npos);
    EXPECT_NE(r.out.find("effective config"), std::string::npos);
  }
  EXPECT_FALSE(fs::exists(out_dir()));
}

TEST_F(Cli, FlagsOverrideConfigFile) {
  fs::create_directories(root_);
  std::ofstream(root_ / "run.ini") << "[degradation]\npreset = blur/mnist\n[train]\nsteps = 9\nbatch = 2\n[data]\nlimit = 16\n";
  auto r = invoke({"train", "--config", (root_ / "run.ini").string(), "--steps", "3", "--out", out_dir(), "--threads", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto m = nlohmann::json::parse(slurp(only_run() / "manifest.json"));
  EXPECT_EQ(m["config"]["train.steps"], "3");
  EXPECT_EQ(m["config"]["train.batch"], "2");
  EXPECT_EQ(m["threads"], 1);
  std::ifstream losses(only_run() / "loss.jsonl");
  int n = 0;
  for (std::string line; std::getline(losses, line); ++n) EXPECT_TRUE(nlohmann::json::parse(line).contains("loss"));
  EXPECT_EQ(n, 3);
}

TEST_F(Cli, SameSeedSameArtifacts) {
  std::vector<std::string> blobs;
  for (const char* threads : {"1", "1", "3"}) {
    const std::string out = (root_ / ("r" + std::string(threads) + std::to_string(blobs.size()))).string();
    auto r = invoke({"train", "--preset", "blur/mnist", "--steps", "4", "--batch", "3", "--limit", "24", "--seed", "11",
                  "--threads", threads, "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    blobs.push_back(slurp(fs::directory_iterator(out)->path() / "checkpoint.cdck"));
  }
  EXPECT_EQ(blobs[0], blobs[1]);
  EXPECT_EQ(blobs[0], blobs[2]);
}

TEST_F(Cli, TrainSampleGenerateEval) {
  const std::string train_out = (root_ / "train").string();
  ASSERT_EQ(invoke({"train", "--preset", "blur/mnist", "--steps", "3", "--batch", "2", "--limit", "16", "--out", train_out}).code, 0);
  const std::string ck = (fs::directory_iterator(train_out)->path() / "checkpoint.cdck").string();

  auto s = invoke({"sample", "--checkpoint", ck, "--limit", "4", "--t", "5", "--out", (root_ / "sample").string()});
  ASSERT_EQ(s.code, 0) << s.err;
  const fs::path sdir = fs::directory_iterator(root_ / "sample")->path();
  for (const char* f : {"naive.png", "cold.png", "degraded.png", "metrics.jsonl"}) EXPECT_TRUE(fs::exists(sdir / f)) << f;
  EXPECT_TRUE(fs::is_directory(sdir / "trajectory_cold"));

  auto g = invoke({"generate", "--checkpoint", ck, "--n", "4", "--limit", "32", "--out", (root_ / "gen").string()});
  ASSERT_EQ(g.code, 0) << g.err;
  const fs::path gdir = fs::directory_iterator(root_ / "gen")->path();
  auto prior = load_prior((gdir / "prior.cdpr").string());
  EXPECT_EQ(prior->kind(), "gmm");
  auto summary = nlohmann::json::parse(slurp(gdir / "summary.json"));
  EXPECT_TRUE(summary.contains("proxy_generated"));

  auto e = invoke({"eval", "--a", "mnist", "--b", "mnist", "--split", "test", "--limit", "16", "--paired", "true",
                "--out", (root_ / "eval").string()});
  ASSERT_EQ(e.code, 0) << e.err;
  auto report = nlohmann::json::parse(slurp(fs::directory_iterator(root_ / "eval")->path() / "summary.json"));
  EXPECT_NEAR(report["proxy"].get<double>(), 0.0, 1e-6);
  EXPECT_EQ(report["mean_rmse"].get<double>(), 0.0);
}

TEST_F(Cli, DivergentTrainingExitsFour) {
  auto r = invoke({"train", "--preset", "blur/mnist", "--steps", "50", "--batch", "2", "--limit", "8", "--lr", "1e30",
                "--warmup", "0", "--out", out_dir()});
  EXPECT_EQ(r.code, 4) << r.err;
  EXPECT_NE(r.err.find("kind=numerical"), std::string::npos);
  auto m = nlohmann::json::parse(slurp(only_run() / "manifest.json"));
  EXPECT_EQ(m["exit_code"], 4);
  EXPECT_TRUE(m.contains("error"));
}
