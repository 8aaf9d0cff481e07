// Copyright 2026 The privtrain Authors
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

#include "privtrain/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"
#include "privtrain/accountant.hpp"
#include "privtrain/binary_io.hpp"
#include "privtrain/checkpoint.hpp"
#include "privtrain/dataset.hpp"
#include "privtrain/image.hpp"
#include "support/synthetic.hpp"

namespace privtrain::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
  fs::path run_dir;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("privtrain_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  Outcome Invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "privtrain");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Outcome o;
    o.code = cli::Run(static_cast<int>(argv.size()), argv.data(), out, err, [this](const std::string& k) {
      const auto it = env_.find(k);
      return it == env_.end() ? std::nullopt : std::optional<std::string>(it->second);
    });
    o.out = out.str();
    o.err = err.str();
    if (o.out.rfind("run_dir: ", 0) == 0) o.run_dir = o.out.substr(9, o.out.find('\n') - 9);
    return o;
  }

  // Runs a command with --out-root pointing into the test directory.
  Outcome Command(const std::string& command, std::vector<std::string> args) {
    args.insert(args.begin(), {command, "--out-root", Path("runs")});
    return Invoke(std::move(args));
  }

  std::vector<std::string> TrainArgs() const {
    return {"--train", testing::FixturePath("separable_train.pvtf"), "--test",
            testing::FixturePath("separable_test.pvtf"), "--batch", "100", "--epochs", "2",
            "--lr", "2", "--seed", "3"};
  }

  static std::string Slurp(const fs::path& p) { return binary::ReadFile(p.string()); }
  static json ReadJson(const fs::path& p) { return json::parse(Slurp(p)); }

  int RunCount() const {
    if (!fs::exists(dir_ / "runs")) return 0;
    return static_cast<int>(std::distance(fs::directory_iterator(dir_ / "runs"), fs::directory_iterator()));
  }

  std::string WriteSourceImage(int height, int width) {
    const std::string path = Path("source.png");
    WriteImage(testing::MakeTexture(height, width, 3), path);
    return path;
  }

  fs::path dir_;
  std::map<std::string, std::string> env_;
};

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(Invoke({}).code, kExitUsage);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"account", "--sigma", "1"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"account", "--q", "0.1", "--sigma", "abc"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"account", "--q", "0.1", "--sigma", "1", "--bogus", "1"}).code, kExitUsage);
  EXPECT_EQ(Command("account", {"--q", "1.5", "--sigma", "1"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"train", "--help"}).code, kExitOk);
  EXPECT_EQ(RunCount(), 0);
}

TEST_F(CliTest, ExitCodeMapping) {
  EXPECT_EQ(ExitCodeFor(ErrorCode::kNumerical), kExitCompute);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kIo), kExitCompute);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kConfig), kExitUsage);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kBadMagic), kExitUsage);
}

TEST_F(CliTest, ConfigPrecedenceFileEnvFlags) {
  std::ofstream(Path("c.json")) << R"({"q": 0.01, "sigma": 2.0, "steps": 10})";
  auto sigma_of = [&](const Outcome& o) {
    EXPECT_EQ(o.code, kExitOk) << o.err;
    return ReadJson(o.run_dir / "config.json")["sigma"].get<double>();
  };
  EXPECT_EQ(sigma_of(Command("account", {"--config", Path("c.json")})), 2.0);
  env_["PRIVTRAIN_SIGMA"] = "3";
  EXPECT_EQ(sigma_of(Command("account", {"--config", Path("c.json")})), 3.0);
  EXPECT_EQ(sigma_of(Command("account", {"--config", Path("c.json"), "--sigma", "4"})), 4.0);
  env_.clear();
  const json archived = ReadJson(Command("account", {"--config", Path("c.json")}).run_dir / "config.json");
  EXPECT_EQ(archived["command"], "account");
  EXPECT_EQ(archived["steps"], 10);
  EXPECT_EQ(archived["delta"], 1e-5);
}

TEST_F(CliTest, ConfigFileErrors) {
  std::ofstream(Path("unknown.json")) << R"({"q": 0.1, "sigma": 1, "colour": "red"})";
  EXPECT_EQ(Command("account", {"--config", Path("unknown.json")}).code, kExitUsage);
  std::ofstream(Path("typed.json")) << R"({"q": "high", "sigma": 1})";
  EXPECT_EQ(Command("account", {"--config", Path("typed.json")}).code, kExitUsage);
  std::ofstream(Path("other.json")) << R"({"command": "train", "q": 0.1, "sigma": 1})";
  EXPECT_EQ(Command("account", {"--config", Path("other.json")}).code, kExitUsage);
  std::ofstream(Path("broken.json")) << "{";
  EXPECT_EQ(Command("account", {"--config", Path("broken.json")}).code, kExitUsage);
  EXPECT_EQ(Command("account", {"--config", Path("missing.json")}).code, kExitUsage);
  EXPECT_EQ(RunCount(), 0);
}

TEST_F(CliTest, RunDirectoryNamedByTimestampAndHash) {
  const Outcome a = Command("account", {"--q", "0.1", "--sigma", "1"});
  const Outcome b = Command("account", {"--q", "0.1", "--sigma", "1"});
  const Outcome c = Command("account", {"--q", "0.1", "--sigma", "2"});
  const std::string name = a.run_dir.filename().string();
  ASSERT_EQ(name.size(), 16u + 1 + 16);
  EXPECT_EQ(name[8], 'T');
  EXPECT_EQ(name[15], 'Z');
  EXPECT_EQ(a.run_dir.parent_path(), fs::path(Path("runs")));
  EXPECT_NE(a.run_dir, b.run_dir);
  EXPECT_EQ(name.substr(17), b.run_dir.filename().string().substr(17, 16));
  EXPECT_NE(name.substr(17), c.run_dir.filename().string().substr(17, 16));

  const Outcome d = Command("account", {"--q", "0.1", "--sigma", "1", "--run-dir", Path("fixed")});
  EXPECT_EQ(d.run_dir, fs::path(Path("fixed")));
  EXPECT_EQ(Command("account", {"--q", "0.1", "--sigma", "1", "--run-dir", Path("fixed")}).code,
            kExitUsage);
}

TEST_F(CliTest, AccountQueries) {
  const Outcome zero = Command("account", {"--q", "0.1", "--sigma", "4", "--steps", "0"});
  ASSERT_EQ(zero.code, kExitOk) << zero.err;
  const RdpProfile flat{DefaultAlphas(), std::vector<double>(DefaultAlphas().size(), 0.0)};
  EXPECT_DOUBLE_EQ(ReadJson(zero.run_dir / "account.json")["epsilon"].get<double>(),
                   ToEpsDelta(flat, 1e-5).epsilon);

  double last = 0.0;
  for (int steps : {1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024}) {
    const Outcome o = Command("account", {"--q", "0.05", "--sigma", "1.1", "--steps", std::to_string(steps)});
    const double eps = ReadJson(o.run_dir / "account.json")["epsilon"].get<double>();
    EXPECT_GE(eps, last);
    last = eps;
  }

  std::ifstream in(testing::FixturePath("external_accountant.json"));
  const json ref = json::parse(in);
  const Outcome r = Command("account", {"--q", "0.1", "--sigma", "4", "--steps", "500", "--delta", "1e-5"});
  const json got = ReadJson(r.run_dir / "account.json");
  EXPECT_NEAR(got["epsilon"].get<double>(), ref["epsilon"].get<double>(),
              0.01 * ref["epsilon"].get<double>());
  EXPECT_NE(r.out.find("\"epsilon\""), std::string::npos);
}

TEST_F(CliTest, TrainWritesArtifactsAndIsReproducible) {
  const Outcome a = Command("train", TrainArgs());
  ASSERT_EQ(a.code, kExitOk) << a.err;
  for (const char* f : {"config.json", "model.pvtm", "trace.csv", "trace.json", "summary.json"}) {
    EXPECT_TRUE(fs::exists(a.run_dir / f)) << f;
  }
  const Outcome b = Command("train", TrainArgs());
  ASSERT_EQ(b.code, kExitOk);
  for (const char* f : {"model.pvtm", "trace.csv", "trace.json", "summary.json"}) {
    EXPECT_EQ(Slurp(a.run_dir / f), Slurp(b.run_dir / f)) << f;
  }
  // Rerun from the archived config.
  const Outcome c = Command("train", {"--config", (a.run_dir / "config.json").string(),
                                      "--run-dir", Path("again")});
  ASSERT_EQ(c.code, kExitOk) << c.err;
  EXPECT_EQ(Slurp(a.run_dir / "trace.csv"), Slurp(c.run_dir / "trace.csv"));
  const std::string csv = Slurp(a.run_dir / "trace.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST_F(CliTest, TrainThreadCountDoesNotChangeArtifacts) {
  auto args = TrainArgs();
  args.insert(args.end(), {"--framework", "dpdfa", "--hidden-dim", "8", "--threads", "1"});
  const Outcome a = Command("train", args);
  env_["PRIVTRAIN_THREADS"] = "3";
  args.resize(args.size() - 2);
  const Outcome b = Command("train", args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  ASSERT_EQ(b.code, kExitOk) << b.err;
  EXPECT_EQ(ReadJson(b.run_dir / "config.json")["threads"], 3);
  EXPECT_EQ(Slurp(a.run_dir / "trace.csv"), Slurp(b.run_dir / "trace.csv"));
  EXPECT_EQ(Slurp(a.run_dir / "model.pvtm"), Slurp(b.run_dir / "model.pvtm"));
  EXPECT_EQ(a.run_dir.filename().string().substr(17, 16), b.run_dir.filename().string().substr(17, 16));
}

TEST_F(CliTest, TrainValidationBeforeCompute) {
  auto args = TrainArgs();
  args.insert(args.end(), {"--framework", "dpdfa", "--arch", "linear_1layer"});
  EXPECT_EQ(Command("train", args).code, kExitUsage);
  args = TrainArgs();
  args.insert(args.end(), {"--framework", "pate"});
  EXPECT_EQ(Command("train", args).code, kExitUsage);
  args = TrainArgs();
  args.insert(args.end(), {"--sigma", "0"});
  EXPECT_EQ(Command("train", args).code, kExitUsage);
  EXPECT_EQ(Command("train", {"--train", Path("absent.pvtf")}).code, kExitUsage);
  std::ofstream(Path("junk.pvtf")) << "JUNKJUNKJUNK";
  EXPECT_EQ(Command("train", {"--train", Path("junk.pvtf")}).code, kExitUsage);
  EXPECT_EQ(RunCount(), 0);
}

TEST_F(CliTest, TrainZeroEpochs) {
  auto args = TrainArgs();
  args.insert(args.end(), {"--epochs", "0"});
  const Outcome o = Command("train", args);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const std::string csv = Slurp(o.run_dir / "trace.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_EQ(csv.rfind("epoch,loss,test_acc,epsilon\n0,", 0), 0u);
}

TEST_F(CliTest, TrainDoesNotMutateInputs) {
  const std::string before = Slurp(testing::FixturePath("separable_train.pvtf"));
  ASSERT_EQ(Command("train", TrainArgs()).code, kExitOk);
  EXPECT_EQ(Slurp(testing::FixturePath("separable_train.pvtf")), before);
}

TEST_F(CliTest, TrainPateWithPublicSet) {
  auto args = TrainArgs();
  args.insert(args.end(), {"--framework", "pate", "--public", testing::FixturePath("separable_test.pvtf"),
                           "--pate-teachers", "20", "--pate-queries", "200", "--pate-teacher-epochs",
                           "3", "--sigma", "10", "--batch", "20"});
  const Outcome o = Command("train", args);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const json s = ReadJson(o.run_dir / "summary.json");
  EXPECT_EQ(s["framework"], "pate");
  EXPECT_GT(s["final_test_accuracy"].get<double>(), 0.8);
}

TEST_F(CliTest, EvaluateCheckpoint) {
  const Outcome t = Command("train", TrainArgs());
  ASSERT_EQ(t.code, kExitOk);
  const Outcome e = Command("evaluate", {"--model", (t.run_dir / "model.pvtm").string(), "--data",
                                         testing::FixturePath("separable_test.pvtf")});
  ASSERT_EQ(e.code, kExitOk) << e.err;
  const json r = ReadJson(e.run_dir / "evaluate.json");
  EXPECT_EQ(r["n"], 1000);
  EXPECT_NEAR(r["accuracy"].get<double>(),
              ReadJson(t.run_dir / "summary.json")["final_test_accuracy"].get<double>(), 0.01);
  EXPECT_EQ(Command("evaluate", {"--model", (t.run_dir / "model.pvtm").string(), "--data",
                                 testing::FixturePath("xor_test.pvtf")})
                .code,
            kExitUsage);
}

TEST_F(CliTest, SweepOneRowPerGridPoint) {
  auto args = TrainArgs();
  args.insert(args.end(), {"--frameworks", "dpsgd,dpdfa", "--sigmas", "1,2,4", "--hidden-dim", "8"});
  const Outcome o = Command("sweep", args);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const std::string csv = Slurp(o.run_dir / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 6);
  EXPECT_EQ(csv.find("failed"), std::string::npos);
  const json points = ReadJson(o.run_dir / "sweep.json");
  ASSERT_EQ(points.size(), 6u);
  for (size_t i = 0; i < 6; ++i) {
    const json cfg = ReadJson(fs::path(points[i]["run_dir"].get<std::string>()) / "config.json");
    EXPECT_EQ(cfg["seed"], 3 + i);
    EXPECT_EQ(cfg["framework"], i < 3 ? "dpsgd" : "dpdfa");
  }
  // Larger sigma, smaller epsilon.
  EXPECT_GT(points[0]["summary"]["epsilon"].get<double>(), points[2]["summary"]["epsilon"].get<double>());
}

TEST_F(CliTest, SweepSinglePointMatchesTrain) {
  auto args = TrainArgs();
  args.insert(args.end(), {"--frameworks", "dpsgd", "--sigmas", "1.5"});
  const Outcome s = Command("sweep", args);
  ASSERT_EQ(s.code, kExitOk) << s.err;
  args = TrainArgs();
  args.insert(args.end(), {"--framework", "dpsgd", "--sigma", "1.5"});
  const Outcome t = Command("train", args);
  ASSERT_EQ(t.code, kExitOk) << t.err;
  const fs::path point = s.run_dir / "point-000";
  for (const char* f : {"model.pvtm", "trace.csv", "trace.json", "summary.json"}) {
    EXPECT_EQ(Slurp(point / f), Slurp(t.run_dir / f)) << f;
  }
  json a = ReadJson(point / "config.json"), b = ReadJson(t.run_dir / "config.json");
  for (const char* k : {"out_root", "run_dir"}) {
    a.erase(k);
    b.erase(k);
  }
  EXPECT_EQ(a, b);
}

TEST_F(CliTest, SweepRecordsFailuresAndContinues) {
  auto args = TrainArgs();
  args.insert(args.end(), {"--frameworks", "pate,dpsgd", "--sigmas", "2"});
  const Outcome o = Command("sweep", args);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const json points = ReadJson(o.run_dir / "sweep.json");
  ASSERT_EQ(points.size(), 2u);
  EXPECT_EQ(points[0]["status"], "failed");
  EXPECT_NE(points[0]["error"].get<std::string>().find("public"), std::string::npos);
  EXPECT_EQ(points[1]["status"], "ok");
  EXPECT_EQ(json::parse(o.out.substr(o.out.find('\n') + 1))["failed"], 1);
}

TEST_F(CliTest, SweepByTargetEpsilon) {
  auto args = TrainArgs();
  args.insert(args.end(), {"--frameworks", "dpsgd,dpsgld", "--target-epsilons", "0.5,2"});
  const Outcome o = Command("sweep", args);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const json points = ReadJson(o.run_dir / "sweep.json");
  ASSERT_EQ(points.size(), 4u);
  for (size_t i = 0; i < 4; ++i) {
    ASSERT_EQ(points[i]["status"], "ok") << points[i]["error"];
    const double target = i % 2 == 0 ? 0.5 : 2.0;
    const double eps = points[i]["summary"]["epsilon"].get<double>();
    EXPECT_LE(eps, target * (1 + 1e-9));
    EXPECT_GE(eps, target * 0.999);
  }
  EXPECT_EQ(Command("sweep", TrainArgs()).code, kExitUsage);
}

TEST_F(CliTest, SweepDpsgldNoWorseThanDpsgdAtSmallEpsilon) {
  std::ifstream in(testing::FixturePath("desk_scale.json"));
  const json fx = json::parse(in)["sgld_sweep"];
  const Outcome o = Command(
      "sweep", {"--train", testing::FixturePath("separable_train.pvtf"), "--test",
                testing::FixturePath("separable_test.pvtf"), "--frameworks", fx["frameworks"],
                "--target-epsilons", fx["target_epsilons"], "--batch", fx["batch"].dump(),
                "--epochs", fx["epochs"].dump(), "--lr", fx["lr"].dump(), "--seed", fx["seed"].dump()});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const json points = ReadJson(o.run_dir / "sweep.json");
  ASSERT_EQ(points.size(), 8u);
  for (size_t i = 0; i < 4; ++i) {
    const double sgd = points[i]["summary"]["best_test_accuracy"].get<double>();
    const double sgld = points[i + 4]["summary"]["best_test_accuracy"].get<double>();
    EXPECT_LE(points[i + 4]["summary"]["epsilon"].get<double>(), 1.0 + 1e-9);
    EXPECT_GE(sgld, sgd - fx["tolerance"].get<double>()) << "target " << i;
  }
}

TEST_F(CliTest, SynthWritesUnlabeledFeatures) {
  const std::string src = WriteSourceImage(225, 600);
  const Outcome o = Command("synth", {"--input", src, "--count", "10"});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const FeatureDataset ds = ReadFeatures((o.run_dir / "features.pvtf").string());
  EXPECT_EQ(ds.size(), 10);
  EXPECT_EQ(ds.dim(), 243);
  EXPECT_FALSE(ds.labeled());
  const Outcome again = Command("synth", {"--input", src, "--count", "10"});
  EXPECT_EQ(Slurp(o.run_dir / "features.pvtf"), Slurp(again.run_dir / "features.pvtf"));
}

TEST_F(CliTest, SynthMissingInputLeavesNothing) {
  EXPECT_EQ(Command("synth", {"--input", Path("missing.png"), "--count", "10"}).code, kExitUsage);
  EXPECT_FALSE(fs::exists(Path("runs")));
  const std::string src = WriteSourceImage(20, 20);
  EXPECT_EQ(Command("synth", {"--input", src, "--count", "10"}).code, kExitUsage);
  EXPECT_EQ(RunCount(), 0);
}

TEST_F(CliTest, SynthDefaultCountOnWideSource) {
  const std::string src = WriteSourceImage(225, 600);
  const Outcome o = Command("synth", {"--input", src});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const FeatureDataset ds = ReadFeatures((o.run_dir / "features.pvtf").string());
  EXPECT_EQ(ds.size(), 50000);
}

TEST_F(CliTest, ExtractLabelsFromClassDirectories) {
  for (int c = 0; c < 2; ++c) {
    fs::create_directories(Path("imgs/class" + std::to_string(c)));
    for (int i = 0; i < 3; ++i) {
      WriteImage(testing::MakeTexture(16, 16, 10 * c + i),
                 Path("imgs/class" + std::to_string(c) + "/" + std::to_string(i) + ".png"));
    }
  }
  const Outcome o = Command("extract", {"--input", Path("imgs"), "--kernel", "2", "--stages", "1"});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const FeatureDataset ds = ReadFeatures((o.run_dir / "features.pvtf").string());
  EXPECT_EQ(ds.size(), 6);
  EXPECT_EQ(ds.dim(), 12);
  EXPECT_EQ(ds.classes, 2u);
  EXPECT_EQ(ds.labels, (std::vector<uint32_t>{0, 0, 0, 1, 1, 1}));

  const Outcome single = Command("extract", {"--input", Path("imgs/class1/0.png")});
  ASSERT_EQ(single.code, kExitOk) << single.err;
  EXPECT_FALSE(ReadFeatures((single.run_dir / "features.pvtf").string()).labeled());
  fs::create_directories(Path("empty"));
  EXPECT_EQ(Command("extract", {"--input", Path("empty")}).code, kExitUsage);
}

}  // namespace
}  // namespace privtrain::cli
