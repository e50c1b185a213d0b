#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cepbp/metrics.h"
#include "cli.h"
#include "test_util.h"

using namespace cepbp;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cepbp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    const auto c = testutil::random_corpus(40, 60, 3, 8, 0.15);
    std::ofstream f(dir_ / "docword.toy.txt");
    write_uci_bow(f, c);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "cepbp");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    out_.str("");
    err_.str("");
    return cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  std::string corpus() const { return (dir_ / "docword.toy.txt").string(); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, TrainWritesArtifacts) {
  ASSERT_EQ(run({"train", "--algo", "cepbp", "--corpus", corpus(), "--k", "3", "--t", "12",
                 "--m", "2", "--n", "4", "--out", path("a")}),
            0)
      << err_.str();
  for (const char* f : {"model.bin", "report.csv", "report.json", "schedule.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "a" / f)) << f;
  }
  const auto report = parse_report_json(slurp(path("a/report.json")));
  EXPECT_EQ(report.records.size(), 12u);
  EXPECT_TRUE(report.final_predictive_perplexity.has_value());
  EXPECT_EQ(report.config.parts, 4);
}

TEST_F(CliTest, TrainIsDeterministic) {
  const std::vector<std::string> base{"train", "--algo", "pbp", "--corpus", corpus(), "--k", "3",
                                      "--t", "8", "--m", "3"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", path("a")});
  b.insert(b.end(), {"--out", path("b")});
  ASSERT_EQ(run(a), 0);
  ASSERT_EQ(run(b), 0);
  EXPECT_EQ(slurp(path("a/model.bin")), slurp(path("b/model.bin")));
}

TEST_F(CliTest, WorkerCountDoesNotChangeQuality) {
  for (const char* m : {"1", "4"}) {
    ASSERT_EQ(run({"train", "--algo", "pbp", "--corpus", corpus(), "--k", "3", "--t", "8",
                   "--m", m, "--out", path(std::string("m") + m)}),
              0);
  }
  const auto r1 = parse_report_json(slurp(path("m1/report.json")));
  const auto r4 = parse_report_json(slurp(path("m4/report.json")));
  EXPECT_NEAR(*r1.final_predictive_perplexity, *r4.final_predictive_perplexity,
              1e-8 * *r1.final_predictive_perplexity);
}

TEST_F(CliTest, EvalReproducesTrainingScore) {
  ASSERT_EQ(run({"train", "--algo", "bp", "--corpus", corpus(), "--k", "3", "--t", "10",
                 "--seed", "5", "--out", path("a")}),
            0);
  const auto report = parse_report_json(slurp(path("a/report.json")));
  ASSERT_EQ(run({"eval", "--corpus", corpus(), "--model", path("a/model.bin"), "--seed", "5",
                 "--out", path("a")}),
            0)
      << err_.str();
  EXPECT_NEAR(std::stod(out_.str()), *report.final_predictive_perplexity,
              1e-8 * *report.final_predictive_perplexity);
  EXPECT_TRUE(fs::exists(dir_ / "a" / "eval.json"));
}

TEST_F(CliTest, ErrorPathsFailWithoutModel) {
  const std::vector<std::vector<std::string>> bad{
      {"train", "--algo", "bp", "--m", "2"},
      {"train", "--algo", "gs", "--m", "3"},
      {"train", "--algo", "cepbp", "--n", "0"},
      {"train", "--algo", "cepbp", "--h", "0"},
      {"train", "--algo", "nope"},
      {"train", "--k", "0"},
      {"train", "--alpha", "-1"},
      {"train", "--t", "0"},
      {"train", "--m", "1000"},
      {"train", "--test-frac", "1.5"},
      {"train", "--report-format", "xml"},
  };
  for (auto args : bad) {
    args.insert(args.end(), {"--corpus", corpus(), "--out", path("bad")});
    EXPECT_NE(run(args), 0) << args[2];
    EXPECT_FALSE(fs::exists(dir_ / "bad" / "model.bin")) << args[2];
  }
  EXPECT_NE(run({"train", "--corpus", path("missing.txt"), "--out", path("bad")}), 0);
  EXPECT_FALSE(fs::exists(dir_ / "bad" / "model.bin"));
  EXPECT_NE(run({"train"}), 0);
  EXPECT_NE(run({}), 0);
}

TEST_F(CliTest, EvalRejectsMismatchedModel) {
  ASSERT_EQ(run({"train", "--algo", "bp", "--corpus", corpus(), "--k", "2", "--t", "3", "--out",
                 path("a")}),
            0);
  {
    std::ofstream f(dir_ / "small.txt");
    write_uci_bow(f, testutil::random_corpus(10, 5, 2, 1));
  }
  EXPECT_NE(run({"eval", "--corpus", path("small.txt"), "--model", path("a/model.bin")}), 0);
  EXPECT_NE(run({"eval", "--corpus", corpus(), "--model", path("nothing.bin")}), 0);
}

TEST_F(CliTest, ReportByteRatios) {
  const std::vector<std::string> common{"--corpus", corpus(), "--k", "3", "--t", "10", "--m", "2",
                                        "--perplexity-every", "0"};
  auto train = [&](const std::string& algo, const std::string& out, std::vector<std::string> extra) {
    std::vector<std::string> a{"train", "--algo", algo};
    a.insert(a.end(), common.begin(), common.end());
    a.insert(a.end(), extra.begin(), extra.end());
    a.insert(a.end(), {"--out", path(out)});
    return run(a);
  };
  ASSERT_EQ(train("pbp", "pbp", {}), 0);
  ASSERT_EQ(train("pgs", "pgs", {}), 0);
  ASSERT_EQ(train("cepbp", "ce", {"--n", "4"}), 0);
  const auto pbp = parse_report_json(slurp(path("pbp/report.json")));
  const auto pgs = parse_report_json(slurp(path("pgs/report.json")));
  EXPECT_EQ(pbp.totals().bytes, 2 * pgs.totals().bytes);

  ASSERT_EQ(run({"report", path("pbp/report.json"), path("pgs/report.json"), path("ce/report.json"),
                 "--report-format", "csv"}),
            0);
  const std::string table = out_.str();
  EXPECT_EQ(table.substr(0, table.find('\n')),
            "algo,K,M,N,H,T,bytes,scheduled_bytes,comp_s,comm_s,ccr,speedup,train_perplexity,"
            "predictive_perplexity");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 4);
  EXPECT_NE(err_.str().find("no M=1 reference"), std::string::npos);
}

TEST_F(CliTest, ReportSpeedupUsesReference) {
  RunReport ref, run4;
  ref.config.algo = "bp";
  ref.config.workers = 1;
  ref.records.push_back({1, 8.0, 0.0, 0, std::nullopt});
  run4.config.algo = "cepbp";
  run4.config.workers = 4;
  run4.records.push_back({1, 2.0, 1.0, 10, std::nullopt});
  std::vector<std::string> warnings;
  const auto json = cli::comparison_table({run4}, {ref}, ReportFormat::json, &warnings);
  EXPECT_TRUE(warnings.empty());
  EXPECT_NE(json.find("\"speedup\": 2.6666666666666665"), std::string::npos) << json;
}

TEST_F(CliTest, SyntheticCorpusSpec) {
  EXPECT_THROW(cli::resolve_corpus("synthetic:kosx", ""), std::invalid_argument);
  EXPECT_THROW(cli::resolve_corpus("no-such-name", ""), CorpusError);
}

TEST_F(CliTest, HelpExitsZero) {
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_NE(out_.str().find("train"), std::string::npos);
}
