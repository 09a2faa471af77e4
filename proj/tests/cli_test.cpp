#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "mia/errors.hpp"

namespace mia::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mia_cli_" + std::string(::testing::UnitTest::GetInstance()
                                         ->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    SimulateOptions sim;
    sim.spec.n_members = sim.spec.n_nonmembers = 120;
    sim.spec.member_loss = {0.3, 0.2};
    sim.spec.feature_dim = 4;
    sim.spec.seed = 5;
    sim.out = dump_ = dir_ / "dump.tsv";
    std::ostringstream sink;
    cmd_simulate(sim, sink);
  }
  void TearDown() override { fs::remove_all(dir_); }

  EvaluateOptions evaluate_options(AttackKind kind) const {
    EvaluateOptions o;
    o.dump = dump_;
    o.attack = kind;
    o.trials = 12;
    o.threads = 2;
    return o;
  }

  fs::path dir_;
  fs::path dump_;
};

TEST_F(CliTest, EvaluateIsDeterministic) {
  std::ostringstream sink;
  const auto a = cmd_evaluate(evaluate_options(AttackKind::SimpleShot), sink);
  auto opts = evaluate_options(AttackKind::SimpleShot);
  opts.threads = 1;
  const auto b = cmd_evaluate(opts, sink);
  EXPECT_EQ(stable_payload(a), stable_payload(b));
  EXPECT_TRUE(a.contains("duration_seconds"));
  EXPECT_FALSE(stable_payload(a).contains("duration_seconds"));
  EXPECT_EQ(a.at("trials").size(), 12u);
  EXPECT_EQ(a.at("regimes").size(), 2u);
  EXPECT_EQ(a.at("input_digest").get<std::string>().rfind("sha256:", 0), 0u);
}

TEST_F(CliTest, StreamRoundTripMatchesEvaluate) {
  for (auto kind : {AttackKind::GlobalThreshold, AttackKind::SimpleShot,
                    AttackKind::LaplacianShot}) {
    auto opts = evaluate_options(kind);
    opts.emit_stream = dir_ / "scores.tsv";
    std::ostringstream sink;
    const auto direct = cmd_evaluate(opts, sink);
    const auto replay = cmd_score_stream({*opts.emit_stream, opts.rounding}, sink);
    EXPECT_EQ(direct.at("regimes"), replay.at("regimes")) << to_string(kind);
    EXPECT_EQ(direct.at("trials"), replay.at("trials")) << to_string(kind);
    EXPECT_EQ(direct.at("episode_spec"), replay.at("episode_spec"));
  }
}

TEST_F(CliTest, UnsupportedShotsRejected) {
  auto opts = evaluate_options(AttackKind::SimpleShot);
  opts.spec.shots = 7;
  std::ostringstream sink;
  EXPECT_THROW(cmd_evaluate(opts, sink), ValidationError);
  opts.spec.allow_any_shots = true;
  EXPECT_NO_THROW(cmd_evaluate(opts, sink));
}

TEST_F(CliTest, TooFewRecordsIsCapacityError) {
  auto opts = evaluate_options(AttackKind::SimpleShot);
  opts.spec.query_shots = 101;
  std::ostringstream sink;
  EXPECT_THROW(cmd_evaluate(opts, sink), CapacityError);
}

TEST_F(CliTest, PlotDataRows) {
  auto opts = evaluate_options(AttackKind::GlobalThreshold);
  opts.trials = 3;
  std::ostringstream sink;
  const auto report = cmd_evaluate(opts, sink);
  std::ostringstream csv;
  plotdata_from_json(report, csv);
  std::istringstream lines(csv.str());
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], "kind,label,regime_a,regime_b");
  for (int i = 1; i <= 3; ++i) EXPECT_EQ(rows[i].rfind("trial,", 0), 0u);
  EXPECT_EQ(rows[4], "band,alpha,0.25,0.25");
  EXPECT_EQ(rows[5].rfind("band,beta,,0.58", 0), 0u);

  auto empty = report;
  empty["trials"] = nlohmann::json::array();
  EXPECT_THROW(plotdata_from_json(empty, csv), ValidationError);
}

TEST_F(CliTest, ReinterpretShippedTable) {
  ReinterpretOptions o;
  o.roc = fs::path(MIA_DATA_DIR) / "published_tpr_cifar.csv";
  std::ostringstream table;
  const auto report = cmd_reinterpret(o, table);
  ASSERT_EQ(report.at("rows").size(), 16u);
  for (const auto& row : report.at("rows")) {
    if (row.at("id") == "Carlini/C-10") {
      EXPECT_NEAR(row.at("regime_a").at("tp_log_ratio").get<double>(), 0.6233, 1e-4);
      EXPECT_EQ(row.at("regime_b").at("severity"), "severe");
    }
  }
  EXPECT_NE(table.str().find("Carlini"), std::string::npos);
  EXPECT_NE(table.str().find("alpha=0.068"), std::string::npos);
}

TEST_F(CliTest, ReinterpretErrorNamesRow) {
  const auto roc = dir_ / "roc.csv";
  std::ofstream(roc) << "attack,dataset,fpr,tpr\n"
                        "Good,D,0.00001,0.1\nGood,D,0.001,0.2\n"
                        "Bad,D,0.00001,0.1\nBad,D,0.0001,0.2\n";
  ReinterpretOptions o;
  o.roc = roc;
  std::ostringstream sink;
  try {
    cmd_reinterpret(o, sink);
    FAIL();
  } catch (const RangeError& e) {
    EXPECT_NE(std::string(e.what()).find("Bad/D"), std::string::npos);
  }
}

TEST_F(CliTest, ConfigOverridesGrid) {
  const auto cfg = dir_ / "cfg.json";
  std::ofstream(cfg) << R"({"ss": {"k_grid": [1, "all"], "metric": "cosine"}})";
  const auto plan = load_plan(AttackKind::SimpleShot, cfg);
  ASSERT_EQ(plan.grid.size(), 2u);
  const auto& last = std::get<SsConfig>(plan.grid[1]);
  EXPECT_FALSE(last.k_neighbors.has_value());
  EXPECT_EQ(last.metric, Metric::Cosine);

  std::ofstream(cfg) << R"({"ss": {"k_grd": [1]}})";
  EXPECT_THROW(load_plan(AttackKind::SimpleShot, cfg), ValidationError);
}

TEST(Config, ShippedConfigIsTheDefault) {
  const auto path = fs::path(MIA_DATA_DIR) / "attack_config.json";
  for (auto kind : {AttackKind::SimpleShot, AttackKind::LaplacianShot}) {
    EXPECT_EQ(to_json(load_plan(kind, path)), to_json(default_plan(kind)));
  }
}

}  // namespace
}  // namespace mia::cli
