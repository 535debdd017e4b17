#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "wlc/csv.hpp"
#include "wlc/error.hpp"
#include "wlc/experiment.hpp"

using namespace wlc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wlc_test_" + name);
  fs::remove_all(p);
  return p;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const auto cfg = ExperimentConfig::from_json(json::object());
  EXPECT_EQ(cfg.n, 6);
  EXPECT_EQ(cfg.epsilon, kDefaultEpsilon);
  EXPECT_EQ(cfg.mode, LearnMode::kBoth);
  EXPECT_EQ(cfg.to_json(), default_config_json());
  const auto again = ExperimentConfig::from_json(cfg.to_json());
  EXPECT_EQ(again.to_json(), cfg.to_json());
}

TEST(Config, RejectsUnknownAndInvalid) {
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json(json{{"grpah", {{"n", 4}}}}); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json(json{{"graph", {{"size", 4}}}}); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json(json{{"dynamics", {{"dt", -1.0}}}}); }),
            ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json(json{{"dynamics", {{"dt", "fast"}}}}); }),
            ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json(json{{"graph", {{"n", 3}, {"teacher_sequence", {1, 2}}}}}); }),
            ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json(json{{"learning", {{"mode", "all"}}}}); }),
            ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json(json{{"dynamics", {{"alpha", {0.5, 1.2, 0.1, 0.1, 0.1, 0.1}}}}}); }),
            ErrorCode::kInvalidConfig);
}

TEST(Config, DottedSet) {
  json doc = default_config_json();
  set_config_value(doc, "dynamics.dt", 0.005);
  set_config_value(doc, "seed", 42);
  EXPECT_EQ(ExperimentConfig::from_json(doc).dt, 0.005);
  EXPECT_EQ(ExperimentConfig::from_json(doc).seed, 42u);
  EXPECT_EQ(code_of([&] { set_config_value(doc, "dynamics.dtt", 1); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([&] { set_config_value(doc, "dynamics", 1); }), ErrorCode::kInvalidConfig);
}

TEST(Config, Presets) {
  const auto& names = preset_names();
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()),
            (std::set<std::string>{"fig2", "fig3", "learn13", "pipeline6"}));
  for (const auto& n : names) EXPECT_NO_THROW(ExperimentConfig::from_json(preset_config_json(n)));
  EXPECT_EQ(code_of([] { preset_config_json("fig9"); }), ErrorCode::kUnknownPreset);
  const auto fig3 = ExperimentConfig::from_json(preset_config_json("fig3"));
  EXPECT_EQ(fig3.teacher_sequence, (std::vector<int>{1, 3, 2}));
  EXPECT_EQ(fig3.gamma0, (std::vector<double>{1.6, 0.1, 2.3}));
}

TEST(Config, DerivedSeedsAreIndependent) {
  std::set<std::uint64_t> seen;
  for (const char* c : {"teacher.sequence", "teacher.alpha", "teacher.x0", "learner.sequence", "learner.gamma0"}) {
    for (std::uint64_t i = 0; i < 20; ++i) seen.insert(derive_seed(7, c, i));
  }
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_EQ(derive_seed(7, "teacher.x0"), derive_seed(7, "teacher.x0"));
  EXPECT_NE(derive_seed(7, "teacher.x0"), derive_seed(8, "teacher.x0"));
}

TEST(Csv, SeriesRoundTrip) {
  Eigen::MatrixXd m(2, 4);
  m << 0.1, 1.0 / 3.0, 2e-17, 1.5, -4.0, 5.25, 6.0, 1e300;
  const SampledSeries s(2.5, 0.125, m);
  std::stringstream ss;
  csv::write_series(ss, s, "x");
  EXPECT_EQ(ss.str().substr(0, 9), "t,x1,x2\n2");
  const auto back = csv::read_series(ss);
  EXPECT_EQ(back.samples(), m);
  EXPECT_EQ(back.t0(), 2.5);
  EXPECT_EQ(back.dt(), 0.125);
  std::stringstream strided;
  csv::write_series(strided, s, "x", 2);
  EXPECT_EQ(csv::read_series(strided).size(), 2);
}

TEST(Csv, PosePathRoundTripAndErrors) {
  PosePath p;
  p.dt = 0.5;
  p.t0 = 1.0;
  for (int k = 0; k < 5; ++k) {
    p.poses.push_back({0.1 * k, -0.2 * k, 0.3});
    p.motif.push_back(k % 3 + 1);
  }
  std::stringstream ss;
  csv::write_pose_path(ss, p);
  const auto back = csv::read_pose_path(ss);
  ASSERT_EQ(back.size(), 5u);
  EXPECT_EQ(back.poses[3].y, p.poses[3].y);
  EXPECT_EQ(back.motif, p.motif);
  std::stringstream bad("t,x,y,heading,motif\n0,1,2,3,1\n1,1,2,3\n");
  EXPECT_EQ(code_of([&] { csv::read_pose_path(bad); }), ErrorCode::kIo);
  std::stringstream gap("t,x\n0,1\n1,1\n3,1\n");
  EXPECT_EQ(code_of([&] { csv::read_series(gap); }), ErrorCode::kIo);
  EXPECT_EQ(code_of([] { csv::read_file("/nonexistent/file.csv"); }), ErrorCode::kIo);
}

TEST(Experiment, FollowsCycle) {
  const auto s = cycle_from_sequence(std::vector<int>{1, 3, 2});
  EXPECT_TRUE(follows_cycle({3, 2, 1, 3, 2}, s));
  EXPECT_FALSE(follows_cycle({3, 1, 2}, s));
  EXPECT_FALSE(follows_cycle({1, 3}, s));  // neuron 2 never seen
  EXPECT_FALSE(follows_cycle({}, s));
}

TEST(Experiment, LogSlopeOfExactExponential) {
  const int count = 2001;
  Eigen::MatrixXd m(2, count);
  const Vec alpha = (Vec(2) << 0.3, 0.6).finished();
  for (int k = 0; k < count; ++k) {
    const double t = 0.1 * k;
    m(0, k) = alpha(0) + 0.5 * std::exp(-0.05 * t);
    m(1, k) = alpha(1) - 0.2 * std::exp(-0.05 * t);
  }
  EXPECT_NEAR(log_error_slope(SampledSeries(0.0, 0.1, m), alpha, 7.0), -0.05, 1e-9);
}

TEST(Experiment, TeacherRunIsReproducible) {
  json cfg = {{"graph", {{"n", 4}}}, {"seed", 99}, {"dynamics", {{"teacher_periods", 3.0}}}};
  const auto a_dir = scratch_dir("rep_a"), b_dir = scratch_dir("rep_b");
  cfg["output"] = {{"dir", a_dir.string()}};
  const auto ra = teacher_command(cfg);
  cfg["output"] = {{"dir", b_dir.string()}};
  const auto rb = teacher_command(cfg);
  EXPECT_TRUE(ra.passed()) << ra.summary;
  for (const std::string f : {"teacher.csv", "durations.csv"}) {
    EXPECT_EQ(csv::read_file((a_dir / f).string()), csv::read_file((b_dir / f).string())) << f;
  }
  const json manifest = json::parse(csv::read_file((a_dir / "manifest.json").string()));
  EXPECT_EQ(manifest["seed"], 99);
  EXPECT_EQ(manifest["version"], kVersion);
  EXPECT_EQ(manifest["config"]["graph"]["n"], 4);
  // the echoed config re-runs to the same output
  json rerun = manifest["config"];
  rerun["output"]["dir"] = (b_dir / "again").string();
  teacher_command(rerun);
  EXPECT_EQ(csv::read_file((a_dir / "teacher.csv").string()), csv::read_file((b_dir / "again" / "teacher.csv").string()));
}

TEST(Experiment, InMemoryRunWritesNothing) {
  const auto r = run_preset("fig2", json::object());
  EXPECT_TRUE(r.passed());
  EXPECT_TRUE(r.files.empty());
  EXPECT_NE(r.summary.find("all checks passed"), std::string::npos);
}

TEST(Experiment, StructureRunWithSeededCycles) {
  const auto r = run_structure_learning(
      ExperimentConfig::from_json({{"seed", 3}, {"graph", {{"n", 7}}}, {"learning", {{"mode", "structure"}}}}));
  EXPECT_TRUE(r.recovered);
  EXPECT_LE(r.outcome.iterations, 6);
}

TEST(Experiment, SmallSweepPasses) {
  const json cfg = {{"sweep", {{"exhaustive", {3, 4}}, {"random", {6}}, {"trials", 5}, {"threads", 2}}}};
  const auto sweep = run_sweep(ExperimentConfig::from_json(cfg));
  ASSERT_EQ(sweep.trials.size(), 4u + 36u + 5u);
  for (const auto& t : sweep.trials) {
    EXPECT_TRUE(t.recovered) << t.teacher << " / " << t.learner << " " << t.error;
    EXPECT_LE(t.iterations, t.n - 1);
  }
  // merged in job order regardless of threads
  const auto again = run_sweep(ExperimentConfig::from_json(
      {{"sweep", {{"exhaustive", {3, 4}}, {"random", {6}}, {"trials", 5}, {"threads", 1}}}}));
  for (std::size_t k = 0; k < sweep.trials.size(); ++k) {
    EXPECT_EQ(sweep.trials[k].teacher, again.trials[k].teacher);
    EXPECT_EQ(sweep.trials[k].iterations, again.trials[k].iterations);
    EXPECT_EQ(sweep.trials[k].max_matched_rel, again.trials[k].max_matched_rel);
  }
}

TEST(Experiment, MetricCommandOnPipelineOutputs) {
  const auto dir = scratch_dir("metric");
  const auto r = run_pipeline(ExperimentConfig::from_json(
      {{"seed", 2}, {"graph", {{"n", 4}}}, {"learning", {{"horizon_periods", 6.0}}}}));
  std::stringstream a, b;
  csv::write_pose_path(a, r.teacher_path);
  csv::write_pose_path(b, r.learner_path);
  fs::create_directories(dir);
  csv::write_file((dir / "t.csv").string(), a.str());
  csv::write_file((dir / "l.csv").string(), b.str());
  const auto rep = metric_command((dir / "t.csv").string(), (dir / "l.csv").string(), r.period_seconds,
                                  std::nan(""), 0.0, 0.0, (dir / "out").string());
  EXPECT_TRUE(rep.passed()) << rep.summary;
  EXPECT_TRUE(fs::exists(dir / "out" / "distance.csv"));
}
