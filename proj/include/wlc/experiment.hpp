#pragma once

// Experiment harness: JSON configuration, seeded runs of every module and the
// named presets. Each run returns its embedded checks; writing artifacts is
// optional (empty output directory = in-memory only).

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "wlc/dynamics.hpp"
#include "wlc/graph.hpp"
#include "wlc/learning.hpp"
#include "wlc/metrics.hpp"
#include "wlc/motifsim.hpp"

namespace wlc {

inline constexpr const char* kVersion = "1.0.0";

enum class LearnMode { kStructure, kDurations, kBoth };

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string out_dir;
  int output_stride = 10;  // every k-th sample goes to the CSVs

  // graph
  int n = 6;
  std::vector<int> teacher_sequence;  // empty: random cycle
  std::vector<int> learner_sequence;  // empty: random cycle (teacher's in durations mode)

  // dynamics
  double epsilon = kDefaultEpsilon;
  double dt = kDefaultDt;
  int warmup_periods = kDefaultWarmupPeriods;
  std::vector<double> alpha;             // explicit teacher couplings
  std::vector<double> target_durations;  // else calibrate to these
  double duration_scale = 1.0;           // model time units per target unit
  double alpha_lo = 0.2, alpha_hi = 0.8; // else uniform
  double teacher_periods = 10.0;

  // learning
  LearnMode mode = LearnMode::kBoth;
  std::vector<double> gamma0;  // empty: uniform
  double gamma0_lo = 0.05, gamma0_hi = 2.5;
  double tol_abs = kDefaultTolAbs;
  double tol_rel = kDefaultTolRel;
  int max_iters = 0;
  bool literal_rewire = false;
  double horizon = 1000.0;        // duration-learning time
  double horizon_periods = 0.0;   // > 0 overrides horizon in teacher periods

  // motifsim
  double speed = kDefaultSpeed;
  double turn_radius = kDefaultTurnRadius;
  double seconds_per_unit = 1.0;

  // metrics
  double smoothing = 0.0;
  double tau_step = 0.0;
  double stride_periods = 0.25;

  // sweep
  std::vector<int> sweep_exhaustive{3, 4, 5};
  std::vector<int> sweep_random{6, 8, 13};
  int sweep_trials = 1000;
  double sweep_dt = 2e-2;
  int threads = 0;  // 0: hardware concurrency

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

/// Default configuration document (every key present).
nlohmann::json default_config_json();
/// Preset overrides on top of the defaults; throws kUnknownPreset.
nlohmann::json preset_config_json(const std::string& name);
const std::vector<std::string>& preset_names();

/// Sets a dotted key ("dynamics.dt") in a config document. The key must
/// exist in the default document.
void set_config_value(nlohmann::json& doc, const std::string& dotted_key, const nlohmann::json& value);

/// Independent 64-bit seed for one consumer of the master seed.
std::uint64_t derive_seed(std::uint64_t master, const std::string& consumer, std::uint64_t index = 0);

// ---------------------------------------------------------------------------
// Runs

struct TeacherSetup {
  CyclePermutation sigma;
  CouplingVector alpha;
  WlcNetwork net;
  LimitCycleStart start;
};
TeacherSetup prepare_teacher(const ExperimentConfig& cfg);

struct TeacherResult {
  TeacherSetup setup;
  NeuralTrajectory trajectory;
  SwitchingReport report;
  double periodicity_defect = 0.0;
};
TeacherResult simulate_teacher(const ExperimentConfig& cfg);

struct DurationResult {
  TeacherSetup teacher;
  CyclePermutation learner;
  Vec gamma0;
  LearningTrace trace;
  double kappa = 0.0;
  double slope = 0.0;  // fitted d/dt log ||gamma - alpha||
  double final_error = 0.0;
};
DurationResult run_duration_learning(const ExperimentConfig& cfg);

/// Least-squares slope of log ||gamma(t) - alpha|| sampled once per period,
/// using samples whose error is above `floor`.
double log_error_slope(const SampledSeries& gamma, const Vec& alpha, double period, double floor = 1e-10);

struct StructureResult {
  TeacherSetup teacher;
  CyclePermutation learner_start;
  Vec gamma0;
  StructureOutcome outcome;
  bool recovered = false;
};
StructureResult run_structure_learning(const ExperimentConfig& cfg);

struct PipelineResult {
  TeacherSetup teacher;
  CyclePermutation learner_start;
  LearnOutcome learn;
  Vec teacher_durations;  // model time, measured on the final window
  Vec learner_durations;
  std::vector<int> teacher_order;
  std::vector<int> learner_order;
  PosePath teacher_path;
  PosePath learner_path;
  std::vector<DistancePoint> distance;
  double period_seconds = 0.0;
  double first_period_mean = 0.0;
  double final_period_mean = 0.0;
};
PipelineResult run_pipeline(const ExperimentConfig& cfg);

/// True when every consecutive pair follows sigma and all n neurons occur.
bool follows_cycle(const std::vector<int>& order, const CyclePermutation& sigma);

struct SweepTrial {
  int n = 0;
  int trial = 0;
  bool exhaustive = false;
  std::string teacher;
  std::string learner;
  int iterations = 0;  // -1 on failure
  bool recovered = false;
  // e/Var split by ground truth (the teacher's successor), not by the test
  double max_matched_rel = 0.0;
  double min_mismatched_rel = 0.0;  // non-degenerate edges only; inf if none
  int degenerate = 0;
  int misclassified = 0;  // edges where the test disagrees with the truth
  std::string error;
};

struct SweepResult {
  std::vector<SweepTrial> trials;
};

/// Edge-test separation over the sweep trials with n <= max_n.
struct Separation {
  double max_matched = 0.0;
  double min_mismatched = 0.0;
  int misclassified = 0;
  int trials = 0;
};
Separation separation(const SweepResult& sweep, int max_n);

/// Every teacher x learner pair for `sweep_exhaustive` sizes, then
/// `sweep_trials` random pairs for each `sweep_random` size. Trials run on a
/// thread pool and are merged in trial order.
SweepResult run_sweep(const ExperimentConfig& cfg,
                      const std::function<void(const SweepTrial&)>& progress = {});

/// One sweep trial; seeds derive from (cfg.seed, n, index).
SweepTrial sweep_trial(const ExperimentConfig& cfg, const CyclePermutation& teacher,
                       const CyclePermutation& learner, std::uint64_t trial_seed);

/// All hamiltonian cycles of size n, vertex 1 first, lexicographic.
std::vector<CyclePermutation> all_hamiltonian_cycles(int n);

// ---------------------------------------------------------------------------
// Reports

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunReport {
  std::string name;
  std::vector<Check> checks;
  std::vector<std::string> files;
  std::string summary;
  bool passed() const;
};

RunReport run_preset(const std::string& name, const nlohmann::json& config);
RunReport teacher_command(const nlohmann::json& config);
RunReport learn_command(const nlohmann::json& config);
RunReport sweep_command(const nlohmann::json& config,
                        const std::function<void(const SweepTrial&)>& progress = {});
RunReport metric_command(const std::string& teacher_csv, const std::string& learner_csv, double period,
                         double t_first, double tau_step, double smoothing, const std::string& out_dir);

}  // namespace wlc
