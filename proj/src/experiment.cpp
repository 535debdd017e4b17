#include "wlc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <cstdio>
#include <tuple>
#include <thread>

#include <Eigen/Core>

#include "wlc/csv.hpp"
#include "wlc/error.hpp"

namespace wlc {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

json default_config_json() {
  return json{
      {"seed", 1},
      {"output", {{"dir", ""}, {"stride", 10}}},
      {"graph", {{"n", 6}, {"teacher_sequence", json::array()}, {"learner_sequence", json::array()}}},
      {"dynamics",
       {{"epsilon", kDefaultEpsilon},
        {"dt", kDefaultDt},
        {"warmup_periods", kDefaultWarmupPeriods},
        {"alpha", json::array()},
        {"target_durations", json::array()},
        {"duration_scale", 1.0},
        {"alpha_range", {0.2, 0.8}},
        {"teacher_periods", 10.0}}},
      {"learning",
       {{"mode", "both"},
        {"gamma0", json::array()},
        {"gamma0_range", {0.05, 2.5}},
        {"tol_abs", kDefaultTolAbs},
        {"tol_rel", kDefaultTolRel},
        {"max_iters", 0},
        {"rewire", "untested"},
        {"horizon", 1000.0},
        {"horizon_periods", 0.0}}},
      {"motifsim", {{"speed", kDefaultSpeed}, {"turn_radius", kDefaultTurnRadius}, {"seconds_per_unit", 1.0}}},
      {"metrics", {{"smoothing", 0.0}, {"tau_step", 0.0}, {"stride_periods", 0.25}}},
      {"sweep",
       {{"exhaustive", {3, 4, 5}}, {"random", {6, 8, 13}}, {"trials", 1000}, {"dt", 2e-2}, {"threads", 0}}},
  };
}

namespace {

const std::vector<std::pair<std::string, json>>& preset_table() {
  static const std::vector<std::pair<std::string, json>> table = {
      {"fig2",
       {{"graph", {{"n", 6}, {"teacher_sequence", {1, 2, 3, 4, 5, 6}}}},
        {"dynamics", {{"alpha", {0.6, 0.5, 0.7, 0.1, 0.8, 0.3}}, {"teacher_periods", 10.0}}}}},
      {"fig3",
       {{"graph", {{"n", 3}, {"teacher_sequence", {1, 3, 2}}}},
        {"dynamics", {{"alpha", {0.2, 0.6, 0.8}}}},
        {"learning", {{"mode", "durations"}, {"gamma0", {1.6, 0.1, 2.3}}, {"horizon", 1000.0}}}}},
      {"learn13", {{"seed", 13}, {"graph", {{"n", 13}}}, {"learning", {{"mode", "structure"}}}}},
      {"pipeline6",
       {{"seed", 6},
        {"graph", {{"n", 6}, {"teacher_sequence", {1, 3, 6, 4, 2, 5}}}},
        {"dynamics", {{"target_durations", {7.0, 7.1, 4.1, 4.1, 9.4, 11.0}}, {"duration_scale", 3.0}}},
        {"learning", {{"mode", "both"}, {"gamma0_range", {0.1, 0.9}}, {"horizon_periods", 12.0}}},
        {"motifsim", {{"seconds_per_unit", 1.0 / 3.0}}}}},
  };
  return table;
}

void check_keys(const json& input, const json& schema, const std::string& path) {
  if (!input.is_object()) throw Error(ErrorCode::kInvalidConfig, "config section '" + path + "' must be an object");
  for (auto it = input.begin(); it != input.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!schema.contains(it.key())) throw Error(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
    if (schema.at(it.key()).is_object()) check_keys(it.value(), schema.at(it.key()), key);
  }
}

template <class T>
T get(const json& doc, const char* section, const char* key) {
  const json& v = section ? doc.at(section).at(key) : doc.at(key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string("bad value for '") + (section ? std::string(section) + "." : "") + key + "'");
  }
}

std::pair<double, double> get_range(const json& doc, const char* section, const char* key) {
  const auto v = get<std::vector<double>>(doc, section, key);
  if (v.size() != 2) throw Error(ErrorCode::kInvalidConfig, std::string(section) + "." + key + " needs two values");
  return {v[0], v[1]};
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, doc] : preset_table()) out.push_back(name);
    return out;
  }();
  return names;
}

json preset_config_json(const std::string& name) {
  for (const auto& [preset, overrides] : preset_table()) {
    if (preset == name) {
      json doc = default_config_json();
      doc.merge_patch(overrides);
      return doc;
    }
  }
  throw Error(ErrorCode::kUnknownPreset, "unknown preset '" + name + "'");
}

void set_config_value(json& doc, const std::string& dotted_key, const json& value) {
  const json schema = default_config_json();
  const json* node = &schema;
  json* target = &doc;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = dotted_key.find('.', start);
    const std::string part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) {
      throw Error(ErrorCode::kInvalidConfig, "unknown config key '" + dotted_key + "'");
    }
    node = &node->at(part);
    if (!target->is_object()) *target = json::object();
    if (dot == std::string::npos) {
      if (node->is_object()) throw Error(ErrorCode::kInvalidConfig, "'" + dotted_key + "' is a section");
      (*target)[part] = value;
      return;
    }
    target = &(*target)[part];
    start = dot + 1;
  }
}

ExperimentConfig ExperimentConfig::from_json(const json& input) {
  const json schema = default_config_json();
  check_keys(input, schema, "");
  json doc = schema;
  doc.merge_patch(input);

  ExperimentConfig c;
  c.seed = get<std::uint64_t>(doc, nullptr, "seed");
  c.out_dir = get<std::string>(doc, "output", "dir");
  c.output_stride = get<int>(doc, "output", "stride");
  c.n = get<int>(doc, "graph", "n");
  c.teacher_sequence = get<std::vector<int>>(doc, "graph", "teacher_sequence");
  c.learner_sequence = get<std::vector<int>>(doc, "graph", "learner_sequence");
  c.epsilon = get<double>(doc, "dynamics", "epsilon");
  c.dt = get<double>(doc, "dynamics", "dt");
  c.warmup_periods = get<int>(doc, "dynamics", "warmup_periods");
  c.alpha = get<std::vector<double>>(doc, "dynamics", "alpha");
  c.target_durations = get<std::vector<double>>(doc, "dynamics", "target_durations");
  c.duration_scale = get<double>(doc, "dynamics", "duration_scale");
  std::tie(c.alpha_lo, c.alpha_hi) = get_range(doc, "dynamics", "alpha_range");
  c.teacher_periods = get<double>(doc, "dynamics", "teacher_periods");

  const auto mode = get<std::string>(doc, "learning", "mode");
  if (mode == "structure") {
    c.mode = LearnMode::kStructure;
  } else if (mode == "durations") {
    c.mode = LearnMode::kDurations;
  } else if (mode == "both") {
    c.mode = LearnMode::kBoth;
  } else {
    throw Error(ErrorCode::kInvalidConfig, "learning.mode must be structure, durations or both");
  }
  c.gamma0 = get<std::vector<double>>(doc, "learning", "gamma0");
  std::tie(c.gamma0_lo, c.gamma0_hi) = get_range(doc, "learning", "gamma0_range");
  c.tol_abs = get<double>(doc, "learning", "tol_abs");
  c.tol_rel = get<double>(doc, "learning", "tol_rel");
  c.max_iters = get<int>(doc, "learning", "max_iters");
  const auto rewire = get<std::string>(doc, "learning", "rewire");
  if (rewire != "untested" && rewire != "literal") {
    throw Error(ErrorCode::kInvalidConfig, "learning.rewire must be untested or literal");
  }
  c.literal_rewire = rewire == "literal";
  c.horizon = get<double>(doc, "learning", "horizon");
  c.horizon_periods = get<double>(doc, "learning", "horizon_periods");
  c.speed = get<double>(doc, "motifsim", "speed");
  c.turn_radius = get<double>(doc, "motifsim", "turn_radius");
  c.seconds_per_unit = get<double>(doc, "motifsim", "seconds_per_unit");
  c.smoothing = get<double>(doc, "metrics", "smoothing");
  c.tau_step = get<double>(doc, "metrics", "tau_step");
  c.stride_periods = get<double>(doc, "metrics", "stride_periods");
  c.sweep_exhaustive = get<std::vector<int>>(doc, "sweep", "exhaustive");
  c.sweep_random = get<std::vector<int>>(doc, "sweep", "random");
  c.sweep_trials = get<int>(doc, "sweep", "trials");
  c.sweep_dt = get<double>(doc, "sweep", "dt");
  c.threads = get<int>(doc, "sweep", "threads");
  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  const char* mode_name = mode == LearnMode::kStructure ? "structure" : mode == LearnMode::kDurations ? "durations" : "both";
  return json{
      {"seed", seed},
      {"output", {{"dir", out_dir}, {"stride", output_stride}}},
      {"graph", {{"n", n}, {"teacher_sequence", teacher_sequence}, {"learner_sequence", learner_sequence}}},
      {"dynamics",
       {{"epsilon", epsilon},
        {"dt", dt},
        {"warmup_periods", warmup_periods},
        {"alpha", alpha},
        {"target_durations", target_durations},
        {"duration_scale", duration_scale},
        {"alpha_range", {alpha_lo, alpha_hi}},
        {"teacher_periods", teacher_periods}}},
      {"learning",
       {{"mode", mode_name},
        {"gamma0", gamma0},
        {"gamma0_range", {gamma0_lo, gamma0_hi}},
        {"tol_abs", tol_abs},
        {"tol_rel", tol_rel},
        {"max_iters", max_iters},
        {"rewire", literal_rewire ? "literal" : "untested"},
        {"horizon", horizon},
        {"horizon_periods", horizon_periods}}},
      {"motifsim", {{"speed", speed}, {"turn_radius", turn_radius}, {"seconds_per_unit", seconds_per_unit}}},
      {"metrics", {{"smoothing", smoothing}, {"tau_step", tau_step}, {"stride_periods", stride_periods}}},
      {"sweep",
       {{"exhaustive", sweep_exhaustive},
        {"random", sweep_random},
        {"trials", sweep_trials},
        {"dt", sweep_dt},
        {"threads", threads}}},
  };
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::kInvalidConfig, what);
  };
  auto positive = [&](double v, const char* name) { require(std::isfinite(v) && v > 0.0, std::string(name) + " must be positive"); };
  require(n >= 3, "graph.n must be at least 3");
  require(output_stride >= 1, "output.stride must be >= 1");
  require(teacher_sequence.empty() || static_cast<int>(teacher_sequence.size()) == n,
          "graph.teacher_sequence must list n vertices");
  require(learner_sequence.empty() || static_cast<int>(learner_sequence.size()) == n,
          "graph.learner_sequence must list n vertices");
  positive(epsilon, "dynamics.epsilon");
  positive(dt, "dynamics.dt");
  require(warmup_periods >= 1, "dynamics.warmup_periods must be >= 1");
  require(alpha.empty() || static_cast<int>(alpha.size()) == n, "dynamics.alpha must have n entries");
  for (double a : alpha) require(std::isfinite(a) && a > 0.0 && a < 1.0, "dynamics.alpha entries must lie in (0,1)");
  require(target_durations.empty() || static_cast<int>(target_durations.size()) == n,
          "dynamics.target_durations must have n entries");
  for (double d : target_durations) positive(d, "dynamics.target_durations entries");
  positive(duration_scale, "dynamics.duration_scale");
  require(alpha_lo > 0.0 && alpha_lo < alpha_hi && alpha_hi < 1.0, "dynamics.alpha_range must satisfy 0 < lo < hi < 1");
  positive(teacher_periods, "dynamics.teacher_periods");
  require(gamma0.empty() || static_cast<int>(gamma0.size()) == n, "learning.gamma0 must have n entries");
  for (double g : gamma0) require(std::isfinite(g), "learning.gamma0 entries must be finite");
  require(gamma0_lo < gamma0_hi && std::isfinite(gamma0_lo) && std::isfinite(gamma0_hi),
          "learning.gamma0_range must satisfy lo < hi");
  positive(tol_abs, "learning.tol_abs");
  positive(tol_rel, "learning.tol_rel");
  require(max_iters >= 0, "learning.max_iters must be >= 0");
  positive(horizon, "learning.horizon");
  require(horizon_periods >= 0.0, "learning.horizon_periods must be >= 0");
  require(std::isfinite(speed), "motifsim.speed must be finite");
  positive(turn_radius, "motifsim.turn_radius");
  positive(seconds_per_unit, "motifsim.seconds_per_unit");
  require(smoothing >= 0.0, "metrics.smoothing must be >= 0");
  require(tau_step >= 0.0, "metrics.tau_step must be >= 0");
  positive(stride_periods, "metrics.stride_periods");
  for (int s : sweep_exhaustive) require(s >= 3 && s <= 7, "sweep.exhaustive sizes must lie in [3,7]");
  for (int s : sweep_random) require(s >= 3, "sweep.random sizes must be >= 3");
  require(sweep_trials >= 0, "sweep.trials must be >= 0");
  positive(sweep_dt, "sweep.dt");
  require(threads >= 0, "sweep.threads must be >= 0");
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& consumer, std::uint64_t index) {
  // FNV-1a of the label, then splitmix64 finalization
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : consumer) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = master ^ h;
  z += 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Runs

namespace {

Vec uniform_vector(int n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

Vec to_vec(const std::vector<double>& v) { return Vec::Map(v.data(), static_cast<Eigen::Index>(v.size())); }

CyclePermutation pick_cycle(const std::vector<int>& seq, int n, std::uint64_t seed) {
  if (!seq.empty()) return cycle_from_sequence(seq);
  return random_hamiltonian_cycle(n, seed);
}

double horizon_of(const ExperimentConfig& cfg, double period) {
  return cfg.horizon_periods > 0.0 ? cfg.horizon_periods * period : cfg.horizon;
}

Vec initial_gamma(const ExperimentConfig& cfg) {
  if (!cfg.gamma0.empty()) return to_vec(cfg.gamma0);
  return uniform_vector(cfg.n, cfg.gamma0_lo, cfg.gamma0_hi, derive_seed(cfg.seed, "learner.gamma0"));
}

LearnOptions learn_options(const ExperimentConfig& cfg) {
  LearnOptions o;
  o.tol_abs = cfg.tol_abs;
  o.tol_rel = cfg.tol_rel;
  o.max_iters = cfg.max_iters;
  o.literal_rewire = cfg.literal_rewire;
  return o;
}

}  // namespace

TeacherSetup prepare_teacher(const ExperimentConfig& cfg) {
  CyclePermutation sigma = pick_cycle(cfg.teacher_sequence, cfg.n, derive_seed(cfg.seed, "teacher.sequence"));
  const PathwayMatrix w = pathway_matrix(sigma);
  Vec alpha;
  if (!cfg.alpha.empty()) {
    alpha = to_vec(cfg.alpha);
  } else if (!cfg.target_durations.empty()) {
    std::vector<double> targets = cfg.target_durations;
    for (double& d : targets) d *= cfg.duration_scale;
    CalibrationOptions opts;
    opts.epsilon = cfg.epsilon;
    opts.dt = cfg.dt;
    opts.seed = derive_seed(cfg.seed, "teacher.calibration");
    alpha = calibrate_alpha(w, targets, opts).values();
  } else {
    alpha = uniform_vector(cfg.n, cfg.alpha_lo, cfg.alpha_hi, derive_seed(cfg.seed, "teacher.alpha"));
  }
  WlcNetwork net(w, CouplingVector(alpha), cfg.epsilon);
  LimitCycleStart start = settle_on_limit_cycle(
      net, random_initial_state(cfg.n, derive_seed(cfg.seed, "teacher.x0")), cfg.dt, cfg.warmup_periods);
  return {std::move(sigma), CouplingVector(alpha), std::move(net), std::move(start)};
}

TeacherResult simulate_teacher(const ExperimentConfig& cfg) {
  TeacherSetup setup = prepare_teacher(cfg);
  NeuralTrajectory traj = integrate(setup.net, setup.start.state, cfg.teacher_periods * setup.start.period,
                                    cfg.dt, setup.start.settle_time);
  SwitchingReport report = switching_report(traj);
  const double defect = periodicity_defect(traj, setup.start.period, 0.0);
  return {std::move(setup), std::move(traj), std::move(report), defect};
}

double log_error_slope(const SampledSeries& gamma, const Vec& alpha, double period, double floor) {
  std::vector<double> ts, ls;
  for (double t = gamma.t0(); t <= gamma.end_time() + 1e-9; t += period) {
    const double e = (gamma.at(std::min(t, gamma.end_time())) - alpha).norm();
    if (e <= floor) break;
    ts.push_back(t);
    ls.push_back(std::log(e));
  }
  if (ts.size() < 3) throw Error(ErrorCode::kNoPeriod, "too few periods above the error floor for a slope fit");
  const double mt = std::accumulate(ts.begin(), ts.end(), 0.0) / static_cast<double>(ts.size());
  const double ml = std::accumulate(ls.begin(), ls.end(), 0.0) / static_cast<double>(ls.size());
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    num += (ts[k] - mt) * (ls[k] - ml);
    den += (ts[k] - mt) * (ts[k] - mt);
  }
  return num / den;
}

DurationResult run_duration_learning(const ExperimentConfig& cfg) {
  TeacherSetup teacher = prepare_teacher(cfg);
  CyclePermutation learner = cfg.learner_sequence.empty() ? teacher.sigma : cycle_from_sequence(cfg.learner_sequence);
  Vec gamma0 = initial_gamma(cfg);
  LiveTeacher stream(teacher.net, teacher.start.state, cfg.dt, teacher.start.settle_time);
  const double period = teacher.start.period;
  LearningTrace trace = duration_learning_run(stream, pathway_matrix(learner), gamma0, horizon_of(cfg, period),
                                              cfg.epsilon, true,
                                              random_initial_state(cfg.n, derive_seed(cfg.seed, "learner.y0")));
  const Vec& alpha = teacher.alpha.values();
  const double kappa = convergence_exponent(trace.teacher, pathway_matrix(learner), period);
  const double final_error = (trace.gamma.sample(trace.gamma.size() - 1) - alpha).norm();
  double slope = std::numeric_limits<double>::quiet_NaN();
  if (learner == teacher.sigma) slope = log_error_slope(trace.gamma, alpha, period);
  return {std::move(teacher), std::move(learner), std::move(gamma0), std::move(trace), kappa, slope, final_error};
}

StructureResult run_structure_learning(const ExperimentConfig& cfg) {
  TeacherSetup teacher = prepare_teacher(cfg);
  CyclePermutation learner = pick_cycle(cfg.learner_sequence, cfg.n, derive_seed(cfg.seed, "learner.sequence"));
  Vec gamma0 = initial_gamma(cfg);
  LiveTeacher stream(teacher.net, teacher.start.state, cfg.dt, teacher.start.settle_time);
  StructureOutcome outcome = learn_structure(stream, LearnerState::initial(learner, gamma0), teacher.start.period,
                                             cfg.epsilon, learn_options(cfg));
  const bool recovered = outcome.pathway == pathway_matrix(teacher.sigma);
  return {std::move(teacher), std::move(learner), std::move(gamma0), std::move(outcome), recovered};
}

bool follows_cycle(const std::vector<int>& order, const CyclePermutation& sigma) {
  if (order.empty()) return false;
  std::vector<bool> seen(static_cast<std::size_t>(sigma.n()), false);
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (order[k] < 1 || order[k] > sigma.n()) return false;
    seen[static_cast<std::size_t>(order[k] - 1)] = true;
    if (k + 1 < order.size() && sigma.succ(order[k]) != order[k + 1]) return false;
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

PipelineResult run_pipeline(const ExperimentConfig& cfg) {
  TeacherSetup teacher = prepare_teacher(cfg);
  CyclePermutation learner = pick_cycle(cfg.learner_sequence, cfg.n, derive_seed(cfg.seed, "learner.sequence"));
  const Vec gamma0 = initial_gamma(cfg);
  const double period = teacher.start.period;
  LiveTeacher stream(teacher.net, teacher.start.state, cfg.dt, teacher.start.settle_time);
  LearnOptions opts = learn_options(cfg);
  opts.record_learner = true;
  opts.y0 = random_initial_state(cfg.n, derive_seed(cfg.seed, "learner.y0"));
  LearnOutcome learn = learn_behavior(stream, LearnerState::initial(learner, gamma0), period,
                                      horizon_of(cfg, period), cfg.epsilon, opts);

  const NeuralTrajectory& xs = learn.trace.teacher;
  const NeuralTrajectory& ys = *learn.trace.learner;
  // Durations and order over the last periods (at most six, after the
  // structure phase).
  const double window = std::min(6.0 * period, xs.end_time() - learn.structure_end);
  const SwitchingReport teacher_report = switching_report(xs.tail(xs.end_time() - window));
  const SwitchingReport learner_report = switching_report(ys.tail(ys.end_time() - window));

  const MotifLibrary lib = default_library(cfg.n, cfg.speed, cfg.turn_radius);
  PosePath teacher_path = simulate_pose_path(xs, lib, {}, cfg.seconds_per_unit);
  PosePath learner_path = simulate_pose_path(ys, lib, {}, cfg.seconds_per_unit);
  const CurvatureSeries ct = curvature_series(teacher_path, cfg.smoothing);
  const CurvatureSeries cl = curvature_series(learner_path, cfg.smoothing);
  const double ts = period * cfg.seconds_per_unit;
  const double t_first = teacher_path.t0 + 2.0 * ts;
  const double t_last = teacher_path.time(teacher_path.size() - 1);
  std::vector<DistancePoint> trace =
      distance_trace(ct, cl, ts, t_first, t_last, cfg.stride_periods * ts, cfg.tau_step);
  const double first = mean_distance(trace, t_first, t_first + ts);
  const double last = mean_distance(trace, trace.back().t - ts, trace.back().t);

  PipelineResult r{std::move(teacher),
                   std::move(learner),
                   std::move(learn),
                   teacher_report.durations,
                   learner_report.durations,
                   teacher_report.neuron_order(),
                   learner_report.neuron_order(),
                   std::move(teacher_path),
                   std::move(learner_path),
                   std::move(trace),
                   ts,
                   first,
                   last};
  return r;
}

// ---------------------------------------------------------------------------
// Sweeps

std::vector<CyclePermutation> all_hamiltonian_cycles(int n) {
  if (n < 3) throw Error(ErrorCode::kSize, "cycles need n >= 3");
  std::vector<int> rest(static_cast<std::size_t>(n - 1));
  std::iota(rest.begin(), rest.end(), 2);
  std::vector<CyclePermutation> out;
  do {
    std::vector<int> seq{1};
    seq.insert(seq.end(), rest.begin(), rest.end());
    out.push_back(cycle_from_sequence(seq));
  } while (std::next_permutation(rest.begin(), rest.end()));
  return out;
}

SweepTrial sweep_trial(const ExperimentConfig& cfg, const CyclePermutation& teacher,
                       const CyclePermutation& learner, std::uint64_t trial_seed) {
  const int n = teacher.n();
  SweepTrial t;
  t.n = n;
  t.teacher = teacher.to_string();
  t.learner = learner.to_string();
  t.min_mismatched_rel = std::numeric_limits<double>::infinity();
  try {
    const Vec alpha = uniform_vector(n, cfg.alpha_lo, cfg.alpha_hi, derive_seed(trial_seed, "alpha"));
    const Vec gamma0 = uniform_vector(n, cfg.gamma0_lo, cfg.gamma0_hi, derive_seed(trial_seed, "gamma0"));
    const WlcNetwork net(pathway_matrix(teacher), CouplingVector(alpha), cfg.epsilon);
    const LimitCycleStart start = settle_on_limit_cycle(
        net, random_initial_state(n, derive_seed(trial_seed, "x0")), cfg.sweep_dt, cfg.warmup_periods);
    LiveTeacher stream(net, start.state, cfg.sweep_dt, start.settle_time);
    const StructureOutcome out =
        learn_structure(stream, LearnerState::initial(learner, gamma0), start.period, cfg.epsilon, learn_options(cfg));
    t.iterations = out.iterations;
    t.recovered = out.pathway == pathway_matrix(teacher);
    for (const auto& it : out.diagnostics) {
      for (const auto& v : it.vertices) {
        if (v.degenerate) {
          ++t.degenerate;
          if (teacher.succ(v.j) == v.sigma_j) ++t.misclassified;
          continue;
        }
        const double rel = v.variance_gamma > 0.0 ? v.error / v.variance_gamma : 0.0;
        const bool truth = teacher.succ(v.j) == v.sigma_j;
        if (truth != v.matched) ++t.misclassified;
        if (truth) {
          t.max_matched_rel = std::max(t.max_matched_rel, rel);
        } else {
          t.min_mismatched_rel = std::min(t.min_mismatched_rel, rel);
        }
      }
    }
  } catch (const std::exception& e) {
    t.iterations = -1;
    t.recovered = false;
    t.error = e.what();
  }
  return t;
}

Separation separation(const SweepResult& sweep, int max_n) {
  Separation s;
  s.min_mismatched = std::numeric_limits<double>::infinity();
  for (const SweepTrial& t : sweep.trials) {
    if (t.n > max_n) continue;
    ++s.trials;
    s.max_matched = std::max(s.max_matched, t.max_matched_rel);
    s.min_mismatched = std::min(s.min_mismatched, t.min_mismatched_rel);
    s.misclassified += t.misclassified;
  }
  return s;
}

SweepResult run_sweep(const ExperimentConfig& cfg, const std::function<void(const SweepTrial&)>& progress) {
  struct Job {
    CyclePermutation teacher, learner;
    std::uint64_t seed;
    int trial;
    bool exhaustive;
  };
  std::vector<Job> jobs;
  for (int n : cfg.sweep_exhaustive) {
    const auto cycles = all_hamiltonian_cycles(n);
    int index = 0;
    for (const auto& a : cycles) {
      for (const auto& b : cycles) {
        jobs.push_back({a, b, derive_seed(cfg.seed, "sweep.exhaustive." + std::to_string(n), static_cast<std::uint64_t>(index)),
                        index, true});
        ++index;
      }
    }
  }
  for (int n : cfg.sweep_random) {
    for (int i = 0; i < cfg.sweep_trials; ++i) {
      const std::uint64_t s = derive_seed(cfg.seed, "sweep.random." + std::to_string(n), static_cast<std::uint64_t>(i));
      jobs.push_back({random_hamiltonian_cycle(n, derive_seed(s, "teacher")),
                      random_hamiltonian_cycle(n, derive_seed(s, "learner")), s, i, false});
    }
  }

  SweepResult result;
  result.trials.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      SweepTrial t = sweep_trial(cfg, jobs[k].teacher, jobs[k].learner, jobs[k].seed);
      t.trial = jobs[k].trial;
      t.exhaustive = jobs[k].exhaustive;
      result.trials[k] = t;
      if (progress) {
        std::lock_guard<std::mutex> lock(report_mutex);
        progress(t);
      }
    }
  };
  unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return result;
}

// ---------------------------------------------------------------------------
// Reports

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string join(const std::vector<int>& v, const char* sep = " ") {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += sep;
    out += std::to_string(v[k]);
  }
  return out;
}

std::string join(const Vec& v) {
  std::string out;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k) out += ' ';
    out += fmt(v(k));
  }
  return out;
}

/// Collects artifacts for one run directory. Nothing touches the disk when
/// the directory is empty.
class Artifacts {
 public:
  Artifacts(std::string name, const ExperimentConfig& cfg, json config_doc)
      : cfg_(cfg), doc_(std::move(config_doc)) {
    report_.name = std::move(name);
    if (!cfg_.out_dir.empty()) std::filesystem::create_directories(cfg_.out_dir);
  }

  void file(const std::string& name, const std::string& content) {
    if (cfg_.out_dir.empty()) return;
    const std::string path = (std::filesystem::path(cfg_.out_dir) / name).string();
    csv::write_file(path, content);
    report_.files.push_back(name);
  }

  void check(const std::string& name, bool ok, const std::string& detail) {
    report_.checks.push_back({name, ok, detail});
  }

  void note(const std::string& line) { notes_ += line + "\n"; }

  RunReport finish() {
    std::ostringstream s;
    s << report_.name << " (wlc " << kVersion << ", seed " << cfg_.seed << ")\n";
    s << notes_;
    for (const Check& c : report_.checks) {
      s << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    }
    s << (report_.passed() ? "all checks passed" : "some checks FAILED") << '\n';
    report_.summary = s.str();
    if (!cfg_.out_dir.empty()) {
      file("summary.txt", report_.summary);
      json checks = json::array();
      for (const Check& c : report_.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
      std::vector<std::string> files = report_.files;
      files.push_back("manifest.json");
      const json manifest = {{"command", report_.name},
                             {"version", kVersion},
                             {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                           "." + std::to_string(EIGEN_MINOR_VERSION)},
                             {"compiler", __VERSION__},
                             {"seed", cfg_.seed},
                             {"config", doc_},
                             {"files", files},
                             {"checks", checks},
                             {"passed", report_.passed()}};
      csv::write_file((std::filesystem::path(cfg_.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
      report_.files.push_back("manifest.json");
    }
    return report_;
  }

 private:
  const ExperimentConfig& cfg_;
  json doc_;
  RunReport report_;
  std::string notes_;
};

std::string series_csv(const SampledSeries& s, const std::string& prefix, int stride) {
  std::ostringstream os;
  csv::write_series(os, s, prefix, stride);
  return os.str();
}

std::string durations_csv(const Vec& alpha, const Vec& durations) {
  std::ostringstream os;
  os << "neuron,alpha,duration\n";
  for (Eigen::Index j = 0; j < durations.size(); ++j) {
    os << (j + 1) << ',' << csv::format_double(alpha(j)) << ',' << csv::format_double(durations(j)) << '\n';
  }
  return os.str();
}

std::string diagnostics_csv(const std::vector<IterationDiagnostics>& d) {
  std::ostringstream os;
  csv::write_diagnostics(os, d);
  return os.str();
}

bool same_ordering(const Vec& a, const Vec& b) {
  std::vector<int> ia(static_cast<std::size_t>(a.size())), ib(ia.size());
  std::iota(ia.begin(), ia.end(), 0);
  std::iota(ib.begin(), ib.end(), 0);
  std::stable_sort(ia.begin(), ia.end(), [&](int x, int y) { return a(x) < a(y); });
  std::stable_sort(ib.begin(), ib.end(), [&](int x, int y) { return b(x) < b(y); });
  return ia == ib;
}

constexpr double kPeriodicityTol = 1e-3;

void teacher_checks(Artifacts& art, const TeacherResult& r, bool ordering_check) {
  const auto order = r.report.neuron_order();
  art.check("activation order follows the teacher cycle", follows_cycle(order, r.setup.sigma),
            "cycle " + join(cycle_order(r.setup.sigma)) + ", observed " + std::to_string(order.size()) + " runs");
  art.check("periodic limit cycle", r.periodicity_defect < kPeriodicityTol,
            "max |x(t+T)-x(t)| = " + fmt(r.periodicity_defect));
  if (ordering_check) {
    art.check("duration ordering matches alpha ordering", same_ordering(r.setup.alpha.values(), r.report.durations),
              "durations " + join(r.report.durations));
  }
}

RunReport teacher_report(const std::string& name, const ExperimentConfig& cfg, const json& doc, bool ordering_check) {
  Artifacts art(name, cfg, doc);
  const TeacherResult r = simulate_teacher(cfg);
  art.note("teacher cycle: " + join(cycle_order(r.setup.sigma), " -> "));
  art.note("alpha: " + join(r.setup.alpha.values()));
  art.note("period: " + fmt(r.setup.start.period));
  art.note("durations: " + join(r.report.durations));
  art.file("teacher.csv", series_csv(r.trajectory, "x", cfg.output_stride));
  art.file("durations.csv", durations_csv(r.setup.alpha.values(), r.report.durations));
  teacher_checks(art, r, ordering_check);
  return art.finish();
}

RunReport durations_report(const std::string& name, const ExperimentConfig& cfg, const json& doc) {
  Artifacts art(name, cfg, doc);
  const DurationResult r = run_duration_learning(cfg);
  art.note("teacher cycle: " + join(cycle_order(r.teacher.sigma), " -> "));
  art.note("alpha: " + join(r.teacher.alpha.values()));
  art.note("gamma0: " + join(r.gamma0));
  art.note("kappa: " + fmt(r.kappa));
  art.note("final gamma: " + join(r.trace.gamma.sample(r.trace.gamma.size() - 1)));
  art.file("gamma.csv", series_csv(r.trace.gamma, "gamma", cfg.output_stride));
  art.file("teacher.csv", series_csv(r.trace.teacher, "x", cfg.output_stride));
  if (r.trace.learner) art.file("learner.csv", series_csv(*r.trace.learner, "y", cfg.output_stride));
  if (r.learner == r.teacher.sigma) {
    art.check("gamma converges to alpha", r.final_error < 1e-4, "||gamma - alpha|| = " + fmt(r.final_error));
    art.check("exponential rate at least kappa", r.slope <= -0.9 * r.kappa,
              "slope " + fmt(r.slope) + ", kappa " + fmt(r.kappa));
  } else {
    art.note("learner wiring differs from the teacher's; convergence checks skipped");
  }
  return art.finish();
}

RunReport structure_report(const std::string& name, const ExperimentConfig& cfg, const json& doc) {
  Artifacts art(name, cfg, doc);
  const StructureResult r = run_structure_learning(cfg);
  art.note("teacher: " + r.teacher.sigma.to_string());
  art.note("learner start: " + r.learner_start.to_string());
  art.note("learned: " + permutation_of(r.outcome.pathway).to_string());
  art.note("iterations: " + std::to_string(r.outcome.iterations));
  art.note("possible behaviors: " + count_behaviors(cfg.n).str());
  art.file("diagnostics.csv", diagnostics_csv(r.outcome.diagnostics));
  art.file("pathway.txt", permutation_of(r.outcome.pathway).to_string() + "\n");
  art.check("teacher graph recovered", r.recovered, "learned " + permutation_of(r.outcome.pathway).to_string());
  art.check("at most n-1 iterations", r.outcome.iterations <= cfg.n - 1,
            std::to_string(r.outcome.iterations) + " iterations for n = " + std::to_string(cfg.n));
  return art.finish();
}

RunReport pipeline_report(const std::string& name, const ExperimentConfig& cfg, const json& doc) {
  Artifacts art(name, cfg, doc);
  const PipelineResult r = run_pipeline(cfg);
  const auto& structure = r.learn.structure;
  art.note("teacher cycle: " + join(cycle_order(r.teacher.sigma), " -> "));
  art.note("alpha: " + join(r.teacher.alpha.values()));
  art.note("learner start: " + r.learner_start.to_string());
  art.note("structure iterations: " + std::to_string(structure.iterations));
  art.note("teacher durations: " + join(r.teacher_durations));
  art.note("learner durations: " + join(r.learner_durations));
  art.note("distance first period " + fmt(r.first_period_mean) + ", final period " + fmt(r.final_period_mean));
  art.file("teacher.csv", series_csv(r.learn.trace.teacher, "x", cfg.output_stride));
  art.file("learner.csv", series_csv(*r.learn.trace.learner, "y", cfg.output_stride));
  art.file("gamma.csv", series_csv(r.learn.trace.gamma, "gamma", cfg.output_stride));
  art.file("diagnostics.csv", diagnostics_csv(structure.diagnostics));
  {
    std::ostringstream os;
    csv::write_pose_path(os, r.teacher_path, cfg.output_stride);
    art.file("teacher_path.csv", os.str());
  }
  {
    std::ostringstream os;
    csv::write_pose_path(os, r.learner_path, cfg.output_stride);
    art.file("learner_path.csv", os.str());
  }
  {
    std::ostringstream os;
    csv::write_distance(os, r.distance);
    art.file("distance.csv", os.str());
  }
  art.check("teacher graph recovered", structure.pathway == pathway_matrix(r.teacher.sigma),
            "learned " + permutation_of(structure.pathway).to_string());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < r.teacher_durations.size(); ++j) {
    worst = std::max(worst, std::abs(r.learner_durations(j) / r.teacher_durations(j) - 1.0));
  }
  art.check("motif durations within 5%", worst < 0.05, "worst relative deviation " + fmt(worst));
  art.check("decoded motif sequence matches", follows_cycle(r.learner_order, r.teacher.sigma) &&
                                                  follows_cycle(r.teacher_order, r.teacher.sigma),
            "learner runs " + std::to_string(r.learner_order.size()));
  art.check("distance drops below 10% of the first period", r.final_period_mean < 0.1 * r.first_period_mean,
            fmt(r.final_period_mean) + " vs " + fmt(r.first_period_mean));
  return art.finish();
}

}  // namespace

RunReport run_preset(const std::string& name, const json& config) {
  json doc = preset_config_json(name);
  check_keys(config.is_null() ? json::object() : config, default_config_json(), "");
  if (!config.is_null()) doc.merge_patch(config);
  const ExperimentConfig cfg = ExperimentConfig::from_json(doc);
  const json echo = cfg.to_json();
  try {
    if (name == "fig2") return teacher_report("fig2", cfg, echo, true);
    if (name == "fig3") return durations_report("fig3", cfg, echo);
    if (name == "learn13") return structure_report("learn13", cfg, echo);
    return pipeline_report("pipeline6", cfg, echo);
  } catch (const Error& e) {
    throw Error(e.code(), "preset " + name + ": " + e.what());
  }
}

RunReport teacher_command(const json& config) {
  const ExperimentConfig cfg = ExperimentConfig::from_json(config);
  return teacher_report("teacher", cfg, cfg.to_json(), false);
}

RunReport learn_command(const json& config) {
  const ExperimentConfig cfg = ExperimentConfig::from_json(config);
  switch (cfg.mode) {
    case LearnMode::kStructure:
      return structure_report("learn", cfg, cfg.to_json());
    case LearnMode::kDurations:
      return durations_report("learn", cfg, cfg.to_json());
    case LearnMode::kBoth:
      break;
  }
  return pipeline_report("learn", cfg, cfg.to_json());
}

RunReport sweep_command(const json& config, const std::function<void(const SweepTrial&)>& progress) {
  const ExperimentConfig cfg = ExperimentConfig::from_json(config);
  Artifacts art("sweep", cfg, cfg.to_json());
  const SweepResult sweep = run_sweep(cfg, progress);
  std::ostringstream os;
  os << "n,trial,exhaustive,teacher,learner,iterations,recovered,max_matched_rel,min_mismatched_rel,degenerate,"
        "misclassified,error\n";
  for (const SweepTrial& t : sweep.trials) {
    os << t.n << ',' << t.trial << ',' << (t.exhaustive ? 1 : 0) << ',' << t.teacher << ',' << t.learner << ','
       << t.iterations << ',' << (t.recovered ? 1 : 0) << ',' << csv::format_double(t.max_matched_rel) << ','
       << csv::format_double(t.min_mismatched_rel) << ',' << t.degenerate << ',' << t.misclassified << ',' << '"' << t.error << '"' << '\n';
  }
  art.file("sweep.csv", os.str());

  std::vector<int> sizes = cfg.sweep_exhaustive;
  sizes.insert(sizes.end(), cfg.sweep_random.begin(), cfg.sweep_random.end());
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  bool all_ok = true;
  for (int n : sizes) {
    int count = 0, ok = 0, worst = 0;
    for (const SweepTrial& t : sweep.trials) {
      if (t.n != n) continue;
      ++count;
      if (t.recovered && t.iterations >= 1 && t.iterations <= n - 1) ++ok;
      worst = std::max(worst, t.iterations);
    }
    art.note("n=" + std::to_string(n) + ": " + std::to_string(ok) + "/" + std::to_string(count) +
             " within n-1, worst " + std::to_string(worst));
    all_ok = all_ok && ok == count;
  }
  art.check("every run recovers the teacher within n-1 iterations", all_ok,
            std::to_string(sweep.trials.size()) + " runs");
  const Separation sep = separation(sweep, 8);
  const Separation all = separation(sweep, std::numeric_limits<int>::max());
  art.note("all sizes: max matched e/Var " + fmt(all.max_matched) + ", min mismatched e/Var " + fmt(all.min_mismatched));
  art.check("edge test separates matched from mismatched (n <= 8)",
            sep.misclassified == 0 && sep.max_matched < 1e-6 && sep.min_mismatched > 1e-3 &&
                sep.min_mismatched > 1e3 * sep.max_matched,
            "max matched e/Var " + fmt(sep.max_matched) + ", min mismatched e/Var " + fmt(sep.min_mismatched) +
                ", misclassified " + std::to_string(sep.misclassified));
  return art.finish();
}

RunReport metric_command(const std::string& teacher_csv, const std::string& learner_csv, double period,
                         double t_first, double tau_step, double smoothing, const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.out_dir = out_dir;
  cfg.tau_step = tau_step;
  cfg.smoothing = smoothing;
  const json echo = {{"teacher", teacher_csv}, {"learner", learner_csv}, {"period", period},
                     {"t_first", t_first}, {"tau_step", tau_step}, {"smoothing", smoothing}};
  Artifacts art("metric", cfg, echo);
  std::istringstream ts(csv::read_file(teacher_csv)), ls(csv::read_file(learner_csv));
  const PosePath tp = csv::read_pose_path(ts);
  const PosePath lp = csv::read_pose_path(ls);
  const CurvatureSeries ct = curvature_series(tp, smoothing);
  const CurvatureSeries cl = curvature_series(lp, smoothing);
  const double first = std::isfinite(t_first) ? t_first : tp.t0 + 2.0 * period;
  const double last = std::min(tp.time(tp.size() - 1), lp.time(lp.size() - 1));
  const auto trace = distance_trace(ct, cl, period, first, last, 0.25 * period, tau_step);
  std::ostringstream os;
  csv::write_distance(os, trace);
  art.file("distance.csv", os.str());
  const double head = mean_distance(trace, first, first + period);
  const double tail = mean_distance(trace, trace.back().t - period, trace.back().t);
  art.note("distance first period " + fmt(head) + ", final period " + fmt(tail));
  const bool finite = std::all_of(trace.begin(), trace.end(),
                                  [](const DistancePoint& p) { return std::isfinite(p.result.D) && p.result.D >= 0.0; });
  art.check("distance finite and nonnegative", finite, std::to_string(trace.size()) + " evaluations");
  return art.finish();
}

}  // namespace wlc
