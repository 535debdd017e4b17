#pragma once

// Teacher-learner identification: duration learning from observed teacher
// activity, the per-edge regression test, and iterative rewiring of the
// learner's pathway matrix.

#include <array>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "wlc/dynamics.hpp"
#include "wlc/error.hpp"
#include "wlc/graph.hpp"

namespace wlc {

// ---------------------------------------------------------------------------
// Observation streams

/// Teacher states at the four stages of one RK4 step plus the step end.
struct TeacherStep {
  std::array<Vec, 4> stages;
  Vec end;
};

/// Source of teacher activity, consumed one integration step at a time. The
/// learner only ever sees x; it never reads the teacher's parameters.
class TeacherStream {
 public:
  virtual ~TeacherStream() = default;
  virtual int n() const = 0;
  virtual double step_size() const = 0;
  virtual double time() const = 0;
  virtual const Vec& current() const = 0;
  /// Advances by one step. Throws kWindow when a recorded stream runs out.
  virtual void advance(TeacherStep& out) = 0;
};

/// Simulates the teacher network alongside the learner.
class LiveTeacher final : public TeacherStream {
 public:
  LiveTeacher(WlcNetwork net, Vec x0, double dt = kDefaultDt, double t0 = 0.0);
  int n() const override { return net_.pathway.n(); }
  double step_size() const override { return dt_; }
  double time() const override { return t_; }
  const Vec& current() const override { return x_; }
  void advance(TeacherStep& out) override;

 private:
  WlcNetwork net_;
  Vec x_;
  double dt_;
  double t_;
  long steps_ = 0;
  double t0_;
  std::vector<double> work_, stage_buf_;
};

/// Replays a recorded trajectory. One learner step spans two samples; the
/// middle sample serves both midpoint stages.
class RecordedTeacher final : public TeacherStream {
 public:
  explicit RecordedTeacher(NeuralTrajectory traj);
  int n() const override { return traj_.n(); }
  double step_size() const override { return 2.0 * traj_.dt(); }
  double time() const override { return traj_.time(index_); }
  const Vec& current() const override { return current_; }
  void advance(TeacherStep& out) override;

 private:
  NeuralTrajectory traj_;
  Eigen::Index index_ = 0;
  Vec current_;
};

// ---------------------------------------------------------------------------
// Observables

/// p = W^T x ⊙ x, i.e. p_j = x_{succ(j)} x_j.
Vec observation_p(const Vec& x, const PathwayMatrix& w);
SampledSeries observation_p_series(const NeuralTrajectory& traj, const PathwayMatrix& w);

/// exp(-∫p) with the integral restarted at the first sample (trapezoid).
SampledSeries f_series(const NeuralTrajectory& segment, const PathwayMatrix& w);

/// Teacher activity with its derived p and f for one learner wiring.
struct ObservationSeries {
  NeuralTrajectory teacher;
  SampledSeries p;
  SampledSeries f;
};
ObservationSeries make_observation_series(const NeuralTrajectory& teacher, const PathwayMatrix& w);

/// Period average by trapezoid over `count` intervals starting at `first`.
Vec period_mean(const SampledSeries& s, Eigen::Index first, Eigen::Index count);

/// min_j <p_j> over one period starting at the first sample.
double convergence_exponent(const NeuralTrajectory& teacher, const PathwayMatrix& w, double period);

// ---------------------------------------------------------------------------
// Edge test

inline constexpr double kVarianceFloor = 1e-12;
inline constexpr double kDefaultTolAbs = 1e-8;
inline constexpr double kDefaultTolRel = 1e-6;

struct RegressionResult {
  double delta1 = 0.0;  // intercept
  double delta2 = 0.0;  // slope
  double error = 0.0;   // e_j(delta*)
  double beta = 0.0;
  double variance_f = 0.0;
  double variance_gamma = 0.0;
};

/// Least-squares fit gamma_j ≈ delta1 + delta2 f_j with trapezoid-weighted
/// time averages. Throws kDegenerateRegression when Var[f] < `variance_floor`.
RegressionResult regress_delta(std::span<const double> gamma, std::span<const double> f,
                               double variance_floor = kVarianceFloor);

/// e_j(delta) for an arbitrary delta, same averaging as regress_delta.
double regression_error(std::span<const double> gamma, std::span<const double> f, double delta1,
                        double delta2);

bool edge_matches(const RegressionResult& r, double gamma_variance, double tol_abs = kDefaultTolAbs,
                  double tol_rel = kDefaultTolRel);

// ---------------------------------------------------------------------------
// Rewiring

/// Successor values cyclically shifted among the (ascending) members of
/// `omega`: succ(omega_i) <- succ(omega_{i+1}), last <- first. Throws
/// kInternalInvariant if the result would have a fixed point.
CyclePermutation rewire(const CyclePermutation& sigma, std::span<const int> omega);

/// Cumulative successors tried per vertex (index j-1).
using TestedSets = std::vector<std::set<int>>;

/// How `rewire_untested` produced its answer.
enum class RewireRoute { kCyclicShift, kLongerShift, kMatching };

struct RewireResult {
  CyclePermutation sigma;
  RewireRoute route;
  int shift = 1;
};

/// Reassigns the successor values of `omega` so that no member keeps a value
/// it already tried and none maps to itself. Prefers the single cyclic shift
/// of `rewire`, then longer shifts, then a deterministic augmenting-path
/// matching. Throws kInternalInvariant if no admissible assignment exists.
RewireResult rewire_untested(const CyclePermutation& sigma, std::span<const int> omega,
                             const TestedSets& tested);

// ---------------------------------------------------------------------------
// Learner

/// Mutable learner bookkeeping across intervals.
struct LearnerState {
  CyclePermutation sigma;
  Vec gamma0;
  Vec theta;           // theta(0) = 0
  Vec x_anchor;        // x_{k-1}
  Vec theta_anchor;    // theta_{k-1}
  Vec gamma_anchor;    // gamma_{k-1}
  std::vector<int> omega;
  TestedSets tested;
  int k = 0;

  /// Fresh state: theta = 0, omega = V, empty tested sets. Anchors are set
  /// when the first interval starts.
  static LearnerState initial(CyclePermutation sigma, Vec gamma0);
};

struct LearnOptions {
  double tol_abs = kDefaultTolAbs;
  double tol_rel = kDefaultTolRel;
  double variance_floor = kVarianceFloor;
  int max_iters = 0;  // 0: n
  bool record_learner = false;
  std::optional<Vec> y0;  // learner initial state when recorded
  /// Literal cyclic shift only (throws on fixed points) instead of
  /// rewire_untested.
  bool literal_rewire = false;
};

struct VertexDiagnostics {
  int k = 0;
  int j = 0;
  int sigma_j = 0;
  double error = 0.0;
  bool matched = false;
  bool degenerate = false;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double variance_gamma = 0.0;
  double variance_f = 0.0;
};

struct IterationDiagnostics {
  int k = 0;
  std::vector<VertexDiagnostics> vertices;
  std::vector<int> omega;  // unresolved after this iteration
  RewireRoute route = RewireRoute::kCyclicShift;
};

struct StructureOutcome {
  PathwayMatrix pathway;
  int iterations = 0;
  std::vector<IterationDiagnostics> diagnostics;
  LearnerState state;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::vector<IterationDiagnostics> diagnostics)
      : Error(ErrorCode::kNonConvergence, what), diagnostics_(std::move(diagnostics)) {}
  const std::vector<IterationDiagnostics>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<IterationDiagnostics> diagnostics_;
};

/// Recorded series of a learning run. The learner network y is driven by
/// max(gamma, 0): gamma may go negative on wrong edges, and negative
/// couplings would make the motor network excitatory. `gamma` and `teacher` share the time
/// grid; `learner` is present only when requested.
struct LearningTrace {
  SampledSeries gamma;
  NeuralTrajectory teacher;
  std::optional<NeuralTrajectory> learner;
};

/// Integrates theta' = x ⊙ (1 - rho_gamma x) + eps with
/// gamma = gamma0 + W^T(theta - (x - x0)) for a fixed wiring.
LearningTrace duration_learning_run(TeacherStream& teacher, const PathwayMatrix& w,
                                    const Vec& gamma0, double horizon, double epsilon,
                                    bool record_learner = false,
                                    const std::optional<Vec>& y0 = std::nullopt);

/// Interval-by-interval structure search until every edge passes the
/// regression test.
StructureOutcome learn_structure(TeacherStream& teacher, LearnerState initial, double period,
                                 double epsilon, const LearnOptions& opts = {});

struct LearnOutcome {
  StructureOutcome structure;
  LearningTrace trace;  // whole run: structure phase then duration phase
  double structure_end = 0.0;
};

/// Structure phase followed by `horizon` time units of duration learning
/// with the recovered wiring.
LearnOutcome learn_behavior(TeacherStream& teacher, LearnerState initial, double period,
                            double horizon, double epsilon, const LearnOptions& opts = {});

// ---------------------------------------------------------------------------
// Closed-form references

/// Cumulative integral of each row, fourth-order accurate (composite Simpson
/// with a 3/8 tail for odd counts).
Eigen::MatrixXd cumulative_integral(const SampledSeries& s);

/// alpha + (gamma0 - alpha) ⊙ exp(-∫_0^t p) at every sample of `p`.
SampledSeries closed_form_gamma(const Vec& gamma0, const Vec& alpha, const SampledSeries& p);
/// Same, at a single time t (linear interpolation of the cumulative integral).
Vec closed_form_gamma(const Vec& gamma0, const Vec& alpha, const SampledSeries& p, double t);

/// Constants of the periodic solution for a mismatched wiring.
struct PeriodicConstants {
  Vec A;  // f(T)
  Vec B;  // g(T)
  Vec C;  // gamma0 - A ⊙ B ⊘ (1 - A)
};

/// f over the whole series (no restart) and q from the teacher's own wiring,
/// integrated over the first `period_samples` intervals.
struct GlobalObservables {
  SampledSeries f;
  SampledSeries q;
};
GlobalObservables global_observables(const NeuralTrajectory& teacher, const PathwayMatrix& learner_w,
                                     const PathwayMatrix& teacher_w, const Vec& alpha);

PeriodicConstants periodic_constants(const GlobalObservables& obs, const Vec& gamma0,
                                     Eigen::Index period_samples);

/// ||gamma(t+kT) - [gamma(t) - (1 - A^k) ⊙ C ⊙ f(t)]||_inf at sample index
/// `t_index`. Throws kInvalidConfig unless A ∈ (0,1)^n.
double lemma1_residual(const SampledSeries& gamma, const SampledSeries& f,
                       const PeriodicConstants& pc, Eigen::Index t_index, int k,
                       Eigen::Index period_samples);

/// ||gamma(t+kT) - (gamma(t) - C ⊙ f(t))||_inf.
double corollary1_gap(const SampledSeries& gamma, const SampledSeries& f, const PeriodicConstants& pc,
                      Eigen::Index t_index, int k, Eigen::Index period_samples);

}  // namespace wlc
