#pragma once

// Generalized Lotka-Volterra networks in the winner-less competition regime:
// coupling construction, fixed-step integration and switching analysis.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wlc/graph.hpp"

namespace wlc {

using Vec = Eigen::VectorXd;

inline constexpr double kDefaultEpsilon = 1e-4;
inline constexpr double kDefaultDt = 1e-2;
inline constexpr int kDefaultWarmupPeriods = 3;

/// Per-neuron duration parameters (alpha for a teacher, gamma for a learner).
class CouplingVector {
 public:
  /// Entries must be finite and nonnegative.
  explicit CouplingVector(Vec values);
  CouplingVector(std::initializer_list<double> values);

  int n() const noexcept { return static_cast<int>(values_.size()); }
  const Vec& values() const noexcept { return values_; }
  double operator[](int j) const { return values_(j - 1); }  // 1-based
  /// Every entry strictly inside (0, 1).
  bool wlc_admissible() const;

 private:
  Vec values_;
};

/// rho(i,i) = 1, rho(succ(j), j) = c_j, every other entry 2.
///
/// Kept in factored form (successor map + column values) so that products
/// with a state vector cost O(n); `dense()` materializes the matrix.
class CouplingMatrix {
 public:
  /// Values are not sign-checked here: a learner's gamma may leave R+ while
  /// its graph is still wrong.
  CouplingMatrix(const CyclePermutation& perm, Vec column_values);

  int n() const noexcept { return static_cast<int>(values_.size()); }
  Eigen::MatrixXd dense() const;
  /// rho * x.
  Vec multiply(const Vec& x) const;
  void multiply(const Vec& x, Vec& out) const;

  const std::vector<int>& successors0() const noexcept { return succ0_; }
  const Vec& column_values() const noexcept { return values_; }

 private:
  std::vector<int> succ0_;
  Vec values_;
};

/// out = rho x for rho given in factored form (0-based successors).
void coupling_product(std::span<const int> succ0, const Vec& column_values, const Vec& x, Vec& out);

CouplingMatrix build_coupling_matrix(const PathwayMatrix& w, const CouplingVector& c);

/// x ⊙ (1 - rho x) + eps. Throws kNumeric on non-finite input.
Vec wlc_rhs(const Vec& x, const CouplingMatrix& rho, double epsilon);
/// Allocation-free variant used by the integrators; no finiteness check.
void wlc_rhs_into(const Vec& x, const CouplingMatrix& rho, double epsilon, Vec& out);

/// Same field on raw arrays (0-based successors, column values c). This is
/// the innermost loop of every integrator, so it avoids Eigen temporaries.
void wlc_rhs_kernel(int n, const int* succ0, const double* c, const double* x, double epsilon,
                    double* out);

/// One RK4 step of the field in place on x. `work` holds 5n doubles; when
/// `stages` is non-null the four stage states are stored there (4n doubles).
void wlc_rk4_step(int n, const int* succ0, const double* c, double epsilon, double h, double* x,
                  double* work, double* stages = nullptr);

struct WlcNetwork {
  WlcNetwork(PathwayMatrix w, CouplingVector c, double eps = kDefaultEpsilon);

  PathwayMatrix pathway;
  CouplingVector coupling;
  double epsilon;
  CouplingMatrix rho;
};

/// Uniformly sampled vector series; column k holds the value at t0 + k dt.
class SampledSeries {
 public:
  SampledSeries(double t0, double dt, Eigen::MatrixXd samples);

  int n() const noexcept { return static_cast<int>(samples_.rows()); }
  Eigen::Index size() const noexcept { return samples_.cols(); }
  double dt() const noexcept { return dt_; }
  double t0() const noexcept { return t0_; }
  double time(Eigen::Index k) const { return t0_ + static_cast<double>(k) * dt_; }
  double end_time() const { return time(size() - 1); }
  auto sample(Eigen::Index k) const { return samples_.col(k); }
  const Eigen::MatrixXd& samples() const noexcept { return samples_; }
  /// Samples from time `from` on (rounded to the grid).
  SampledSeries tail(double from) const;
  /// Samples [first, first + count).
  SampledSeries slice(Eigen::Index first, Eigen::Index count) const;
  /// Linear interpolation between samples.
  Vec at(double t) const;

 private:
  double t0_;
  double dt_;
  Eigen::MatrixXd samples_;
};

/// Network state x(t); every component stays in (0, 2] when produced by
/// `integrate`.
using NeuralTrajectory = SampledSeries;

/// One explicit classical Runge-Kutta step of size h for an autonomous
/// system; `rhs(state, out)` writes the derivative.
template <class Rhs>
void rk4_step(Rhs&& rhs, Vec& state, double h, Vec& k1, Vec& k2, Vec& k3, Vec& k4, Vec& tmp) {
  rhs(state, k1);
  tmp = state + 0.5 * h * k1;
  rhs(tmp, k2);
  tmp = state + 0.5 * h * k2;
  rhs(tmp, k3);
  tmp = state + h * k3;
  rhs(tmp, k4);
  state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Upper bound of the admissible state box.
inline constexpr double kStateCeiling = 2.0;

/// Fixed-step RK4 from x0 over `duration`. Every step is checked for
/// positivity, the [0, 2] box and finiteness (DivergenceError otherwise).
NeuralTrajectory integrate(const WlcNetwork& net, const Vec& x0, double duration,
                           double dt = kDefaultDt, double t0 = 0.0);

/// Seeded initial state, entries uniform in (0.05, 0.95).
Vec random_initial_state(int n, std::uint64_t seed);

/// Index (1-based) of the largest component, ties toward the lower index.
int argmax_neuron(const Eigen::Ref<const Vec>& x);

struct ActiveRun {
  int neuron = 0;       // 1-based
  double start = 0.0;   // interpolated switching time
  double duration = 0.0;
  bool complete = false;  // false for the clipped first and last runs
};

struct SwitchingReport {
  std::vector<ActiveRun> active_sequence;
  std::optional<double> period_estimate;
  /// Mean complete-run duration per neuron; 0 for neurons never active.
  Vec durations;
  int cycles = 0;  // onsets of the reference neuron minus one
  std::vector<int> neuron_order() const;
};

/// Argmax runs of `traj` after dropping the first `discard` time units.
/// Throws kNoPeriod if the reference neuron switches on fewer than twice.
SwitchingReport switching_report(const NeuralTrajectory& traj, double discard = 0.0);

/// Same runs without the period requirement.
std::vector<ActiveRun> argmax_runs(const NeuralTrajectory& traj, double discard = 0.0);

/// max_t ||x(t+T) - x(t)||_inf over the trajectory after `discard`.
double periodicity_defect(const NeuralTrajectory& traj, double period, double discard);

/// Coarse run + warm-up: estimates the period, then discards
/// `warmup_periods` periods. Returns the state on the limit cycle and the
/// refined period.
struct LimitCycleStart {
  Vec state;
  double period = 0.0;
  double settle_time = 0.0;
};
LimitCycleStart settle_on_limit_cycle(const WlcNetwork& net, const Vec& x0, double dt = kDefaultDt,
                                      int warmup_periods = kDefaultWarmupPeriods);

struct CalibrationOptions {
  double epsilon = kDefaultEpsilon;
  double dt = kDefaultDt;
  double rel_tol = 0.005;  // inner bisection target
  double accept_tol = 0.05;
  int max_sweeps = 8;
  int max_bisection_steps = 40;
  double alpha_lo = 0.01;
  double alpha_hi = 0.99;
  std::uint64_t seed = 1;
};

/// Finds alpha in (0,1)^n whose measured on-state durations match `targets`.
CouplingVector calibrate_alpha(const PathwayMatrix& w, std::span<const double> targets,
                               const CalibrationOptions& opts = {});

/// Mean on-state durations for a given alpha (limit-cycle measurement).
Vec measure_durations(const PathwayMatrix& w, const CouplingVector& alpha, double epsilon,
                      double dt, std::uint64_t seed, int cycles = 4);

}  // namespace wlc
