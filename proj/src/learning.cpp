#include "wlc/learning.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace wlc {

// ---------------------------------------------------------------------------
// Streams

LiveTeacher::LiveTeacher(WlcNetwork net, Vec x0, double dt, double t0)
    : net_(std::move(net)), x_(std::move(x0)), dt_(dt), t_(t0), t0_(t0) {
  if (x_.size() != net_.pathway.n()) throw Error(ErrorCode::kSize, "teacher state dimension mismatch");
  if (!(dt_ > 0.0)) throw Error(ErrorCode::kInvalidConfig, "time step must be positive");
}

void LiveTeacher::advance(TeacherStep& out) {
  const int n = static_cast<int>(x_.size());
  work_.resize(static_cast<std::size_t>(5 * n));
  stage_buf_.resize(static_cast<std::size_t>(4 * n));
  wlc_rk4_step(n, net_.rho.successors0().data(), net_.rho.column_values().data(), net_.epsilon, dt_,
               x_.data(), work_.data(), stage_buf_.data());
  for (std::size_t s = 0; s < 4; ++s) {
    out.stages[s] = Vec::Map(stage_buf_.data() + s * static_cast<std::size_t>(n), n);
  }
  ++steps_;
  t_ = t0_ + static_cast<double>(steps_) * dt_;
  bool ok = true;
  for (int i = 0; i < n; ++i) ok = ok && x_(i) > 0.0 && x_(i) <= kStateCeiling;
  if (!ok) {
    std::ostringstream os;
    os << "teacher state left (0, " << kStateCeiling << "]^n at t=" << t_;
    throw DivergenceError(t_, os.str());
  }
  out.end = x_;
}

RecordedTeacher::RecordedTeacher(NeuralTrajectory traj)
    : traj_(std::move(traj)), current_(traj_.sample(0)) {}

void RecordedTeacher::advance(TeacherStep& out) {
  if (index_ + 2 >= traj_.size()) throw Error(ErrorCode::kWindow, "recorded teacher exhausted");
  out.stages[0] = traj_.sample(index_);
  out.stages[1] = traj_.sample(index_ + 1);
  out.stages[2] = out.stages[1];
  out.stages[3] = traj_.sample(index_ + 2);
  index_ += 2;
  current_ = out.stages[3];
  out.end = current_;
}

// ---------------------------------------------------------------------------
// Observables

namespace {

std::vector<int> successors0(const CyclePermutation& sigma) {
  std::vector<int> s = sigma.successors();
  for (int& v : s) --v;
  return s;
}

void p_into(const std::vector<int>& succ0, const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> out) {
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    out(j) = x(succ0[static_cast<std::size_t>(j)]) * x(j);
  }
}

/// Running trapezoid integral of every row.
Eigen::MatrixXd cumulative_trapezoid(const Eigen::MatrixXd& values, double dt) {
  Eigen::MatrixXd out(values.rows(), values.cols());
  out.col(0).setZero();
  for (Eigen::Index k = 1; k < values.cols(); ++k) {
    out.col(k) = out.col(k - 1) + 0.5 * dt * (values.col(k - 1) + values.col(k));
  }
  return out;
}

Eigen::MatrixXd p_matrix(const std::vector<int>& succ0, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd p(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.cols(); ++k) p_into(succ0, x.col(k), p.col(k));
  return p;
}

}  // namespace

Vec observation_p(const Vec& x, const PathwayMatrix& w) {
  if (x.size() != w.n()) throw Error(ErrorCode::kSize, "state dimension mismatch");
  Vec p(x.size());
  p_into(successors0(permutation_of(w)), x, p);
  return p;
}

SampledSeries observation_p_series(const NeuralTrajectory& traj, const PathwayMatrix& w) {
  if (traj.n() != w.n()) throw Error(ErrorCode::kSize, "trajectory dimension mismatch");
  return SampledSeries(traj.t0(), traj.dt(), p_matrix(successors0(permutation_of(w)), traj.samples()));
}

SampledSeries f_series(const NeuralTrajectory& segment, const PathwayMatrix& w) {
  const SampledSeries p = observation_p_series(segment, w);
  Eigen::MatrixXd f = (-cumulative_trapezoid(p.samples(), p.dt())).array().exp();
  return SampledSeries(segment.t0(), segment.dt(), std::move(f));
}

ObservationSeries make_observation_series(const NeuralTrajectory& teacher, const PathwayMatrix& w) {
  return {teacher, observation_p_series(teacher, w), f_series(teacher, w)};
}

Vec period_mean(const SampledSeries& s, Eigen::Index first, Eigen::Index count) {
  if (count < 1 || first < 0 || first + count >= s.size()) {
    throw Error(ErrorCode::kWindow, "averaging window outside series");
  }
  Vec acc = 0.5 * (s.sample(first) + s.sample(first + count));
  for (Eigen::Index k = first + 1; k < first + count; ++k) acc += s.sample(k);
  return acc / static_cast<double>(count);
}

double convergence_exponent(const NeuralTrajectory& teacher, const PathwayMatrix& w, double period) {
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw Error(ErrorCode::kNoPeriod, "convergence exponent needs a positive period");
  }
  const auto count = static_cast<Eigen::Index>(std::llround(period / teacher.dt()));
  if (count < 2 || count >= teacher.size()) {
    throw Error(ErrorCode::kNoPeriod, "trajectory shorter than one period");
  }
  return period_mean(observation_p_series(teacher, w), 0, count).minCoeff();
}

// ---------------------------------------------------------------------------
// Edge test

namespace {

struct Moments {
  double mean_g = 0.0, mean_f = 0.0, var_g = 0.0, var_f = 0.0, cov = 0.0;
};

double trapezoid_weight(std::size_t k, std::size_t last) { return (k == 0 || k == last) ? 0.5 : 1.0; }

Moments moments(std::span<const double> g, std::span<const double> f) {
  if (g.size() != f.size()) throw Error(ErrorCode::kSize, "series lengths differ");
  if (g.size() < 3) throw Error(ErrorCode::kSize, "regression needs at least 3 samples");
  const std::size_t last = g.size() - 1;
  const double norm = static_cast<double>(last);
  Moments m;
  for (std::size_t k = 0; k <= last; ++k) {
    const double w = trapezoid_weight(k, last);
    m.mean_g += w * g[k];
    m.mean_f += w * f[k];
  }
  m.mean_g /= norm;
  m.mean_f /= norm;
  for (std::size_t k = 0; k <= last; ++k) {
    const double w = trapezoid_weight(k, last);
    const double dg = g[k] - m.mean_g, df = f[k] - m.mean_f;
    m.var_g += w * dg * dg;
    m.var_f += w * df * df;
    m.cov += w * dg * df;
  }
  m.var_g /= norm;
  m.var_f /= norm;
  m.cov /= norm;
  return m;
}

}  // namespace

double regression_error(std::span<const double> gamma, std::span<const double> f, double delta1,
                        double delta2) {
  if (gamma.size() != f.size() || gamma.size() < 2) throw Error(ErrorCode::kSize, "series lengths");
  const std::size_t last = gamma.size() - 1;
  double acc = 0.0;
  for (std::size_t k = 0; k <= last; ++k) {
    const double r = delta1 - (gamma[k] - delta2 * f[k]);
    acc += trapezoid_weight(k, last) * r * r;
  }
  return 0.5 * acc / static_cast<double>(last);
}

RegressionResult regress_delta(std::span<const double> gamma, std::span<const double> f,
                               double variance_floor) {
  const Moments m = moments(gamma, f);
  RegressionResult r;
  r.variance_f = m.var_f;
  r.variance_gamma = m.var_g;
  if (!(m.var_f >= variance_floor)) {
    throw Error(ErrorCode::kDegenerateRegression, "Var[f] below floor");
  }
  r.beta = m.cov / m.var_f;
  r.delta1 = m.mean_g - r.beta * m.mean_f;
  r.delta2 = r.beta;
  r.error = regression_error(gamma, f, r.delta1, r.delta2);
  return r;
}

bool edge_matches(const RegressionResult& r, double gamma_variance, double tol_abs, double tol_rel) {
  if (r.error == 0.0) return true;
  return r.error < tol_abs + tol_rel * gamma_variance;
}

// ---------------------------------------------------------------------------
// Rewiring

namespace {

void validate_omega(const CyclePermutation& sigma, std::span<const int> omega) {
  if (omega.empty()) throw Error(ErrorCode::kInvalidConfig, "rewiring needs a nonempty vertex set");
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (omega[i] < 1 || omega[i] > sigma.n()) throw Error(ErrorCode::kSize, "vertex out of range");
    if (i > 0 && omega[i] <= omega[i - 1]) {
      throw Error(ErrorCode::kInvalidConfig, "vertex set must be strictly ascending");
    }
  }
}

}  // namespace

CyclePermutation rewire(const CyclePermutation& sigma, std::span<const int> omega) {
  validate_omega(sigma, omega);
  std::vector<int> succ = sigma.successors();
  const std::size_t m = omega.size();
  for (std::size_t i = 0; i < m; ++i) {
    const int target = sigma.succ(omega[(i + 1) % m]);
    if (target == omega[i]) {
      throw Error(ErrorCode::kInternalInvariant,
                  "cyclic shift would map vertex " + std::to_string(omega[i]) + " to itself");
    }
    succ[static_cast<std::size_t>(omega[i] - 1)] = target;
  }
  return CyclePermutation::from_successors(succ);
}

RewireResult rewire_untested(const CyclePermutation& sigma, std::span<const int> omega,
                             const TestedSets& tested) {
  validate_omega(sigma, omega);
  if (static_cast<int>(tested.size()) != sigma.n()) throw Error(ErrorCode::kSize, "tested sets size");
  const std::size_t m = omega.size();
  std::vector<int> values(m);
  for (std::size_t i = 0; i < m; ++i) values[i] = sigma.succ(omega[i]);

  const auto allowed = [&](std::size_t i, int value) {
    const int v = omega[i];
    return value != v && !tested[static_cast<std::size_t>(v - 1)].contains(value);
  };
  const auto build = [&](const std::vector<int>& assigned) {
    std::vector<int> succ = sigma.successors();
    for (std::size_t i = 0; i < m; ++i) succ[static_cast<std::size_t>(omega[i] - 1)] = assigned[i];
    return CyclePermutation::from_successors(succ);
  };

  for (std::size_t shift = 1; shift < m; ++shift) {
    std::vector<int> assigned(m);
    bool ok = true;
    for (std::size_t i = 0; i < m && ok; ++i) {
      assigned[i] = values[(i + shift) % m];
      ok = allowed(i, assigned[i]);
    }
    if (ok) {
      return {build(assigned), shift == 1 ? RewireRoute::kCyclicShift : RewireRoute::kLongerShift,
              static_cast<int>(shift)};
    }
  }

  // Augmenting paths (Kuhn); candidates scanned in cyclic-shift order so the
  // result stays close to the shift rule.
  std::vector<int> owner(m, -1);  // value slot -> omega index
  std::function<bool(std::size_t, std::vector<bool>&)> augment = [&](std::size_t i,
                                                                     std::vector<bool>& seen) {
    for (std::size_t s = 1; s <= m; ++s) {
      const std::size_t slot = (i + s) % m;
      if (seen[slot] || !allowed(i, values[slot])) continue;
      seen[slot] = true;
      if (owner[slot] < 0 || augment(static_cast<std::size_t>(owner[slot]), seen)) {
        owner[slot] = static_cast<int>(i);
        return true;
      }
    }
    return false;
  };
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<bool> seen(m, false);
    if (!augment(i, seen)) {
      throw Error(ErrorCode::kInternalInvariant,
                  "no untested successor assignment exists for the unresolved vertices");
    }
  }
  std::vector<int> assigned(m);
  for (std::size_t slot = 0; slot < m; ++slot) assigned[static_cast<std::size_t>(owner[slot])] = values[slot];
  return {build(assigned), RewireRoute::kMatching, 0};
}

// ---------------------------------------------------------------------------
// Learner

LearnerState LearnerState::initial(CyclePermutation sigma, Vec gamma0) {
  const int n = sigma.n();
  if (gamma0.size() != n) throw Error(ErrorCode::kSize, "gamma0 dimension mismatch");
  if (!gamma0.allFinite()) throw Error(ErrorCode::kNumeric, "gamma0 not finite");
  LearnerState s{std::move(sigma), gamma0, Vec::Zero(n), Vec(), Vec(), Vec(), {}, {}, 0};
  s.omega.resize(static_cast<std::size_t>(n));
  std::iota(s.omega.begin(), s.omega.end(), 1);
  s.tested.assign(static_cast<std::size_t>(n), {});
  return s;
}

namespace {

/// Integrates theta (and optionally the learner network y) against a teacher
/// stream for a fixed wiring. gamma is an algebraic function of theta and x.
class IntervalIntegrator {
 public:
  IntervalIntegrator(int n, double epsilon) : n_(n), eps_(epsilon) {
    for (Vec* v : {&base_, &tmp_, &gamma_stage_, &ytmp_, &motor_gamma_}) v->resize(n);
    for (std::size_t s = 0; s < 4; ++s) {
      ks_[s].resize(n);
      kys_[s].resize(n);
    }
  }

  void set_wiring(const CyclePermutation& sigma) { succ0_ = successors0(sigma); }

  /// gamma = gamma_a + W^T(theta - theta_a - x + x_a).
  void gamma_of(const LearnerState& s, const Vec& theta, const Vec& x, Vec& out) const {
    refresh_base(s);
    out.resize(n_);
    gamma_raw(theta.data(), x.data(), out.data());
  }

  void step(const TeacherStep& ts, double h, LearnerState& s, Vec* y) {
    const int n = n_;
    const int* succ = succ0_.data();
    refresh_base(s);
    static constexpr std::array<double, 4> kStageScale{0.0, 0.5, 0.5, 1.0};
    double* th0 = s.theta.data();
    double* gamma = gamma_stage_.data();
    double* motor = motor_gamma_.data();
    double* tmp = tmp_.data();
    double* ytmp = ytmp_.data();
    for (std::size_t stage = 0; stage < 4; ++stage) {
      const double a = kStageScale[stage] * h;
      const double* kprev = stage == 0 ? nullptr : ks_[stage - 1].data();
      for (int i = 0; i < n; ++i) tmp[i] = th0[i] + (kprev ? a * kprev[i] : 0.0);
      const double* x = ts.stages[stage].data();
      gamma_raw(tmp, x, gamma);
      wlc_rhs_kernel(n, succ, gamma, x, eps_, ks_[stage].data());
      if (y != nullptr) {
        const double* kyprev = stage == 0 ? nullptr : kys_[stage - 1].data();
        for (int i = 0; i < n; ++i) ytmp[i] = (*y)(i) + (kyprev ? a * kyprev[i] : 0.0);
        // The motor network only sees inhibitory couplings; gamma itself is
        // left unconstrained.
        for (int j = 0; j < n; ++j) motor[j] = std::max(gamma[j], 0.0);
        wlc_rhs_kernel(n, succ, motor, ytmp, eps_, kys_[stage].data());
      }
    }
    const double w = h / 6.0;
    for (int i = 0; i < n; ++i) {
      th0[i] += w * (ks_[0](i) + 2.0 * ks_[1](i) + 2.0 * ks_[2](i) + ks_[3](i));
    }
    if (y != nullptr) {
      for (int i = 0; i < n; ++i) {
        (*y)(i) += w * (kys_[0](i) + 2.0 * kys_[1](i) + 2.0 * kys_[2](i) + kys_[3](i));
      }
    }
  }

 private:
  // base_j = gamma_a_j - theta_a_i + x_a_i with i = succ(j)
  void refresh_base(const LearnerState& s) const {
    for (int j = 0; j < n_; ++j) {
      const auto i = static_cast<Eigen::Index>(succ0_[static_cast<std::size_t>(j)]);
      base_(j) = s.gamma_anchor(j) - s.theta_anchor(i) + s.x_anchor(i);
    }
  }

  void gamma_raw(const double* theta, const double* x, double* out) const {
    for (int j = 0; j < n_; ++j) {
      const int i = succ0_[static_cast<std::size_t>(j)];
      out[j] = base_(j) + theta[i] - x[i];
    }
  }

  int n_;
  double eps_;
  std::vector<int> succ0_;
  mutable Vec base_;
  std::array<Vec, 4> ks_, kys_;
  Vec tmp_, gamma_stage_, ytmp_, motor_gamma_;
};

void check_learner_state(const Vec& y, double t) {
  if (!y.allFinite() || (y.array() <= 0.0).any() || (y.array() > kStateCeiling).any()) {
    std::ostringstream os;
    os << "learner state left (0, " << kStateCeiling << "]^n at t=" << t;
    throw DivergenceError(t, os.str());
  }
}

void check_gamma(const Vec& gamma, double t) {
  if (!gamma.allFinite()) {
    std::ostringstream os;
    os << "gamma became non-finite at t=" << t;
    throw Error(ErrorCode::kNumeric, os.str());
  }
}

/// Growing column buffers for the recorded series.
struct Recorder {
  std::vector<double> gamma, teacher, learner;
  int n = 0;
  bool with_learner = false;

  void push(const Vec& g, const Vec& x, const Vec* y) {
    gamma.insert(gamma.end(), g.data(), g.data() + n);
    teacher.insert(teacher.end(), x.data(), x.data() + n);
    if (with_learner && y != nullptr) learner.insert(learner.end(), y->data(), y->data() + n);
  }

  static Eigen::MatrixXd to_matrix(const std::vector<double>& flat, int n) {
    const auto cols = static_cast<Eigen::Index>(flat.size()) / n;
    return Eigen::Map<const Eigen::MatrixXd>(flat.data(), n, cols);
  }

  LearningTrace finish(double t0, double dt) const {
    LearningTrace trace{SampledSeries(t0, dt, to_matrix(gamma, n)),
                        NeuralTrajectory(t0, dt, to_matrix(teacher, n)), std::nullopt};
    if (with_learner) trace.learner = NeuralTrajectory(t0, dt, to_matrix(learner, n));
    return trace;
  }
};

/// Shared engine for the structure and duration phases.
class LearnerRun {
 public:
  LearnerRun(TeacherStream& teacher, LearnerState state, double epsilon, bool record_learner,
             const std::optional<Vec>& y0, bool keep_trace)
      : teacher_(teacher),
        state_(std::move(state)),
        integrator_(teacher.n(), epsilon),
        t0_(teacher.time()),
        keep_trace_(keep_trace) {
    const int n = teacher.n();
    if (state_.sigma.n() != n) throw Error(ErrorCode::kSize, "learner and teacher sizes differ");
    if (state_.x_anchor.size() == 0) {
      state_.x_anchor = teacher.current();
      state_.theta_anchor = state_.theta;
      state_.gamma_anchor = state_.gamma0;
    }
    integrator_.set_wiring(state_.sigma);
    if (record_learner) {
      y_ = y0.value_or(random_initial_state(n, 0));
      if (y_->size() != n) throw Error(ErrorCode::kSize, "learner initial state dimension mismatch");
      check_learner_state(*y_, t0_);
    }
    recorder_.n = n;
    recorder_.with_learner = record_learner;
    gamma_.resize(n);
    integrator_.gamma_of(state_, state_.theta, teacher.current(), gamma_);
    if (keep_trace_) recorder_.push(gamma_, teacher.current(), y_ ? &*y_ : nullptr);
  }

  LearnerState& state() { return state_; }
  const Vec& gamma() const { return gamma_; }

  /// Runs `steps` steps; returns gamma and teacher columns including the
  /// starting sample (steps + 1 columns).
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> run(Eigen::Index steps) {
    const int n = teacher_.n();
    const double h = teacher_.step_size();
    Eigen::MatrixXd gammas(n, steps + 1), xs(n, steps + 1);
    gammas.col(0) = gamma_;
    xs.col(0) = teacher_.current();
    for (Eigen::Index k = 1; k <= steps; ++k) {
      teacher_.advance(step_);
      integrator_.step(step_, h, state_, y_ ? &*y_ : nullptr);
      integrator_.gamma_of(state_, state_.theta, step_.end, gamma_);
      check_gamma(gamma_, teacher_.time());
      if (y_) check_learner_state(*y_, teacher_.time());
      gammas.col(k) = gamma_;
      xs.col(k) = step_.end;
      if (keep_trace_) recorder_.push(gamma_, step_.end, y_ ? &*y_ : nullptr);
    }
    return {std::move(gammas), std::move(xs)};
  }

  /// Closes interval I_k: anchors move to the current sample.
  void close_interval() {
    state_.x_anchor = teacher_.current();
    state_.theta_anchor = state_.theta;
    state_.gamma_anchor = gamma_;
  }

  void set_wiring(const CyclePermutation& sigma) {
    state_.sigma = sigma;
    integrator_.set_wiring(sigma);
  }

  LearningTrace trace() const { return recorder_.finish(t0_, teacher_.step_size()); }

 private:
  TeacherStream& teacher_;
  LearnerState state_;
  IntervalIntegrator integrator_;
  double t0_;
  bool keep_trace_;
  std::optional<Vec> y_;
  Vec gamma_;
  TeacherStep step_;
  Recorder recorder_;
};

Eigen::Index steps_for(double span, double h) {
  const auto steps = static_cast<Eigen::Index>(std::llround(span / h));
  if (steps < 2) throw Error(ErrorCode::kInvalidConfig, "interval shorter than two steps");
  return steps;
}

StructureOutcome run_structure(LearnerRun& run, double period, double dt, const LearnOptions& opts) {
  LearnerState& s = run.state();
  const int n = s.sigma.n();
  const int max_iters = opts.max_iters > 0 ? opts.max_iters : n;
  const Eigen::Index steps = steps_for(period, dt);
  std::vector<IterationDiagnostics> diagnostics;

  for (;;) {
    ++s.k;
    for (int j = 1; j <= n; ++j) s.tested[static_cast<std::size_t>(j - 1)].insert(s.sigma.succ(j));
    const auto [gammas, xs] = run.run(steps);
    run.close_interval();

    const std::vector<int> succ0 = successors0(s.sigma);
    const Eigen::MatrixXd f =
        (-cumulative_trapezoid(p_matrix(succ0, xs), dt)).array().exp();
    IterationDiagnostics iter;
    iter.k = s.k;
    std::vector<int> omega;
    for (int j = 1; j <= n; ++j) {
      VertexDiagnostics v;
      v.k = s.k;
      v.j = j;
      v.sigma_j = s.sigma.succ(j);
      const Eigen::RowVectorXd g_row = gammas.row(j - 1);
      const Eigen::RowVectorXd f_row = f.row(j - 1);
      const std::span<const double> g_span(g_row.data(), static_cast<std::size_t>(g_row.size()));
      const std::span<const double> f_span(f_row.data(), static_cast<std::size_t>(f_row.size()));
      try {
        const RegressionResult r = regress_delta(g_span, f_span, opts.variance_floor);
        v.error = r.error;
        v.delta1 = r.delta1;
        v.delta2 = r.delta2;
        v.variance_gamma = r.variance_gamma;
        v.variance_f = r.variance_f;
        v.matched = edge_matches(r, r.variance_gamma, opts.tol_abs, opts.tol_rel);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateRegression) throw;
        v.degenerate = true;
        v.matched = false;
        v.error = std::numeric_limits<double>::quiet_NaN();
      }
      if (!v.matched) omega.push_back(j);
      iter.vertices.push_back(v);
    }
    s.omega = omega;
    iter.omega = omega;

    if (omega.empty()) {
      diagnostics.push_back(std::move(iter));
      return {pathway_matrix(s.sigma), s.k, std::move(diagnostics), s};
    }
    if (s.k >= max_iters) {
      diagnostics.push_back(std::move(iter));
      throw NonConvergenceError(
          "structure learning did not converge within " + std::to_string(max_iters) + " iterations",
          std::move(diagnostics));
    }
    if (opts.literal_rewire) {
      run.set_wiring(rewire(s.sigma, omega));
      iter.route = RewireRoute::kCyclicShift;
    } else {
      RewireResult r = rewire_untested(s.sigma, omega, s.tested);
      iter.route = r.route;
      run.set_wiring(r.sigma);
    }
    diagnostics.push_back(std::move(iter));
  }
}

}  // namespace

LearningTrace duration_learning_run(TeacherStream& teacher, const PathwayMatrix& w, const Vec& gamma0,
                                    double horizon, double epsilon, bool record_learner,
                                    const std::optional<Vec>& y0) {
  LearnerRun run(teacher, LearnerState::initial(permutation_of(w), gamma0), epsilon, record_learner,
                 y0, true);
  run.run(steps_for(horizon, teacher.step_size()));
  return run.trace();
}

StructureOutcome learn_structure(TeacherStream& teacher, LearnerState initial, double period,
                                 double epsilon, const LearnOptions& opts) {
  LearnerRun run(teacher, std::move(initial), epsilon, opts.record_learner, opts.y0, false);
  return run_structure(run, period, teacher.step_size(), opts);
}

LearnOutcome learn_behavior(TeacherStream& teacher, LearnerState initial, double period,
                            double horizon, double epsilon, const LearnOptions& opts) {
  LearnerRun run(teacher, std::move(initial), epsilon, opts.record_learner, opts.y0, true);
  StructureOutcome structure = run_structure(run, period, teacher.step_size(), opts);
  const double structure_end = teacher.time();
  if (horizon > 0.0) run.run(steps_for(horizon, teacher.step_size()));
  structure.state = run.state();
  return {std::move(structure), run.trace(), structure_end};
}

// ---------------------------------------------------------------------------
// Closed-form references

Eigen::MatrixXd cumulative_integral(const SampledSeries& s) {
  const Eigen::MatrixXd& v = s.samples();
  const double h = s.dt();
  const Eigen::Index count = v.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(v.rows(), count);
  if (count < 2) return out;
  if (count == 2) {
    out.col(1) = 0.5 * h * (v.col(0) + v.col(1));
    return out;
  }
  // Even indices: composite Simpson.
  for (Eigen::Index m = 2; m < count; m += 2) {
    out.col(m) = out.col(m - 2) + (h / 3.0) * (v.col(m - 2) + 4.0 * v.col(m - 1) + v.col(m));
  }
  // Index 1: quadratic through samples 0..2.
  out.col(1) = (h / 12.0) * (5.0 * v.col(0) + 8.0 * v.col(1) - v.col(2));
  // Odd indices >= 3: Simpson up to m-3, then the 3/8 rule.
  for (Eigen::Index m = 3; m < count; m += 2) {
    out.col(m) = out.col(m - 3) +
                 (3.0 * h / 8.0) * (v.col(m - 3) + 3.0 * v.col(m - 2) + 3.0 * v.col(m - 1) + v.col(m));
  }
  return out;
}

SampledSeries closed_form_gamma(const Vec& gamma0, const Vec& alpha, const SampledSeries& p) {
  if (gamma0.size() != p.n() || alpha.size() != p.n()) throw Error(ErrorCode::kSize, "dimension mismatch");
  const Eigen::MatrixXd decay = (-cumulative_integral(p)).array().exp();
  Eigen::MatrixXd out = (decay.array().colwise() * (gamma0 - alpha).array()).colwise() + alpha.array();
  return SampledSeries(p.t0(), p.dt(), std::move(out));
}

Vec closed_form_gamma(const Vec& gamma0, const Vec& alpha, const SampledSeries& p, double t) {
  return closed_form_gamma(gamma0, alpha, p).at(t);
}

GlobalObservables global_observables(const NeuralTrajectory& teacher, const PathwayMatrix& learner_w,
                                     const PathwayMatrix& teacher_w, const Vec& alpha) {
  const int n = teacher.n();
  if (learner_w.n() != n || teacher_w.n() != n || alpha.size() != n) {
    throw Error(ErrorCode::kSize, "dimension mismatch");
  }
  const CyclePermutation sy = permutation_of(learner_w);
  const CyclePermutation sx = permutation_of(teacher_w);
  const SampledSeries p = observation_p_series(teacher, learner_w);
  Eigen::MatrixXd f = (-cumulative_integral(p)).array().exp();
  // q_j = x_i (2 x_j - (2 - alpha_l) x_l), i = sy(j), l = teacher predecessor of i.
  Eigen::MatrixXd q(n, teacher.size());
  for (Eigen::Index k = 0; k < teacher.size(); ++k) {
    const auto x = teacher.sample(k);
    for (int j = 1; j <= n; ++j) {
      const int i = sy.succ(j);
      const int l = sx.pred(i);
      q(j - 1, k) = x(i - 1) * (2.0 * x(j - 1) - (2.0 - alpha(l - 1)) * x(l - 1));
    }
  }
  return {SampledSeries(teacher.t0(), teacher.dt(), std::move(f)),
          SampledSeries(teacher.t0(), teacher.dt(), std::move(q))};
}

PeriodicConstants periodic_constants(const GlobalObservables& obs, const Vec& gamma0,
                                     Eigen::Index period_samples) {
  if (period_samples < 2 || period_samples >= obs.f.size()) {
    throw Error(ErrorCode::kWindow, "series shorter than one period");
  }
  PeriodicConstants pc;
  pc.A = obs.f.sample(period_samples);
  if ((pc.A.array() <= 0.0).any() || (pc.A.array() >= 1.0).any()) {
    throw Error(ErrorCode::kInvalidConfig, "A must lie in (0,1)^n");
  }
  const SampledSeries ratio(obs.q.t0(), obs.q.dt(),
                            obs.q.samples().leftCols(period_samples + 1).array() /
                                obs.f.samples().leftCols(period_samples + 1).array());
  pc.B = cumulative_integral(ratio).col(period_samples);
  pc.C = gamma0.array() - pc.A.array() * pc.B.array() / (1.0 - pc.A.array());
  return pc;
}

double lemma1_residual(const SampledSeries& gamma, const SampledSeries& f, const PeriodicConstants& pc,
                       Eigen::Index t_index, int k, Eigen::Index period_samples) {
  if ((pc.A.array() <= 0.0).any() || (pc.A.array() >= 1.0).any()) {
    throw Error(ErrorCode::kInvalidConfig, "A must lie in (0,1)^n");
  }
  const Eigen::Index later = t_index + k * period_samples;
  if (t_index < 0 || later >= gamma.size() || t_index >= f.size()) {
    throw Error(ErrorCode::kWindow, "series too short for the requested shift");
  }
  const Vec shrink = Vec::Ones(pc.A.size()) - pc.A.array().pow(k).matrix();
  const Vec rhs = gamma.sample(t_index) -
                  (shrink.array() * pc.C.array() * f.sample(t_index).array()).matrix();
  return (gamma.sample(later) - rhs).cwiseAbs().maxCoeff();
}

double corollary1_gap(const SampledSeries& gamma, const SampledSeries& f, const PeriodicConstants& pc,
                      Eigen::Index t_index, int k, Eigen::Index period_samples) {
  const Eigen::Index later = t_index + k * period_samples;
  if (t_index < 0 || later >= gamma.size()) throw Error(ErrorCode::kWindow, "series too short");
  const Vec limit = gamma.sample(t_index) - (pc.C.array() * f.sample(t_index).array()).matrix();
  return (gamma.sample(later) - limit).cwiseAbs().maxCoeff();
}

}  // namespace wlc
