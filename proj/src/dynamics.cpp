#include "wlc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "wlc/error.hpp"

namespace wlc {

CouplingVector::CouplingVector(Vec values) : values_(std::move(values)) {
  if (!values_.allFinite()) throw Error(ErrorCode::kNumeric, "coupling vector is not finite");
  if ((values_.array() < 0.0).any()) {
    throw Error(ErrorCode::kNumeric, "coupling vector entries must be nonnegative");
  }
}

CouplingVector::CouplingVector(std::initializer_list<double> values)
    : CouplingVector(Vec::Map(values.begin(), static_cast<Eigen::Index>(values.size()))) {}

bool CouplingVector::wlc_admissible() const {
  return (values_.array() > 0.0).all() && (values_.array() < 1.0).all();
}

CouplingMatrix::CouplingMatrix(const CyclePermutation& perm, Vec column_values)
    : succ0_(perm.successors()), values_(std::move(column_values)) {
  if (values_.size() != perm.n()) {
    throw Error(ErrorCode::kSize, "coupling vector length does not match the pathway matrix");
  }
  for (int& s : succ0_) --s;
}

Eigen::MatrixXd CouplingMatrix::dense() const {
  const int n = this->n();
  Eigen::MatrixXd rho = Eigen::MatrixXd::Constant(n, n, 2.0);
  rho.diagonal().setOnes();
  for (int j = 0; j < n; ++j) rho(succ0_[static_cast<std::size_t>(j)], j) = values_(j);
  return rho;
}

void coupling_product(std::span<const int> succ0, const Vec& column_values, const Vec& x,
                      Vec& out) {
  // Every off-diagonal entry is 2 except one per column.
  const double total = x.sum();
  out = (2.0 * total) - x.array();
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    out(succ0[static_cast<std::size_t>(j)]) += (column_values(j) - 2.0) * x(j);
  }
}

void CouplingMatrix::multiply(const Vec& x, Vec& out) const {
  coupling_product(succ0_, values_, x, out);
}

Vec CouplingMatrix::multiply(const Vec& x) const {
  Vec out(x.size());
  multiply(x, out);
  return out;
}

CouplingMatrix build_coupling_matrix(const PathwayMatrix& w, const CouplingVector& c) {
  if (w.n() != c.n()) {
    throw Error(ErrorCode::kSize, "coupling vector length does not match the pathway matrix");
  }
  return CouplingMatrix(permutation_of(w), c.values());
}

void wlc_rhs_into(const Vec& x, const CouplingMatrix& rho, double epsilon, Vec& out) {
  out.resize(x.size());
  wlc_rhs_kernel(rho.n(), rho.successors0().data(), rho.column_values().data(), x.data(), epsilon,
                 out.data());
}

void wlc_rhs_kernel(int n, const int* succ0, const double* c, const double* x, double epsilon,
                    double* out) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += x[i];
  // (rho x)_i = 2 total - x_i, corrected by (c_j - 2) x_j on row succ(j)
  for (int i = 0; i < n; ++i) out[i] = x[i] * (1.0 - 2.0 * total + x[i]) + epsilon;
  for (int j = 0; j < n; ++j) {
    const int i = succ0[j];
    out[i] -= x[i] * (c[j] - 2.0) * x[j];
  }
}

void wlc_rk4_step(int n, const int* succ0, const double* c, double epsilon, double h, double* x,
                  double* work, double* stages) {
  double* k1 = work;
  double* k2 = work + n;
  double* k3 = work + 2 * n;
  double* k4 = work + 3 * n;
  double* tmp = work + 4 * n;
  if (stages != nullptr) std::copy(x, x + n, stages);
  wlc_rhs_kernel(n, succ0, c, x, epsilon, k1);
  for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
  if (stages != nullptr) std::copy(tmp, tmp + n, stages + n);
  wlc_rhs_kernel(n, succ0, c, tmp, epsilon, k2);
  for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
  if (stages != nullptr) std::copy(tmp, tmp + n, stages + 2 * n);
  wlc_rhs_kernel(n, succ0, c, tmp, epsilon, k3);
  for (int i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
  if (stages != nullptr) std::copy(tmp, tmp + n, stages + 3 * n);
  wlc_rhs_kernel(n, succ0, c, tmp, epsilon, k4);
  const double w = h / 6.0;
  for (int i = 0; i < n; ++i) x[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

Vec wlc_rhs(const Vec& x, const CouplingMatrix& rho, double epsilon) {
  if (x.size() != rho.n()) throw Error(ErrorCode::kSize, "state dimension mismatch");
  if (!x.allFinite()) throw Error(ErrorCode::kNumeric, "non-finite state");
  Vec out(x.size());
  wlc_rhs_into(x, rho, epsilon, out);
  return out;
}

WlcNetwork::WlcNetwork(PathwayMatrix w, CouplingVector c, double eps)
    : pathway(std::move(w)),
      coupling(std::move(c)),
      epsilon(eps),
      rho(build_coupling_matrix(pathway, coupling)) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidConfig, "epsilon must be positive");
  }
}

SampledSeries::SampledSeries(double t0, double dt, Eigen::MatrixXd samples)
    : t0_(t0), dt_(dt), samples_(std::move(samples)) {
  if (!(dt_ > 0.0)) throw Error(ErrorCode::kInvalidConfig, "time step must be positive");
}

SampledSeries SampledSeries::tail(double from) const {
  const auto first = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::llround((from - t0_) / dt_)), 0, size() - 1);
  return SampledSeries(time(first), dt_, samples_.rightCols(size() - first));
}

SampledSeries SampledSeries::slice(Eigen::Index first, Eigen::Index count) const {
  if (first < 0 || count < 1 || first + count > size()) {
    throw Error(ErrorCode::kWindow, "slice outside series");
  }
  return SampledSeries(time(first), dt_, samples_.middleCols(first, count));
}

Vec SampledSeries::at(double t) const {
  const double s = (t - t0_) / dt_;
  if (s < -1e-9 || s > static_cast<double>(size() - 1) + 1e-9) {
    throw Error(ErrorCode::kWindow, "time outside trajectory");
  }
  const auto k = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(s)), 0, size() - 2);
  const double w = std::clamp(s - static_cast<double>(k), 0.0, 1.0);
  return (1.0 - w) * samples_.col(k) + w * samples_.col(k + 1);
}

namespace {

bool in_box(const double* x, int n) {
  for (int i = 0; i < n; ++i) {
    // also rejects NaN
    if (!(x[i] > 0.0 && x[i] <= kStateCeiling)) return false;
  }
  return true;
}

void check_state(const Vec& x, double t) {
  if (!in_box(x.data(), static_cast<int>(x.size()))) {
    std::ostringstream os;
    os << "state left (0, " << kStateCeiling << "]^n at t=" << t;
    throw DivergenceError(t, os.str());
  }
}

}  // namespace

NeuralTrajectory integrate(const WlcNetwork& net, const Vec& x0, double duration, double dt,
                           double t0) {
  const int n = net.pathway.n();
  if (x0.size() != n) throw Error(ErrorCode::kSize, "initial state dimension mismatch");
  if (!(dt > 0.0) || !(duration >= dt * (1.0 - 1e-12))) {
    throw Error(ErrorCode::kInvalidConfig, "need dt > 0 and duration >= dt");
  }
  check_state(x0, t0);
  const auto steps = static_cast<Eigen::Index>(std::llround(duration / dt));
  Eigen::MatrixXd samples(n, steps + 1);
  samples.col(0) = x0;
  std::vector<double> work(static_cast<std::size_t>(5 * n));
  const int* succ0 = net.rho.successors0().data();
  const double* c = net.rho.column_values().data();
  for (Eigen::Index k = 1; k <= steps; ++k) {
    double* x = samples.col(k).data();
    std::copy(samples.col(k - 1).data(), samples.col(k - 1).data() + n, x);
    wlc_rk4_step(n, succ0, c, net.epsilon, dt, x, work.data());
    if (!in_box(x, n)) check_state(samples.col(k), t0 + static_cast<double>(k) * dt);
  }
  return NeuralTrajectory(t0, dt, std::move(samples));
}

Vec random_initial_state(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Vec x(n);
  for (int j = 0; j < n; ++j) x(j) = u(rng);
  return x;
}

int argmax_neuron(const Eigen::Ref<const Vec>& x) {
  if (x.size() == 0) throw Error(ErrorCode::kSize, "empty state");
  if (!x.allFinite()) throw Error(ErrorCode::kNumeric, "non-finite state");
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < x.size(); ++j) {
    if (x(j) > x(best)) best = j;
  }
  return static_cast<int>(best) + 1;
}

std::vector<ActiveRun> argmax_runs(const NeuralTrajectory& traj, double discard) {
  const NeuralTrajectory t = discard > 0.0 ? traj.tail(traj.t0() + discard) : traj;
  std::vector<ActiveRun> runs;
  if (t.size() == 0) return runs;
  int current = argmax_neuron(t.sample(0));
  runs.push_back({current, t.time(0), 0.0, false});
  for (Eigen::Index k = 1; k < t.size(); ++k) {
    const int next = argmax_neuron(t.sample(k));
    if (next == current) continue;
    // Switching instant: zero of x_next - x_current on the last step.
    const double before = t.sample(k - 1)(next - 1) - t.sample(k - 1)(current - 1);
    const double after = t.sample(k)(next - 1) - t.sample(k)(current - 1);
    double frac = 1.0;
    if (after - before > 0.0) frac = std::clamp(-before / (after - before), 0.0, 1.0);
    const double when = t.time(k - 1) + frac * t.dt();
    runs.back().duration = when - runs.back().start;
    runs.push_back({next, when, 0.0, true});
    current = next;
  }
  runs.back().duration = t.end_time() - runs.back().start;
  runs.back().complete = false;
  return runs;
}

std::vector<int> SwitchingReport::neuron_order() const {
  std::vector<int> out;
  out.reserve(active_sequence.size());
  for (const auto& r : active_sequence) out.push_back(r.neuron);
  return out;
}

SwitchingReport switching_report(const NeuralTrajectory& traj, double discard) {
  SwitchingReport report;
  report.active_sequence = argmax_runs(traj, discard);
  const int n = traj.n();
  report.durations = Vec::Zero(n);

  int reference = n + 1;
  for (const auto& r : report.active_sequence) reference = std::min(reference, r.neuron);
  std::vector<double> onsets;
  for (const auto& r : report.active_sequence) {
    if (r.neuron == reference && r.complete) onsets.push_back(r.start);
  }
  if (onsets.size() < 2) {
    throw Error(ErrorCode::kNoPeriod, "reference neuron switched on fewer than twice");
  }
  report.cycles = static_cast<int>(onsets.size()) - 1;
  report.period_estimate = (onsets.back() - onsets.front()) / report.cycles;

  // Durations over complete cycles only: runs starting in [first, last onset).
  Vec counts = Vec::Zero(n);
  for (const auto& r : report.active_sequence) {
    if (!r.complete || r.start < onsets.front() || r.start >= onsets.back()) continue;
    report.durations(r.neuron - 1) += r.duration;
    counts(r.neuron - 1) += 1.0;
  }
  for (int j = 0; j < n; ++j) {
    if (counts(j) > 0) report.durations(j) /= counts(j);
  }
  return report;
}

double periodicity_defect(const NeuralTrajectory& traj, double period, double discard) {
  double worst = 0.0;
  const double start = traj.t0() + discard;
  for (Eigen::Index k = 0; k < traj.size(); ++k) {
    const double t = traj.time(k);
    if (t < start) continue;
    if (t + period > traj.end_time()) break;
    worst = std::max(worst, (traj.at(t + period) - traj.sample(k)).cwiseAbs().maxCoeff());
  }
  return worst;
}

LimitCycleStart settle_on_limit_cycle(const WlcNetwork& net, const Vec& x0, double dt,
                                      int warmup_periods) {
  // Coarse estimate: extend the run chunk by chunk until the reference neuron
  // has switched on three times after the first full round of switches.
  constexpr double kMaxHorizon = 2.0e5;
  const int n = net.pathway.n();
  const double chunk = 8.0 * n;
  Vec x = x0;
  double elapsed = 0.0;
  std::vector<ActiveRun> runs;
  double coarse_period = 0.0;
  for (;;) {
    const NeuralTrajectory piece = integrate(net, x, chunk, dt, elapsed);
    for (const ActiveRun& r : argmax_runs(piece)) {
      if (!runs.empty() && runs.back().neuron == r.neuron) {
        runs.back().duration += r.duration;
      } else {
        runs.push_back(r);
      }
    }
    x = piece.sample(piece.size() - 1);
    elapsed = piece.end_time();
    if (static_cast<int>(runs.size()) > n + 1) {
      int reference = n + 1;
      for (std::size_t k = static_cast<std::size_t>(n); k < runs.size(); ++k) {
        reference = std::min(reference, runs[k].neuron);
      }
      std::vector<double> onsets;
      for (std::size_t k = static_cast<std::size_t>(n); k + 1 < runs.size(); ++k) {
        if (runs[k].neuron == reference) onsets.push_back(runs[k].start);
      }
      if (onsets.size() >= 3) {
        coarse_period = (onsets.back() - onsets[onsets.size() - 3]) / 2.0;
        break;
      }
    }
    if (elapsed > kMaxHorizon) {
      throw Error(ErrorCode::kNoPeriod, "network did not settle on a switching limit cycle");
    }
  }
  const int periods = std::max(warmup_periods, 3);
  const NeuralTrajectory warm = integrate(net, x, periods * coarse_period, dt, elapsed);
  double period = coarse_period;
  try {
    period = *switching_report(warm).period_estimate;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoPeriod) throw;
  }
  return {warm.sample(warm.size() - 1), period, warm.end_time()};
}

Vec measure_durations(const PathwayMatrix& w, const CouplingVector& alpha, double epsilon,
                      double dt, std::uint64_t seed, int cycles) {
  const WlcNetwork net(w, alpha, epsilon);
  const LimitCycleStart lc = settle_on_limit_cycle(net, random_initial_state(w.n(), seed), dt);
  const NeuralTrajectory traj =
      integrate(net, lc.state, (cycles + 1.5) * lc.period, dt, lc.settle_time);
  return switching_report(traj).durations;
}

namespace {

struct DurationProbe {
  const PathwayMatrix& w;
  const CalibrationOptions& opts;
  int evaluations = 0;

  Vec operator()(const Vec& alpha) {
    ++evaluations;
    return measure_durations(w, CouplingVector(alpha), opts.epsilon, opts.dt, opts.seed);
  }
};

double rel_error(double measured, double target) { return std::abs(measured / target - 1.0); }

}  // namespace

CouplingVector calibrate_alpha(const PathwayMatrix& w, std::span<const double> targets,
                               const CalibrationOptions& opts) {
  const int n = w.n();
  if (static_cast<int>(targets.size()) != n) {
    throw Error(ErrorCode::kSize, "one target duration per neuron required");
  }
  for (double t : targets) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw Error(ErrorCode::kInvalidConfig, "target durations must be positive");
    }
  }
  if (!permutation_of(w).is_hamiltonian()) {
    throw Error(ErrorCode::kInvalidMatrix, "calibration needs a hamiltonian pathway matrix");
  }
  DurationProbe probe{w, opts};
  Vec alpha = Vec::Constant(n, 0.5);

  // Durations grow with alpha_j and blow up as alpha_j -> 1, so the search
  // runs on u = -log(1 - alpha) with a bracketed secant (Illinois) step.
  const auto to_u = [](double a) { return -std::log1p(-a); };
  const auto to_alpha = [](double u) { return -std::expm1(-u); };

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    Vec measured = probe(alpha);
    bool done = true;
    for (int j = 0; j < n; ++j) done &= rel_error(measured(j), targets[j]) < opts.rel_tol;
    if (done) return CouplingVector(alpha);

    for (int j = 0; j < n; ++j) {
      const double target = targets[static_cast<std::size_t>(j)];
      if (rel_error(measured(j), target) < opts.rel_tol) continue;
      const auto residual = [&](double u) {
        Vec a = alpha;
        a(j) = to_alpha(u);
        const Vec d = probe(a);
        return std::log(d(j) / target);
      };
      double lo = to_u(opts.alpha_lo), hi = to_u(opts.alpha_hi);
      double r_lo = 0.0, r_hi = 0.0;
      const double u_now = to_u(alpha(j));
      const double r_now = std::log(measured(j) / target);
      if (r_now < 0.0) {
        lo = u_now;
        r_lo = r_now;
        r_hi = residual(hi);
        if (r_hi < 0.0) {
          throw Error(ErrorCode::kCalibrationRange,
                      "target duration of neuron " + std::to_string(j + 1) + " is unreachable");
        }
      } else {
        hi = u_now;
        r_hi = r_now;
        r_lo = residual(lo);
        if (r_lo > 0.0) {
          throw Error(ErrorCode::kCalibrationRange,
                      "target duration of neuron " + std::to_string(j + 1) + " is unreachable");
        }
      }
      int side = 0;
      double u = u_now;
      for (int it = 0; it < opts.max_bisection_steps; ++it) {
        u = (lo * r_hi - hi * r_lo) / (r_hi - r_lo);
        const double r = residual(u);
        if (std::abs(r) < 0.5 * opts.rel_tol) break;
        if (r < 0.0) {
          lo = u;
          r_lo = r;
          if (side == -1) r_hi *= 0.5;
          side = -1;
        } else {
          hi = u;
          r_hi = r;
          if (side == 1) r_lo *= 0.5;
          side = 1;
        }
        if (hi - lo < 1e-12) break;
      }
      alpha(j) = to_alpha(u);
    }
  }
  const Vec measured = probe(alpha);
  for (int j = 0; j < n; ++j) {
    if (rel_error(measured(j), targets[static_cast<std::size_t>(j)]) >= opts.accept_tol) {
      throw Error(ErrorCode::kCalibrationFailure,
                  "durations not matched within tolerance after sweep limit");
    }
  }
  return CouplingVector(alpha);
}

}  // namespace wlc
