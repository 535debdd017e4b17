#include <gtest/gtest.h>

#include <random>

#include "wlc/dynamics.hpp"
#include "wlc/error.hpp"

using namespace wlc;

namespace {

// rho built entry by entry, no factored form
Eigen::MatrixXd dense_rho(const CyclePermutation& p, const Vec& c) {
  const int n = p.n();
  Eigen::MatrixXd rho = Eigen::MatrixXd::Constant(n, n, 2.0);
  for (int j = 1; j <= n; ++j) {
    rho(j - 1, j - 1) = 1.0;
    rho(p.succ(j) - 1, j - 1) = c(j - 1);
  }
  return rho;
}

Vec oracle_rhs(const Vec& x, const Eigen::MatrixXd& rho, double eps) {
  return (x.array() * (1.0 - (rho * x).array())).matrix() + Vec::Constant(x.size(), eps);
}

Vec oracle_rk4(const Vec& x, const Eigen::MatrixXd& rho, double eps, double h) {
  const Vec k1 = oracle_rhs(x, rho, eps);
  const Vec k2 = oracle_rhs(x + 0.5 * h * k1, rho, eps);
  const Vec k3 = oracle_rhs(x + 0.5 * h * k2, rho, eps);
  const Vec k4 = oracle_rhs(x + h * k3, rho, eps);
  return x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
}

const std::vector<int> kFig2Seq{1, 2, 3, 4, 5, 6};
const Vec kFig2Alpha = (Vec(6) << 0.6, 0.5, 0.7, 0.1, 0.8, 0.3).finished();

}  // namespace

TEST(Dynamics, CouplingMatrixMatchesDense) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n : {3, 5, 8, 13}) {
    const auto p = random_hamiltonian_cycle(n, rng());
    Vec c(n), x(n);
    for (int i = 0; i < n; ++i) {
      c(i) = u(rng);
      x(i) = u(rng);
    }
    const CouplingMatrix rho(p, c);
    const Eigen::MatrixXd d = dense_rho(p, c);
    EXPECT_EQ(rho.dense(), d);
    EXPECT_LT((rho.multiply(x) - d * x).cwiseAbs().maxCoeff(), 1e-14);
    const WlcNetwork net(pathway_matrix(p), CouplingVector(c), 1e-4);
    EXPECT_LT((wlc_rhs(x, net.rho, 1e-4) - oracle_rhs(x, d, 1e-4)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Dynamics, Rk4StepMatchesOracle) {
  const auto p = cycle_from_sequence(kFig2Seq);
  const Eigen::MatrixXd d = dense_rho(p, kFig2Alpha);
  const WlcNetwork net(pathway_matrix(p), CouplingVector(kFig2Alpha), 1e-4);
  const Vec x0 = random_initial_state(6, 9);
  const auto traj = integrate(net, x0, 1.0, 0.01);
  Vec x = x0;
  for (int k = 0; k < 100; ++k) x = oracle_rk4(x, d, 1e-4, 0.01);
  ASSERT_EQ(traj.size(), 101);
  EXPECT_LT((traj.sample(100) - x).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Dynamics, IntegrationConvergesAtFourthOrder) {
  const WlcNetwork net(pathway_matrix(cycle_from_sequence(kFig2Seq)), CouplingVector(kFig2Alpha), 1e-4);
  const Vec x0 = random_initial_state(6, 2);
  const Vec ref = integrate(net, x0, 20.0, 0.00125).sample(16000);
  const double e1 = (integrate(net, x0, 20.0, 0.02).sample(1000) - ref).norm();
  const double e2 = (integrate(net, x0, 20.0, 0.01).sample(2000) - ref).norm();
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e1 / e2, 20.0);
}

TEST(Dynamics, StatesStayInsideBox) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + trial % 6;
    Vec a(n);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int i = 0; i < n; ++i) a(i) = u(rng);
    const WlcNetwork net(pathway_matrix(random_hamiltonian_cycle(n, rng())), CouplingVector(a));
    const auto traj = integrate(net, random_initial_state(n, rng()), 300.0);
    EXPECT_GT(traj.samples().minCoeff(), 0.0);
    EXPECT_LE(traj.samples().maxCoeff(), kStateCeiling);
  }
}

TEST(Dynamics, DivergenceIsReported) {
  // an excitatory coupling drives the state out of the box
  const WlcNetwork net(pathway_matrix(cycle_from_sequence(std::vector<int>{1, 2, 3})),
                       CouplingVector{0.5, 0.5, 0.5}, 1e-4);
  const Vec x0 = Vec::Constant(3, 5.0);
  EXPECT_THROW(integrate(net, x0, 10.0), DivergenceError);
}

TEST(Dynamics, RejectsBadCouplings) {
  EXPECT_THROW(CouplingVector({0.5, -0.1, 0.3}), Error);
  EXPECT_THROW(CouplingVector({0.5, std::nan(""), 0.3}), Error);
  EXPECT_FALSE(CouplingVector({0.5, 1.0, 0.3}).wlc_admissible());
  EXPECT_TRUE(CouplingVector({0.5, 0.9, 0.3}).wlc_admissible());
}

TEST(Dynamics, Fig2SequenceAndDurationOrdering) {
  const WlcNetwork net(pathway_matrix(cycle_from_sequence(kFig2Seq)), CouplingVector(kFig2Alpha));
  const auto start = settle_on_limit_cycle(net, random_initial_state(6, 1));
  const auto traj = integrate(net, start.state, 8 * start.period, kDefaultDt, start.settle_time);
  const auto rep = switching_report(traj);
  const auto order = rep.neuron_order();
  ASSERT_GE(order.size(), 36u);
  for (std::size_t k = 0; k + 1 < order.size(); ++k) EXPECT_EQ(order[k + 1], order[k] % 6 + 1);
  // T4 < T6 < T2 < T1 < T3 < T5
  const Vec& d = rep.durations;
  EXPECT_LT(d(3), d(5));
  EXPECT_LT(d(5), d(1));
  EXPECT_LT(d(1), d(0));
  EXPECT_LT(d(0), d(2));
  EXPECT_LT(d(2), d(4));
  ASSERT_TRUE(rep.period_estimate.has_value());
  EXPECT_NEAR(*rep.period_estimate, start.period, 1e-3 * start.period);
  EXPECT_NEAR(d.sum(), start.period, 0.01 * start.period);
  EXPECT_LT(periodicity_defect(traj, start.period, 0.0), 1e-3);
}

TEST(Dynamics, DurationIncreasesWithCoupling) {
  const auto w = pathway_matrix(cycle_from_sequence(std::vector<int>{1, 3, 6, 4, 2, 5}));
  double prev = 0.0;
  for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    Vec v = Vec::Constant(6, 0.5);
    v(0) = a;
    const double d = measure_durations(w, CouplingVector(v), kDefaultEpsilon, kDefaultDt, 1)(0);
    EXPECT_GT(d, prev) << a;
    prev = d;
  }
}

TEST(Dynamics, CalibrationRecoversKnownCouplings) {
  const auto w = pathway_matrix(cycle_from_sequence(std::vector<int>{1, 3, 2, 4}));
  const CouplingVector truth{0.35, 0.6, 0.45, 0.7};
  const Vec d = measure_durations(w, truth, kDefaultEpsilon, kDefaultDt, 1);
  const std::vector<double> targets(d.data(), d.data() + d.size());
  const CouplingVector got = calibrate_alpha(w, targets);
  const Vec measured = measure_durations(w, got, kDefaultEpsilon, kDefaultDt, 1);
  for (int j = 0; j < 4; ++j) {
    EXPECT_NEAR(measured(j) / d(j), 1.0, 0.01) << j;
    EXPECT_NEAR(got.values()(j), truth.values()(j), 0.02) << j;
  }
}

TEST(Dynamics, CalibrationRejectsBadTargets) {
  const auto w = pathway_matrix(cycle_from_sequence(std::vector<int>{1, 2, 3}));
  EXPECT_THROW(calibrate_alpha(w, std::vector<double>{1.0, -2.0, 3.0}), Error);
  EXPECT_THROW(calibrate_alpha(w, std::vector<double>{1.0, 2.0}), Error);
}

TEST(Dynamics, SampledSeriesHelpers) {
  Eigen::MatrixXd m(1, 5);
  m << 0, 1, 2, 3, 4;
  const SampledSeries s(10.0, 0.5, m);
  EXPECT_DOUBLE_EQ(s.end_time(), 12.0);
  EXPECT_DOUBLE_EQ(s.at(10.75)(0), 1.5);
  const auto t = s.tail(11.0);
  EXPECT_EQ(t.size(), 3);
  EXPECT_DOUBLE_EQ(t.t0(), 11.0);
  EXPECT_EQ(s.slice(1, 2).samples()(0, 1), 2.0);
}

TEST(Dynamics, ArgmaxTiesGoLow) {
  const Vec x = (Vec(4) << 0.2, 0.7, 0.7, 0.1).finished();
  EXPECT_EQ(argmax_neuron(x), 2);
}
