#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "wlc/error.hpp"
#include "wlc/experiment.hpp"
#include "wlc/graph.hpp"

using namespace wlc;

namespace {

// walks succ from 1 and records the visit order
std::vector<int> walk(const CyclePermutation& p) {
  std::vector<int> out{1};
  for (int v = p.succ(1); v != 1; v = p.succ(v)) out.push_back(v);
  return out;
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

TEST(Graph, SequenceBuildsSingleCycle) {
  const std::vector<int> seq{1, 3, 2};
  const auto p = cycle_from_sequence(seq);
  EXPECT_EQ(p.succ(1), 3);
  EXPECT_EQ(p.succ(3), 2);
  EXPECT_EQ(p.succ(2), 1);
  EXPECT_TRUE(p.is_hamiltonian());
  EXPECT_EQ(walk(p), seq);
  EXPECT_EQ(cycle_order(p), seq);
}

TEST(Graph, SequenceRotationGivesSameCycle) {
  const std::vector<int> a{1, 3, 6, 4, 2, 5}, b{4, 2, 5, 1, 3, 6};
  EXPECT_EQ(cycle_from_sequence(a), cycle_from_sequence(b));
}

TEST(Graph, RejectsBadSequences) {
  EXPECT_EQ(code_of([] { cycle_from_sequence(std::vector<int>{1, 2}); }), ErrorCode::kSize);
  EXPECT_EQ(code_of([] { cycle_from_sequence(std::vector<int>{1, 2, 2}); }), ErrorCode::kInvalidSequence);
  EXPECT_EQ(code_of([] { cycle_from_sequence(std::vector<int>{1, 2, 4}); }), ErrorCode::kInvalidSequence);
  EXPECT_EQ(code_of([] { cycle_from_sequence(std::vector<int>{0, 1, 2}); }), ErrorCode::kInvalidSequence);
}

TEST(Graph, PathwayMatrixEntries) {
  const auto p = cycle_from_sequence(std::vector<int>{1, 2, 3, 4});
  const auto w = pathway_matrix(p);
  // w(i,j) = 1 iff i follows j
  for (int i = 1; i <= 4; ++i) {
    for (int j = 1; j <= 4; ++j) EXPECT_EQ(w(i, j), p.succ(j) == i ? 1 : 0) << i << "," << j;
  }
  EXPECT_EQ(permutation_of(w), p);
}

TEST(Graph, PathwayMatrixValidation) {
  Eigen::MatrixXi bad = Eigen::MatrixXi::Identity(3, 3);
  EXPECT_EQ(code_of([&] { PathwayMatrix m(bad); }), ErrorCode::kInvalidMatrix);
  Eigen::MatrixXi two = Eigen::MatrixXi::Zero(3, 3);
  two(1, 0) = 2;
  two(2, 1) = 1;
  two(0, 2) = 1;
  EXPECT_EQ(code_of([&] { PathwayMatrix m(two); }), ErrorCode::kInvalidMatrix);
  Eigen::MatrixXi rows = Eigen::MatrixXi::Zero(3, 3);
  rows(1, 0) = 1;
  rows(1, 2) = 1;
  rows(0, 1) = 1;
  EXPECT_EQ(code_of([&] { PathwayMatrix m(rows); }), ErrorCode::kInvalidMatrix);
}

TEST(Graph, SuccessorsRoundTrip) {
  const std::vector<int> succ{2, 1, 4, 3};  // two 2-cycles: a transient learner state
  const auto p = CyclePermutation::from_successors(succ);
  EXPECT_FALSE(p.is_hamiltonian());
  EXPECT_EQ(p.successors(), succ);
  EXPECT_EQ(p.pred(1), 2);
  EXPECT_EQ(CyclePermutation::parse(p.to_string()), p);
  const auto cycles = cycle_decomposition(p);
  ASSERT_EQ(cycles.size(), 2u);
  EXPECT_EQ(cycles[0], (std::vector<int>{1, 2}));
  EXPECT_EQ(cycles[1], (std::vector<int>{3, 4}));
  EXPECT_EQ(code_of([] { CyclePermutation::from_successors(std::vector<int>{1, 3, 2}); }),
            ErrorCode::kInvalidMatrix);
}

TEST(Graph, CountBehaviorsMatchesFactorial) {
  boost::multiprecision::cpp_int f = 1;
  for (int n = 3; n <= 30; ++n) {
    f *= (n - 1);
    EXPECT_EQ(count_behaviors(n), f) << n;
  }
  EXPECT_EQ(count_behaviors(6).str(), "120");
  EXPECT_EQ(count_behaviors(10).str(), "362880");
  EXPECT_EQ(count_behaviors(13).str(), "479001600");
}

TEST(Graph, EnumerationMatchesCountAndIsDistinct) {
  for (int n = 3; n <= 6; ++n) {
    const auto all = all_hamiltonian_cycles(n);
    EXPECT_EQ(boost::multiprecision::cpp_int(all.size()), count_behaviors(n));
    std::set<std::string> seen;
    for (const auto& c : all) {
      EXPECT_TRUE(c.is_hamiltonian());
      seen.insert(c.to_string());
    }
    EXPECT_EQ(seen.size(), all.size());
  }
}

TEST(Graph, RandomCycleDeterministicAndHamiltonian) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto a = random_hamiltonian_cycle(9, s);
    EXPECT_TRUE(a.is_hamiltonian());
    EXPECT_EQ(a, random_hamiltonian_cycle(9, s));
  }
}

TEST(Graph, RandomCycleCoversAllSmallCycles) {
  // n = 4 has 6 cycles; 600 draws should hit each roughly 100 times
  std::map<std::string, int> hits;
  for (std::uint64_t s = 0; s < 600; ++s) ++hits[random_hamiltonian_cycle(4, s).to_string()];
  EXPECT_EQ(hits.size(), 6u);
  for (const auto& [k, v] : hits) EXPECT_GT(v, 50) << k;
}
