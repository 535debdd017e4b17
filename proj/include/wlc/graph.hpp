#pragma once

// Motif-succession graphs: permutations of {1..n} and their 0/1 pathway
// matrices. All public indices are 1-based vertex labels.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <boost/multiprecision/cpp_int.hpp>

namespace wlc {

/// Successor map j -> succ(j) on {1..n}. Always a bijection without fixed
/// points; may consist of several disjoint cycles (transient learner states).
class CyclePermutation {
 public:
  /// `successors[j-1]` is succ(j). Throws kInvalidMatrix on a non-bijection or
  /// a fixed point, kSize on n < 3.
  static CyclePermutation from_successors(std::span<const int> successors);

  int n() const noexcept { return static_cast<int>(succ_.size()); }
  int succ(int j) const { return succ_.at(static_cast<std::size_t>(j - 1)) + 1; }
  /// Inverse map: the unique vertex whose successor is i.
  int pred(int i) const;
  std::vector<int> successors() const;  // 1-based
  bool is_hamiltonian() const;

  /// "3 1 2": position j holds succ(j).
  std::string to_string() const;
  static CyclePermutation parse(const std::string& line);

  friend bool operator==(const CyclePermutation&, const CyclePermutation&) = default;

 private:
  explicit CyclePermutation(std::vector<int> zero_based) : succ_(std::move(zero_based)) {}
  std::vector<int> succ_;
};

/// w(i,j) = 1 iff motif i follows motif j.
class PathwayMatrix {
 public:
  /// Validates one 1 per row and column, 0/1 entries, zero diagonal.
  explicit PathwayMatrix(Eigen::MatrixXi w);

  int n() const noexcept { return static_cast<int>(w_.rows()); }
  const Eigen::MatrixXi& matrix() const noexcept { return w_; }
  int operator()(int i, int j) const { return w_(i - 1, j - 1); }
  Eigen::MatrixXd as_double() const { return w_.cast<double>(); }

  friend bool operator==(const PathwayMatrix& a, const PathwayMatrix& b) {
    return a.w_ == b.w_;
  }

 private:
  Eigen::MatrixXi w_;
};

/// Single n-cycle visiting `seq` in order. Requires a permutation of 1..n,
/// n >= 3.
CyclePermutation cycle_from_sequence(std::span<const int> seq);

PathwayMatrix pathway_matrix(const CyclePermutation& perm);
CyclePermutation permutation_of(const PathwayMatrix& w);

/// Disjoint cycles, each starting at its smallest label, ordered by that label.
std::vector<std::vector<int>> cycle_decomposition(const CyclePermutation& perm);

/// Uniform over the (n-1)! hamiltonian cycles; deterministic in `seed`.
CyclePermutation random_hamiltonian_cycle(int n, std::uint64_t seed);

/// Number of distinct hamiltonian cycles on n labelled vertices, (n-1)!.
boost::multiprecision::cpp_int count_behaviors(int n);

/// Vertex order of a hamiltonian cycle starting at 1.
std::vector<int> cycle_order(const CyclePermutation& perm);

}  // namespace wlc
