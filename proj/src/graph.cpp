#include "wlc/graph.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "wlc/error.hpp"

namespace wlc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidSequence: return "invalid-sequence";
    case ErrorCode::kSize: return "size";
    case ErrorCode::kInvalidMatrix: return "invalid-matrix";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kNoPeriod: return "no-period";
    case ErrorCode::kCalibrationRange: return "calibration-range";
    case ErrorCode::kCalibrationFailure: return "calibration-failure";
    case ErrorCode::kDegenerateRegression: return "degenerate-regression";
    case ErrorCode::kInternalInvariant: return "internal-invariant";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kDegeneratePath: return "degenerate-path";
    case ErrorCode::kWindow: return "window";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kUnknownPreset: return "unknown-preset";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

namespace {

void require_size(int n) {
  if (n < 3) {
    throw Error(ErrorCode::kSize, "at least 3 vertices required, got " + std::to_string(n));
  }
}

}  // namespace

CyclePermutation CyclePermutation::from_successors(std::span<const int> successors) {
  const int n = static_cast<int>(successors.size());
  require_size(n);
  std::vector<int> zero(successors.size());
  std::vector<bool> hit(successors.size(), false);
  for (int j = 0; j < n; ++j) {
    const int s = successors[static_cast<std::size_t>(j)];
    if (s < 1 || s > n) {
      throw Error(ErrorCode::kInvalidMatrix, "successor label out of range: " + std::to_string(s));
    }
    if (s == j + 1) {
      throw Error(ErrorCode::kInvalidMatrix, "fixed point at vertex " + std::to_string(j + 1));
    }
    if (hit[static_cast<std::size_t>(s - 1)]) {
      throw Error(ErrorCode::kInvalidMatrix, "successor " + std::to_string(s) + " used twice");
    }
    hit[static_cast<std::size_t>(s - 1)] = true;
    zero[static_cast<std::size_t>(j)] = s - 1;
  }
  return CyclePermutation(std::move(zero));
}

int CyclePermutation::pred(int i) const {
  const auto it = std::find(succ_.begin(), succ_.end(), i - 1);
  if (it == succ_.end()) throw Error(ErrorCode::kSize, "label out of range");
  return static_cast<int>(it - succ_.begin()) + 1;
}

std::vector<int> CyclePermutation::successors() const {
  std::vector<int> out(succ_.size());
  std::transform(succ_.begin(), succ_.end(), out.begin(), [](int s) { return s + 1; });
  return out;
}

bool CyclePermutation::is_hamiltonian() const {
  return cycle_decomposition(*this).size() == 1;
}

std::string CyclePermutation::to_string() const {
  std::ostringstream os;
  for (std::size_t j = 0; j < succ_.size(); ++j) {
    if (j) os << ' ';
    os << succ_[j] + 1;
  }
  return os.str();
}

CyclePermutation CyclePermutation::parse(const std::string& line) {
  std::istringstream is(line);
  std::vector<int> values;
  int v = 0;
  while (is >> v) values.push_back(v);
  if (!is.eof()) throw Error(ErrorCode::kInvalidMatrix, "malformed permutation line: " + line);
  return from_successors(values);
}

PathwayMatrix::PathwayMatrix(Eigen::MatrixXi w) : w_(std::move(w)) {
  if (w_.rows() != w_.cols()) throw Error(ErrorCode::kSize, "pathway matrix must be square");
  require_size(static_cast<int>(w_.rows()));
  if ((w_.array() != 0 && w_.array() != 1).any()) {
    throw Error(ErrorCode::kInvalidMatrix, "pathway matrix entries must be 0 or 1");
  }
  if ((w_.rowwise().sum().array() != 1).any() || (w_.colwise().sum().array() != 1).any()) {
    throw Error(ErrorCode::kInvalidMatrix, "pathway matrix needs exactly one 1 per row and column");
  }
  if (w_.diagonal().any()) {
    throw Error(ErrorCode::kInvalidMatrix, "pathway matrix has a fixed point");
  }
}

CyclePermutation cycle_from_sequence(std::span<const int> seq) {
  const int n = static_cast<int>(seq.size());
  require_size(n);
  std::vector<bool> seen(seq.size(), false);
  for (int v : seq) {
    if (v < 1 || v > n || seen[static_cast<std::size_t>(v - 1)]) {
      throw Error(ErrorCode::kInvalidSequence, "sequence is not a permutation of 1..n");
    }
    seen[static_cast<std::size_t>(v - 1)] = true;
  }
  std::vector<int> succ(seq.size());
  for (int k = 0; k < n; ++k) {
    succ[static_cast<std::size_t>(seq[static_cast<std::size_t>(k)] - 1)] =
        seq[static_cast<std::size_t>((k + 1) % n)];
  }
  return CyclePermutation::from_successors(succ);
}

PathwayMatrix pathway_matrix(const CyclePermutation& perm) {
  const int n = perm.n();
  Eigen::MatrixXi w = Eigen::MatrixXi::Zero(n, n);
  for (int j = 1; j <= n; ++j) w(perm.succ(j) - 1, j - 1) = 1;
  return PathwayMatrix(std::move(w));
}

CyclePermutation permutation_of(const PathwayMatrix& w) {
  const int n = w.n();
  std::vector<int> succ(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    Eigen::Index i = 0;
    w.matrix().col(j).maxCoeff(&i);
    succ[static_cast<std::size_t>(j)] = static_cast<int>(i) + 1;
  }
  return CyclePermutation::from_successors(succ);
}

std::vector<std::vector<int>> cycle_decomposition(const CyclePermutation& perm) {
  const int n = perm.n();
  std::vector<bool> visited(static_cast<std::size_t>(n), false);
  std::vector<std::vector<int>> cycles;
  for (int start = 1; start <= n; ++start) {
    if (visited[static_cast<std::size_t>(start - 1)]) continue;
    std::vector<int> cycle;
    for (int v = start; !visited[static_cast<std::size_t>(v - 1)]; v = perm.succ(v)) {
      visited[static_cast<std::size_t>(v - 1)] = true;
      cycle.push_back(v);
    }
    cycles.push_back(std::move(cycle));
  }
  return cycles;
}

CyclePermutation random_hamiltonian_cycle(int n, std::uint64_t seed) {
  require_size(n);
  // Fixing vertex 1 first and shuffling the rest enumerates each cycle once.
  std::vector<int> seq(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) seq[static_cast<std::size_t>(k)] = k + 1;
  std::mt19937_64 rng(seed);
  for (std::size_t k = seq.size() - 1; k > 1; --k) {
    std::uniform_int_distribution<std::size_t> pick(1, k);
    std::swap(seq[k], seq[pick(rng)]);
  }
  return cycle_from_sequence(seq);
}

boost::multiprecision::cpp_int count_behaviors(int n) {
  require_size(n);
  boost::multiprecision::cpp_int out = 1;
  for (int k = 2; k < n; ++k) out *= k;
  return out;
}

std::vector<int> cycle_order(const CyclePermutation& perm) {
  std::vector<int> order;
  int v = 1;
  do {
    order.push_back(v);
    v = perm.succ(v);
  } while (v != 1 && static_cast<int>(order.size()) <= perm.n());
  return order;
}

}  // namespace wlc
