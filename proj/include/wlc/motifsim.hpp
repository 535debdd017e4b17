#pragma once

// Decode-and-execute: the active neuron selects a motor motif, the motif
// drives a unicycle robot.

#include <string>
#include <vector>

#include "wlc/dynamics.hpp"

namespace wlc {

inline constexpr double kDefaultSpeed = 10.0;       // cm/s
inline constexpr double kDefaultTurnRadius = 17.0;  // cm

struct Motif {
  std::string label;
  double speed = kDefaultSpeed;  // linear velocity
  double turn_rate = 0.0;        // rad/s, positive turns left
};

class MotifLibrary {
 public:
  explicit MotifLibrary(std::vector<Motif> motifs);

  int n() const noexcept { return static_cast<int>(motifs_.size()); }
  const Motif& operator[](int index) const { return motifs_.at(static_cast<std::size_t>(index - 1)); }
  const std::vector<Motif>& motifs() const noexcept { return motifs_; }

 private:
  std::vector<Motif> motifs_;
};

/// Six-motif library: M1, M2 straight; M3, M4 left turns; M5, M6 right turns.
/// Other sizes cycle straight/left/right.
MotifLibrary default_library(int n = 6, double speed = kDefaultSpeed,
                             double radius = kDefaultTurnRadius);

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // (-pi, pi]
};

double normalize_angle(double a);

struct PosePath {
  double dt = 0.0;  // seconds
  double t0 = 0.0;
  std::vector<Pose> poses;
  std::vector<int> motif;  // active motif per sample, 1-based

  std::size_t size() const noexcept { return poses.size(); }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
};

/// Motif index for a neural state (argmax, ties to the lower index).
int decode_motif(const Eigen::Ref<const Vec>& x);

/// Executes the decoded motif of each sample over the following step with
/// exact arcs. `seconds_per_unit` maps network time to robot time.
PosePath simulate_pose_path(const NeuralTrajectory& traj, const MotifLibrary& lib, Pose start = {},
                            double seconds_per_unit = 1.0);

/// Applies a rotation by `angle` and translation (dx, dy) to every pose.
PosePath rigid_transform(const PosePath& path, double angle, double dx, double dy);

/// Run-length encoding of the motif column: (motif, sample count).
std::vector<std::pair<int, std::size_t>> motif_runs(const PosePath& path);

}  // namespace wlc
