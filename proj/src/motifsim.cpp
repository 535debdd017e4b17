#include "wlc/motifsim.hpp"

#include <cmath>
#include <numbers>

#include "wlc/error.hpp"

namespace wlc {

MotifLibrary::MotifLibrary(std::vector<Motif> motifs) : motifs_(std::move(motifs)) {
  if (motifs_.size() < 3) throw Error(ErrorCode::kSize, "motif library needs at least 3 motifs");
  for (const Motif& m : motifs_) {
    if (!std::isfinite(m.speed) || !std::isfinite(m.turn_rate)) {
      throw Error(ErrorCode::kInvalidConfig, "motif velocities must be finite");
    }
  }
}

MotifLibrary default_library(int n, double speed, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidConfig, "turn radius must be positive");
  const double rate = speed / radius;
  std::vector<Motif> motifs;
  if (n == 6) {
    motifs = {{"straight", speed, 0.0}, {"straight", speed, 0.0}, {"left", speed, rate},
              {"left", speed, rate},    {"right", speed, -rate},  {"right", speed, -rate}};
  } else {
    static const char* kLabels[] = {"straight", "left", "right"};
    static const double kSigns[] = {0.0, 1.0, -1.0};
    for (int j = 0; j < n; ++j) motifs.push_back({kLabels[j % 3], speed, kSigns[j % 3] * rate});
  }
  return MotifLibrary(std::move(motifs));
}

double normalize_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);  // [-pi, pi]
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

int decode_motif(const Eigen::Ref<const Vec>& x) { return argmax_neuron(x); }

namespace {

Pose advance_pose(const Pose& p, const Motif& m, double h) {
  Pose out;
  if (m.turn_rate == 0.0) {
    out.x = p.x + m.speed * h * std::cos(p.heading);
    out.y = p.y + m.speed * h * std::sin(p.heading);
    out.heading = p.heading;
    return out;
  }
  const double r = m.speed / m.turn_rate;
  const double next = p.heading + m.turn_rate * h;
  out.x = p.x + r * (std::sin(next) - std::sin(p.heading));
  out.y = p.y - r * (std::cos(next) - std::cos(p.heading));
  out.heading = normalize_angle(next);
  return out;
}

}  // namespace

PosePath simulate_pose_path(const NeuralTrajectory& traj, const MotifLibrary& lib, Pose start,
                            double seconds_per_unit) {
  if (traj.n() != lib.n()) throw Error(ErrorCode::kSize, "trajectory and motif library sizes differ");
  if (!(seconds_per_unit > 0.0)) throw Error(ErrorCode::kInvalidConfig, "time scale must be positive");
  PosePath path;
  path.dt = traj.dt() * seconds_per_unit;
  path.t0 = traj.t0() * seconds_per_unit;
  const auto count = static_cast<std::size_t>(traj.size());
  path.poses.reserve(count);
  path.motif.reserve(count);
  start.heading = normalize_angle(start.heading);
  Pose pose = start;
  for (std::size_t k = 0; k < count; ++k) {
    const int motif = decode_motif(traj.sample(static_cast<Eigen::Index>(k)));
    path.poses.push_back(pose);
    path.motif.push_back(motif);
    pose = advance_pose(pose, lib[motif], path.dt);
  }
  return path;
}

PosePath rigid_transform(const PosePath& path, double angle, double dx, double dy) {
  PosePath out = path;
  const double c = std::cos(angle), s = std::sin(angle);
  for (Pose& p : out.poses) {
    const double x = c * p.x - s * p.y + dx;
    const double y = s * p.x + c * p.y + dy;
    p = {x, y, normalize_angle(p.heading + angle)};
  }
  return out;
}

std::vector<std::pair<int, std::size_t>> motif_runs(const PosePath& path) {
  std::vector<std::pair<int, std::size_t>> runs;
  for (int m : path.motif) {
    if (!runs.empty() && runs.back().first == m) {
      ++runs.back().second;
    } else {
      runs.emplace_back(m, 1);
    }
  }
  return runs;
}

}  // namespace wlc
