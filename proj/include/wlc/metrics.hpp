#pragma once

// Curvature of robot paths and the lag-minimized curvature distance between a
// teacher and a learner path.

#include <vector>

#include "wlc/motifsim.hpp"

namespace wlc {

struct CurvatureSeries {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> c;  // signed, 1/length

  std::size_t size() const noexcept { return c.size(); }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
};

inline constexpr double kSpeedFloor = 1e-9;

/// Signed curvature (x'y'' - y'x'') / |v|^3 from central differences (second
/// order one-sided at the ends). `smoothing_sigma` > 0 first convolves the
/// coordinates with a Gaussian of that width in samples. Needs >= 5 samples;
/// throws kDegeneratePath when the speed drops below kSpeedFloor.
CurvatureSeries curvature_series(const PosePath& path, double smoothing_sigma = 0.0);

struct DistanceResult {
  double D = 0.0;
  double tau_star = 0.0;
};

/// min over tau in {0, h, 2h, ...} ∩ [0, T] of the RMS of cT(s) - cL(s - tau)
/// for s in [t - T, t] (trapezoid). `tau_step` <= 0 means the series dt.
/// Ties go to the smaller tau. Throws kWindow when a window leaves the data.
DistanceResult trajectory_distance(const CurvatureSeries& cT, const CurvatureSeries& cL,
                                   double period, double t, double tau_step = 0.0);

struct DistancePoint {
  double t = 0.0;
  DistanceResult result;
};

/// D evaluated every `stride` seconds on [t_first, t_last].
std::vector<DistancePoint> distance_trace(const CurvatureSeries& cT, const CurvatureSeries& cL,
                                          double period, double t_first, double t_last,
                                          double stride, double tau_step = 0.0);

/// Mean D over points with t in [from, to].
double mean_distance(const std::vector<DistancePoint>& trace, double from, double to);

}  // namespace wlc
