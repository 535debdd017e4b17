#include "wlc/metrics.hpp"

#include <cmath>
#include <limits>

#include "wlc/error.hpp"

namespace wlc {

namespace {

std::vector<double> gaussian_smooth(const std::vector<double>& v, double sigma) {
  const int half = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  for (int i = -half; i <= half; ++i) {
    kernel[static_cast<std::size_t>(i + half)] = std::exp(-0.5 * (i * i) / (sigma * sigma));
  }
  const int n = static_cast<int>(v.size());
  std::vector<double> out(v.size());
  // truncated kernel, renormalized near the ends
  for (int k = 0; k < n; ++k) {
    double acc = 0.0, wsum = 0.0;
    for (int i = -half; i <= half; ++i) {
      const int m = k + i;
      if (m < 0 || m >= n) continue;
      const double w = kernel[static_cast<std::size_t>(i + half)];
      acc += w * v[static_cast<std::size_t>(m)];
      wsum += w;
    }
    out[static_cast<std::size_t>(k)] = acc / wsum;
  }
  return out;
}

// first and second derivative at k, central inside, one-sided 2nd order at ends
void derivatives(const std::vector<double>& v, std::size_t k, double h, double& d1, double& d2) {
  const std::size_t n = v.size();
  if (k == 0) {
    d1 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d2 = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h);
  } else if (k == n - 1) {
    d1 = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    d2 = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / (h * h);
  } else {
    d1 = (v[k + 1] - v[k - 1]) / (2.0 * h);
    d2 = (v[k + 1] - 2.0 * v[k] + v[k - 1]) / (h * h);
  }
}

}  // namespace

CurvatureSeries curvature_series(const PosePath& path, double smoothing_sigma) {
  if (path.size() < 5) throw Error(ErrorCode::kDegeneratePath, "curvature needs at least 5 samples");
  if (!(path.dt > 0.0)) throw Error(ErrorCode::kDegeneratePath, "path dt must be positive");
  std::vector<double> xs, ys;
  xs.reserve(path.size());
  ys.reserve(path.size());
  for (const Pose& p : path.poses) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  if (smoothing_sigma > 0.0) {
    xs = gaussian_smooth(xs, smoothing_sigma);
    ys = gaussian_smooth(ys, smoothing_sigma);
  }
  CurvatureSeries out;
  out.t0 = path.t0;
  out.dt = path.dt;
  out.c.resize(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) {
    double x1, x2, y1, y2;
    derivatives(xs, k, path.dt, x1, x2);
    derivatives(ys, k, path.dt, y1, y2);
    const double speed = std::hypot(x1, y1);
    if (!(speed >= kSpeedFloor)) {
      throw Error(ErrorCode::kDegeneratePath, "path speed below floor at sample " + std::to_string(k));
    }
    out.c[k] = (x1 * y2 - y1 * x2) / (speed * speed * speed);
  }
  return out;
}

DistanceResult trajectory_distance(const CurvatureSeries& cT, const CurvatureSeries& cL, double period,
                                   double t, double tau_step) {
  if (!(period > 0.0)) throw Error(ErrorCode::kInvalidConfig, "period must be positive");
  if (!(cT.dt > 0.0) || std::abs(cT.dt - cL.dt) > 1e-12 * cT.dt || std::abs(cT.t0 - cL.t0) > 1e-9 * cT.dt) {
    throw Error(ErrorCode::kWindow, "curvature series must share the time grid");
  }
  const double h = cT.dt;
  const long window = std::lround(period / h);
  const long end = std::lround((t - cT.t0) / h);
  const long start = end - window;
  if (window < 1 || start < 0 || end >= static_cast<long>(cT.size())) {
    throw Error(ErrorCode::kWindow, "evaluation window leaves the teacher series");
  }
  long step = tau_step > 0.0 ? std::lround(tau_step / h) : 1;
  if (step < 1) step = 1;
  const long max_shift = static_cast<long>(std::floor(period / h + 1e-9));
  if (start - max_shift < 0 || end >= static_cast<long>(cL.size())) {
    throw Error(ErrorCode::kWindow, "lagged window leaves the learner series");
  }

  DistanceResult best{std::numeric_limits<double>::infinity(), 0.0};
  for (long shift = 0; shift <= max_shift; shift += step) {
    double acc = 0.0;
    for (long s = start; s <= end; ++s) {
      const double d = cT.c[static_cast<std::size_t>(s)] - cL.c[static_cast<std::size_t>(s - shift)];
      const double w = (s == start || s == end) ? 0.5 : 1.0;
      acc += w * d * d;
    }
    const double D = std::sqrt(acc / static_cast<double>(window));
    if (D < best.D) best = {D, static_cast<double>(shift) * h};
  }
  return best;
}

std::vector<DistancePoint> distance_trace(const CurvatureSeries& cT, const CurvatureSeries& cL,
                                          double period, double t_first, double t_last, double stride,
                                          double tau_step) {
  if (!(stride > 0.0)) throw Error(ErrorCode::kInvalidConfig, "stride must be positive");
  std::vector<DistancePoint> trace;
  const long count = static_cast<long>(std::floor((t_last - t_first) / stride + 1e-9));
  for (long i = 0; i <= count; ++i) {
    const double t = t_first + static_cast<double>(i) * stride;
    trace.push_back({t, trajectory_distance(cT, cL, period, t, tau_step)});
  }
  return trace;
}

double mean_distance(const std::vector<DistancePoint>& trace, double from, double to) {
  double sum = 0.0;
  int count = 0;
  for (const DistancePoint& p : trace) {
    if (p.t >= from && p.t <= to) {
      sum += p.result.D;
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::kWindow, "no trace points in the requested range");
  return sum / count;
}

}  // namespace wlc
