#pragma once

// Plain CSV emission and parsing for every artifact the harness writes.
// Doubles are printed with 17 significant digits so files round-trip.

#include <iosfwd>
#include <string>
#include <vector>

#include "wlc/dynamics.hpp"
#include "wlc/learning.hpp"
#include "wlc/metrics.hpp"
#include "wlc/motifsim.hpp"

namespace wlc::csv {

std::string format_double(double v);

/// "t,<prefix>1,...,<prefix>n". `stride` > 1 keeps every stride-th sample.
void write_series(std::ostream& os, const SampledSeries& s, const std::string& prefix = "x",
                  int stride = 1);
/// Reads any "t,..." series; the time column must be uniformly spaced.
SampledSeries read_series(std::istream& is);

void write_diagnostics(std::ostream& os, const std::vector<IterationDiagnostics>& diags);

void write_pose_path(std::ostream& os, const PosePath& path, int stride = 1);
PosePath read_pose_path(std::istream& is);

void write_distance(std::ostream& os, const std::vector<DistancePoint>& trace);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace wlc::csv
