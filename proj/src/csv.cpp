#include "wlc/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wlc/error.hpp"

namespace wlc::csv {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() && s.find_first_not_of(" \r", used) != std::string::npos) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kIo, "bad number '" + s + "' on line " + std::to_string(line_no));
  }
}

void check_uniform(const std::vector<double>& t) {
  if (t.size() < 2) return;
  const double dt = t[1] - t[0];
  for (std::size_t k = 1; k < t.size(); ++k) {
    const double expected = t[0] + static_cast<double>(k) * dt;
    if (std::abs(t[k] - expected) > 1e-6 * std::max(1.0, std::abs(dt))) {
      throw Error(ErrorCode::kIo, "time column is not uniformly spaced");
    }
  }
}

double grid_step(const std::vector<double>& t) {
  if (t.size() < 2) return 1.0;
  return (t.back() - t.front()) / static_cast<double>(t.size() - 1);
}

}  // namespace

void write_series(std::ostream& os, const SampledSeries& s, const std::string& prefix, int stride) {
  if (stride < 1) throw Error(ErrorCode::kInvalidConfig, "stride must be >= 1");
  os << 't';
  for (int i = 1; i <= s.n(); ++i) os << ',' << prefix << i;
  os << '\n';
  for (Eigen::Index k = 0; k < s.size(); k += stride) {
    os << format_double(s.time(k));
    for (int i = 0; i < s.n(); ++i) os << ',' << format_double(s.samples()(i, k));
    os << '\n';
  }
}

SampledSeries read_series(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::kIo, "empty series file");
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "t") throw Error(ErrorCode::kIo, "series header must start with t");
  const std::size_t n = header.size() - 1;
  std::vector<double> t;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != n + 1) throw Error(ErrorCode::kIo, "wrong column count on line " + std::to_string(line_no));
    t.push_back(parse_double(cells[0], line_no));
    for (std::size_t i = 1; i <= n; ++i) values.push_back(parse_double(cells[i], line_no));
  }
  if (t.empty()) throw Error(ErrorCode::kIo, "series file has no rows");
  check_uniform(t);
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t.size()));
  for (std::size_t k = 0; k < t.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = values[k * n + i];
  }
  return SampledSeries(t.front(), grid_step(t), std::move(samples));
}

void write_diagnostics(std::ostream& os, const std::vector<IterationDiagnostics>& diags) {
  os << "k,j,sigma_j,e_j,matched,delta1,delta2\n";
  for (const auto& it : diags) {
    for (const auto& v : it.vertices) {
      os << v.k << ',' << v.j << ',' << v.sigma_j << ',' << format_double(v.error) << ','
         << (v.matched ? 1 : 0) << ',' << format_double(v.delta1) << ',' << format_double(v.delta2) << '\n';
    }
  }
}

void write_pose_path(std::ostream& os, const PosePath& path, int stride) {
  if (stride < 1) throw Error(ErrorCode::kInvalidConfig, "stride must be >= 1");
  os << "t,x,y,heading,motif\n";
  for (std::size_t k = 0; k < path.size(); k += static_cast<std::size_t>(stride)) {
    const Pose& p = path.poses[k];
    os << format_double(path.time(k)) << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
       << format_double(p.heading) << ',' << path.motif[k] << '\n';
  }
}

PosePath read_pose_path(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::kIo, "empty pose file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,x,y,heading,motif") throw Error(ErrorCode::kIo, "unexpected pose header: " + line);
  PosePath path;
  std::vector<double> t;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != 5) throw Error(ErrorCode::kIo, "wrong column count on line " + std::to_string(line_no));
    t.push_back(parse_double(cells[0], line_no));
    path.poses.push_back({parse_double(cells[1], line_no), parse_double(cells[2], line_no),
                          parse_double(cells[3], line_no)});
    const double m = parse_double(cells[4], line_no);
    if (m < 1 || m != std::floor(m)) throw Error(ErrorCode::kIo, "bad motif index on line " + std::to_string(line_no));
    path.motif.push_back(static_cast<int>(m));
  }
  if (t.empty()) throw Error(ErrorCode::kIo, "pose file has no rows");
  check_uniform(t);
  path.t0 = t.front();
  path.dt = grid_step(t);
  return path;
}

void write_distance(std::ostream& os, const std::vector<DistancePoint>& trace) {
  os << "t,D,tau_star\n";
  for (const auto& p : trace) {
    os << format_double(p.t) << ',' << format_double(p.result.D) << ',' << format_double(p.result.tau_star) << '\n';
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace wlc::csv
