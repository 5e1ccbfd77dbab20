#include "mfsmd/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mfsmd {

namespace {

double axis(double lo, double hi, Eigen::Index i, Eigen::Index count) {
  return count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

}  // namespace

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string snapshots_csv(const FlowTrajectory& traj) {
  std::string out = "t,particle";
  const Eigen::Index d = traj.snapshots.empty() ? 0 : traj.snapshots.front().ensemble.dim();
  for (Eigen::Index i = 0; i < d; ++i) out += ",theta_" + std::to_string(i + 1);
  out += '\n';
  for (const auto& s : traj.snapshots) {
    const std::string t = format_real(s.t);
    for (Eigen::Index j = 0; j < s.ensemble.size(); ++j) {
      out += t + ',' + std::to_string(j);
      for (Eigen::Index i = 0; i < d; ++i) out += ',' + format_real(s.ensemble.thetas()(i, j));
      out += '\n';
    }
  }
  return out;
}

std::string observables_csv(const FlowTrajectory& traj) {
  std::string out = "t,f_id,value\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const std::string t = format_real(traj.times[k]);
    for (std::size_t f = 0; f < traj.observable_ids.size(); ++f)
      out += t + ',' + traj.observable_ids[f] + ',' +
             format_real(traj.observables[k][static_cast<Eigen::Index>(f)]) + '\n';
  }
  return out;
}

std::string series_csv(const std::string& column, const std::vector<double>& t,
                       const std::vector<double>& values) {
  std::string out = "t," + column + '\n';
  for (std::size_t k = 0; k < t.size(); ++k)
    out += format_real(t[k]) + ',' + format_real(values[k]) + '\n';
  return out;
}

std::string residual_csv(const std::vector<double>& t, const std::vector<std::string>& ids,
                         const Mat& residual) {
  std::string out = "t,f_id,residual\n";
  for (Eigen::Index k = 0; k < residual.rows(); ++k)
    for (Eigen::Index f = 0; f < residual.cols(); ++f)
      out += format_real(t[static_cast<std::size_t>(k)]) + ',' + ids[static_cast<std::size_t>(f)] +
             ',' + format_real(residual(k, f)) + '\n';
  return out;
}

std::string grid_csv(const Mat& grid, const GridSpec& spec) {
  std::string out = "x1,x2,output\n";
  for (Eigen::Index j = 0; j < grid.rows(); ++j) {
    const std::string x2 = format_real(axis(spec.x2_min, spec.x2_max, j, grid.rows()));
    for (Eigen::Index i = 0; i < grid.cols(); ++i)
      out += format_real(axis(spec.x1_min, spec.x1_max, i, grid.cols())) + ',' + x2 + ',' +
             format_real(grid(j, i)) + '\n';
  }
  return out;
}

}  // namespace mfsmd
