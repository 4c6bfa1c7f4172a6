#include "mucs/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "mucs/error.hpp"

namespace mucs::csv {

std::string number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string header_block(const Header& header) {
  std::string out;
  for (const auto& [key, value] : header) out += "# " + key + " = " + value + "\n";
  return out;
}

std::string amp_report(const AmpReport& report, const Header& header) {
  std::ostringstream out;
  out << header_block(header) << "t,mse,v_mean,delta_a\n";
  const bool has_mse = !report.mse_per_iter.empty();
  out << 0 << ',' << (has_mse ? number(report.initial_mse) : "nan") << ",nan,nan\n";
  for (std::size_t k = 0; k < report.v_mean_per_iter.size(); ++k) {
    out << k + 1 << ',' << (has_mse ? number(report.mse_per_iter[k]) : "nan") << ','
        << number(report.v_mean_per_iter[k]) << ',' << number(report.delta_a_per_iter[k]) << '\n';
  }
  return out.str();
}

std::string estimate(const Vector& a, const Vector& v, const Header& header) {
  std::ostringstream out;
  out << header_block(header) << "i,a,v\n";
  for (Index i = 0; i < a.size(); ++i) out << i << ',' << number(a[i]) << ',' << number(v[i]) << '\n';
  return out.str();
}

std::string potential_curve(const PotentialCurve& curve, const Header& header) {
  std::ostringstream out;
  out << header_block(header) << "E,phi\n";
  for (std::size_t k = 0; k < curve.grid.size(); ++k) {
    out << number(curve.grid[k]) << ',' << number(curve.phi[k]) << '\n';
  }
  out << "# maxima:\n";
  if (curve.plateau) out << "# plateau\n";
  const int g = curve.global_index();
  for (int k = 0; k < static_cast<int>(curve.maxima.size()); ++k) {
    const auto& mx = curve.maxima[k];
    out << "# E = " << number(mx.e) << ", phi = " << number(mx.phi) << (mx.boundary ? ", boundary" : "")
        << (k == g ? ", global" : "") << '\n';
  }
  return out.str();
}

std::string de_trajectory(const DeTrajectory& traj, const Header& header) {
  std::ostringstream out;
  out << header_block(header) << "# status = " << to_string(traj.status) << "\n"
      << "# fixed_point = " << number(traj.fixed_point) << "\n"
      << "t,E\n";
  for (std::size_t t = 0; t < traj.e_seq.size(); ++t) out << t << ',' << number(traj.e_seq[t]) << '\n';
  return out.str();
}

std::string phase_points(const std::vector<PhasePoint>& points, const Header& header) {
  std::ostringstream out;
  out << header_block(header) << "alpha,rho,delta,eta,class,bayes_mse,amp_mse\n";
  for (const auto& pt : points) {
    out << number(pt.params.alpha) << ',' << number(pt.params.rho) << ',' << number(pt.params.delta) << ','
        << number(pt.params.eta) << ',' << to_string(pt.cls) << ',' << number(pt.bayes_mse) << ','
        << number(pt.amp_mse_predicted) << '\n';
  }
  return out.str();
}

std::string transition_lines(const std::vector<TransitionLine>& lines, const Header& header) {
  std::ostringstream out;
  out << header_block(header);
  if (!lines.empty()) {
    out << "# axis = " << to_string(lines.front().column_axis) << "\n"
        << "# critical = " << to_string(lines.front().swept_axis) << "\n";
  }
  out << "axis_value,critical_value,kind\n";
  for (const auto& line : lines) {
    for (const auto& [x, crit] : line.points) {
      out << number(x) << ',' << number(crit) << ',' << to_string(line.kind) << '\n';
    }
  }
  return out.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

}  // namespace mucs::csv
