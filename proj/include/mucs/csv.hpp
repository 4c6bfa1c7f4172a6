#ifndef MUCS_CSV_HPP
#define MUCS_CSV_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mucs/amp.hpp"
#include "mucs/phase.hpp"
#include "mucs/replica.hpp"
#include "mucs/state_evolution.hpp"

namespace mucs::csv {

/// Ordered key/value pairs echoed as "# key = value" lines at the top of a file.
using Header = std::vector<std::pair<std::string, std::string>>;

/// Round-trippable decimal text (%.17g).
std::string number(double x);

std::string header_block(const Header& header);

std::string amp_report(const AmpReport& report, const Header& header);
std::string estimate(const Vector& a, const Vector& v, const Header& header);
std::string potential_curve(const PotentialCurve& curve, const Header& header);
std::string de_trajectory(const DeTrajectory& traj, const Header& header);
std::string phase_points(const std::vector<PhasePoint>& points, const Header& header);
std::string transition_lines(const std::vector<TransitionLine>& lines, const Header& header);

/// Writes to a sibling temporary file and renames it over path. Throws IoError.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace mucs::csv

#endif
