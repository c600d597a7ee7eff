#pragma once

// Persistence formats. Every double that must survive a round trip is written in
// 17-significant-digit scientific notation; only the candidate table uses 6 fractional
// digits. All writers go through write_file_atomic (temporary file + rename).
//
// A branch stored under `name.csv` consists of
//   name.csv          step,param,l2norm,min_eig,event     (one row per point)
//   name.json         mode, parameters, grid, origin, events
//   name.points.csv   step,det_sign,ds,tangent_param,has_tangent,u[0..2n),t[0..2n)
//   name.pointK.csv   x,a1,a2 of every point K that carries an event
//   name.eventI.csv   x,a1,a2 of the refined state of event I, when present

#include "llcomb/comb_model.hpp"
#include "llcomb/continuation.hpp"
#include "llcomb/spectral_bvp.hpp"
#include "llcomb/time_evolution.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace llcomb {

/// Writes `content` to a temporary sibling of `path` and renames it into place.
/// Creates missing parent directories. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Whole file contents. Throws IoError naming the path.
std::string read_file(const std::filesystem::path& path);

/// "%.16e", the lossless rendering used by every state file.
std::string format_exact(double v);

/// Columns k,sigma,coord,param,S,T,marginal with 6 fractional digits, sorted by k then sigma.
std::string format_candidates_csv(std::vector<BifurcationCandidate> cands);
/// JSON array with the same columns at full precision.
std::string format_candidates_json(std::vector<BifurcationCandidate> cands);

/// Columns x,a1,a2.
std::string format_state_csv(const FieldState& s);
/// Inverse of format_state_csv. The node count is inferred from the rows and the
/// x column must match the grid. `origin` names the source in error messages.
FieldState parse_state_csv(std::string_view text, const std::string& origin, double padding = 2.0);

void write_state(const std::filesystem::path& path, const FieldState& s);
FieldState read_state(const std::filesystem::path& path, double padding = 2.0);

/// Writes the branch files listed above; `csv_path` must end in ".csv".
void write_branch(const std::filesystem::path& csv_path, const Branch& b);
/// Reloads a branch written by write_branch. Throws IoError on malformed input.
Branch read_branch(const std::filesystem::path& csv_path);

/// Columns t,zeta,l2norm.
std::string format_trajectory_csv(const Trajectory& tr);
/// Columns k,log_abs_ak preceded by a comment line stating the amplitude convention.
std::string format_spectrum_csv(const FieldState& s);

/// The bounds report for p as a JSON object, with `hat_modes` listing the distinct k of
/// the enumerated hat-mode candidates at (f, d); each of them is at most khat.
std::string format_bounds_json(const Parameters& p, const BoundsReport& r, const std::vector<int>& hat_modes);

} // namespace llcomb
