#pragma once

#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pmslow/analysis.hpp"
#include "pmslow/discrete_flow.hpp"
#include "pmslow/grid.hpp"
#include "pmslow/limit_flow.hpp"

namespace pmslow {

/// Shortest decimal string that parses back to the same double ('.' as the
/// decimal separator regardless of locale).
std::string format_double(double x);

// {"n": .., "values": [..]} and {"jumps": [..], "heights": [..]}.
std::string to_json(const GridFunction& u);
std::string to_json(const PlateauFunction& p);
GridFunction grid_function_from_json(std::string_view text);
PlateauFunction plateau_function_from_json(std::string_view text);

/// Comma-separated rows with a header. Empty optional cells are written as
/// nothing between the separators.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);

  CsvWriter& cell(double x);
  CsvWriter& cell(std::size_t x);
  CsvWriter& cell(std::string_view text);
  CsvWriter& empty();
  void end_row();

 private:
  void sep();

  std::ostream& out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

/// t, k_energy, pm_energy, slope, linf, tv, mean, sq, J_1..J_k and, when
/// requested and available, v_1..v_n.
void write_discrete_csv(std::ostream& out, const DiscreteTrajectory& traj, bool with_states);

/// t, k, a_0..a_K with K the initial jump count; rows after collisions are
/// padded with empty cells.
void write_limit_csv(std::ostream& out, const LimitTrajectory& traj, std::span<const double> times,
                     std::size_t initial_jumps);

/// [{"time": .., "merged_groups": [[..]], "new_heights": [..]}, ..]
std::string collisions_json(const LimitTrajectory& traj);

/// [{"time": .., "cell": .., "remaining_supercritical": [..]}, ..]
std::string extinctions_json(const DiscreteTrajectory& traj);

/// name, relation, lhs, rhs, slack, tol, passed, n, t, k0, state.
void write_audit_csv(std::ostream& out, const std::vector<AuditReport>& reports);

}  // namespace pmslow
