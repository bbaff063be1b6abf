#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pmslow/grid.hpp"

namespace pmslow {

/// Time stepping for u' = -grad G_n(u).
///
/// `kSdirk2` is the two-stage, L-stable, second order singly diagonally
/// implicit scheme with step theta/n^2. `kRk4` is classical explicit RK4 with
/// step theta/n^3; the linearized operator has spectral radius up to 4 n^3,
/// so the explicit step must scale like n^-3.
enum class TimeScheme { kSdirk2, kRk4 };

struct IntegratorOptions {
  double theta = 0.25;
  double sample_dt = 1.0 / 512.0;
  /// Absolute tolerance of the extinction-time bisection; 0 selects step/2^20.
  double bisect_tol = 0.0;
  TimeScheme scheme = TimeScheme::kSdirk2;
  /// Renormalization count of the monitored k-energy. Defaults to the number
  /// of supercritical cells of the initial datum.
  std::optional<std::size_t> k;
  /// Keep the full state at every sample. Monitors are always recorded.
  bool store_states = true;

  /// Throws DomainError on non-positive theta or sample_dt, or negative
  /// bisect_tol.
  void validate() const;
};

struct Monitors {
  double k_energy;
  double pm_energy;
  double linf;
  double tv;
  double mean;
  double slope;
  /// Largest |D^{1/n} u| off the current supercritical cells.
  double sq;
  /// u(c+1) - u(c) for every tracked jump cell c.
  std::vector<double> jump_heights;
  CellSet supercritical;
};

/// A previously supercritical cell became subcritical.
struct ExtinctionEvent {
  double time;
  std::size_t cell;
  CellSet remaining_supercritical;
};

struct DiscreteTrajectory {
  std::size_t n = 0;
  std::size_t k = 0;
  /// Nominal internal step (theta/n^2 or theta/n^3, capped by sample_dt).
  double step = 0.0;
  TimeScheme scheme = TimeScheme::kSdirk2;
  /// Supercritical cells of the initial datum, in increasing order.
  std::vector<std::size_t> tracked_cells;
  std::vector<double> times;
  /// One state per sample time when store_states was set, otherwise empty.
  std::vector<GridFunction> states;
  std::vector<Monitors> monitors;
  std::vector<ExtinctionEvent> extinction_events;
  std::optional<GridFunction> final_state;

  bool has_states() const noexcept { return !states.empty(); }

  /// Linear interpolation between stored samples; requires has_states().
  GridFunction state_at(double t) const;
};

/// -k_energy_gradient(u).
GridFunction rhs(const GridFunction& u);

/// Integrates the rescaled semidiscrete flow from u0 up to t_end.
///
/// Samples are taken at multiples of opts.sample_dt (plus t_end). After every
/// internal step the supercritical cells are recomputed; each cell that left
/// the set produces an ExtinctionEvent whose time is refined by bisection on
/// the step length. A cell entering the set raises InvariantViolation, and a
/// non-finite state raises NumericalAbort.
DiscreteTrajectory integrate_discrete(const GridFunction& u0, double t_end,
                                      const IntegratorOptions& opts = {});

/// Time of the first extinction event, if any.
std::optional<double> first_extinction(const DiscreteTrajectory& traj);

}  // namespace pmslow
