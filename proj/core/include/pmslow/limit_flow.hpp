#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "pmslow/grid.hpp"

namespace pmslow {

struct LimitOptions {
  /// Absolute gap below which adjacent plateaus are considered collided.
  double collide_eps = 1e-8;
  /// Relative local error target of the step-doubling controller.
  double rel_tol = 1e-10;
  /// Largest time step, which bounds the dense-output interpolation error.
  double max_dt = 1e-3;
  /// Time steps satisfy dt <= gap_step_factor * (min gap)^2, which follows
  /// the square-root collapse of gaps and keeps dense output accurate.
  double gap_step_factor = 0.003;
  /// Collisions closer in time than this to the previous one are reported
  /// as part of the same event.
  double simultaneity_tol = 1e-7;
  /// Stop after this many collisions.
  std::size_t max_collisions = std::numeric_limits<std::size_t>::max();

  void validate() const;
};

struct CollisionEvent {
  double time;
  /// Maximal runs of adjacent plateau indices (numbered before the event)
  /// that merged into a single plateau.
  std::vector<std::vector<std::size_t>> merged_groups;
  /// All plateau heights after the event.
  std::vector<double> new_heights;
};

/// Evolution between two collisions on a fixed jump set.
struct LimitSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  JumpSet jumps;
  /// Accepted integrator nodes; heights[j] and rates[j] belong to times[j].
  std::vector<double> times;
  std::vector<std::vector<double>> heights;
  std::vector<std::vector<double>> rates;

  /// Cubic Hermite interpolation between nodes; constant after the last one.
  std::vector<double> heights_at(double t) const;
};

struct LimitTrajectory {
  std::vector<LimitSegment> segments;
  std::vector<CollisionEvent> collisions;
  /// Set once every jump has disappeared: the mean of the initial datum.
  std::optional<double> final_constant;
  /// Time up to which the evolution was computed.
  double t_end = 0.0;

  /// State at time t >= 0; right-continuous at collisions. Past t_end the
  /// last computed state (or the final constant) is returned.
  PlateauFunction evaluate(double t) const;
};

/// Time derivatives of the plateau heights. Throws DomainError for k = 0 and
/// SingularityError if two adjacent heights coincide.
std::vector<double> plateau_rhs(const PlateauFunction& p);

/// Integrates the plateau system from p0 up to t_end, merging plateaus at
/// collisions and restarting on the reduced system.
LimitTrajectory integrate_limit(const PlateauFunction& p0, double t_end,
                                const LimitOptions& opts = {});

PlateauFunction evaluate_limit(const LimitTrajectory& traj, double t);

/// First collision time of the evolution from p0 (k >= 1).
double limit_lifespan(const PlateauFunction& p0, const LimitOptions& opts = {});

/// A priori bound ||p0||_inf * sum_d |J_d| / 2 on the lifespan.
double lifespan_upper_bound(const PlateauFunction& p0);

}  // namespace pmslow
