#pragma once

#include <compare>
#include <cstddef>
#include <set>
#include <span>
#include <vector>

namespace pmslow {

/// 1-based cell indices of a uniform grid with n cells.
using CellSet = std::set<std::size_t>;

/// Piecewise constant function on the uniform grid of [0,1] with n cells.
///
/// Cell c (1-based) is the interval ((c-1)/n, c/n). Values are never
/// evaluated at grid points, only per cell.
class GridFunction {
 public:
  explicit GridFunction(std::vector<double> values);

  static GridFunction constant(std::size_t n, double value);

  std::size_t n() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }

  /// Value on cell c, 1-based.
  double cell(std::size_t c) const;

  friend bool operator==(const GridFunction&, const GridFunction&) = default;

 private:
  std::vector<double> values_;
};

/// Ordered set of interior jump points 0 < d_1 < ... < d_k < 1.
class JumpSet {
 public:
  JumpSet() = default;
  explicit JumpSet(std::vector<double> points);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  double operator[](std::size_t i) const { return points_[i]; }
  std::span<const double> points() const noexcept { return points_; }
  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

  /// Lengths of the k+1 intervals into which the points divide (0,1).
  std::vector<double> interval_lengths() const;
  /// Shortest of those lengths (K_0 in the jump-height estimates).
  double min_interval() const;

  friend bool operator==(const JumpSet&, const JumpSet&) = default;

 private:
  std::vector<double> points_;
};

/// Piecewise constant function with exactly k jumps: heights[i] is the value
/// on (d_i, d_{i+1}) with d_0 = 0 and d_{k+1} = 1. Adjacent heights differ.
class PlateauFunction {
 public:
  PlateauFunction(JumpSet jumps, std::vector<double> heights);

  static PlateauFunction constant(double value);

  const JumpSet& jumps() const noexcept { return jumps_; }
  std::span<const double> heights() const noexcept { return heights_; }
  std::size_t jump_count() const noexcept { return jumps_.size(); }

  /// Signed jump height a_{i+1} - a_i across the i-th jump, 0-based.
  double jump_height(std::size_t i) const;
  std::vector<double> jump_heights() const;
  std::vector<double> lengths() const { return jumps_.interval_lengths(); }

  double mean() const;
  double linf() const;

  /// Right-continuous evaluation.
  double operator()(double x) const;

  friend bool operator==(const PlateauFunction&, const PlateauFunction&) = default;

 private:
  JumpSet jumps_;
  std::vector<double> heights_;
};

struct JumpCell {
  std::size_t index;  // 1-based

  auto operator<=>(const JumpCell&) const = default;
};

/// Incremental quotient n(u_{i+1} - u_i); the last cell uses u(x) = u(1)
/// for x >= 1 and is therefore 0.
GridFunction forward_diff(const GridFunction& u);

/// Incremental quotient n(u_i - u_{i-1}); the first cell uses u(x) = u(0)
/// for x <= 0 and is therefore 0.
GridFunction backward_diff(const GridFunction& u);

/// Cell containing d, i.e. ceil(n d). Points of the form i/n map to the
/// cell on their left. Throws DomainError unless 0 < d < 1.
JumpCell jump_cell(double d, std::size_t n);

/// Jump cells of every point of D, as a set.
CellSet jump_cells(const JumpSet& jumps, std::size_t n);

/// u(c+1) - u(c) with c = jump_cell(d, n); 0 when c = n.
double discrete_jump_height(const GridFunction& u, double d);

/// Cells where |n (u_{i+1} - u_i)| > 1.
CellSet supercritical_cells(const GridFunction& u);

/// Whether the supercritical cells of u are exactly the jump cells of D.
bool is_piecewise_subcritical(const GridFunction& u, const JumpSet& jumps);

/// Largest |forward_diff| off the jump cells of D. Throws StateError when
/// u is not piecewise subcritical with respect to D.
double subcritical_quotient(const GridFunction& u, const JumpSet& jumps);

/// Largest |forward_diff| off a given cell set (no membership check).
double subcritical_quotient(const GridFunction& u, const CellSet& excluded);

/// Floor sampling w(x) = p(floor(n x)/n). Each jump moves to the grid point
/// on its left, so the discrete jump heights equal the continuous ones.
/// Throws JumpCollisionError when two jumps share a cell, or when the last
/// jump lies in the last cell.
GridFunction sample_plateau(const PlateauFunction& p, std::size_t n);

struct Norms {
  double l2;
  double linf;
  double tv;
  double mean;
};

Norms norms(const GridFunction& u);

/// L^2((0,1)) inner product of two grid functions on the same grid.
double inner_product(const GridFunction& u, const GridFunction& v);

// Exact L^2 distances between piecewise constant functions, computed over the
// union of their breakpoints.
double l2_distance(const GridFunction& u, const GridFunction& v);
double l2_distance(const GridFunction& u, const PlateauFunction& p);
double l2_distance(const PlateauFunction& p, const PlateauFunction& q);

}  // namespace pmslow
