#include "pmslow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pmslow/errors.hpp"

namespace pmslow {

namespace {

// Piecewise constant function on [0,1] as breakpoints 0 = x_0 < ... < x_m = 1
// and m values.
struct StepView {
  std::vector<double> breaks;
  std::vector<double> values;
};

StepView to_steps(const GridFunction& u) {
  const std::size_t n = u.n();
  StepView s;
  s.breaks.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    s.breaks[i] = static_cast<double>(i) / static_cast<double>(n);
  }
  s.values.assign(u.values().begin(), u.values().end());
  return s;
}

StepView to_steps(const PlateauFunction& p) {
  StepView s;
  s.breaks.push_back(0.0);
  for (double d : p.jumps()) s.breaks.push_back(d);
  s.breaks.push_back(1.0);
  s.values.assign(p.heights().begin(), p.heights().end());
  return s;
}

double l2_distance_steps(const StepView& a, const StepView& b) {
  double acc = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  double x = 0.0;
  while (i < a.values.size() && j < b.values.size()) {
    const double xa = a.breaks[i + 1];
    const double xb = b.breaks[j + 1];
    const double next = std::min(xa, xb);
    const double diff = a.values[i] - b.values[j];
    acc += diff * diff * (next - x);
    x = next;
    if (xa <= next) ++i;
    if (xb <= next) ++j;
  }
  return std::sqrt(acc);
}

}  // namespace

GridFunction::GridFunction(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("GridFunction needs at least one cell");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DomainError("GridFunction value in cell " + std::to_string(i + 1) + " is not finite");
    }
  }
}

GridFunction GridFunction::constant(std::size_t n, double value) {
  return GridFunction(std::vector<double>(n, value));
}

double GridFunction::cell(std::size_t c) const {
  if (c < 1 || c > values_.size()) {
    throw DomainError("cell index " + std::to_string(c) + " outside [1, " +
                      std::to_string(values_.size()) + "]");
  }
  return values_[c - 1];
}

JumpSet::JumpSet(std::vector<double> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double d = points_[i];
    if (!(d > 0.0 && d < 1.0)) {
      std::ostringstream msg;
      msg << "jump point " << d << " is not inside (0,1)";
      throw DomainError(msg.str());
    }
    if (i > 0 && !(points_[i - 1] < d)) {
      throw DomainError("jump points must be strictly increasing");
    }
  }
}

std::vector<double> JumpSet::interval_lengths() const {
  std::vector<double> lengths;
  lengths.reserve(points_.size() + 1);
  double left = 0.0;
  for (double d : points_) {
    lengths.push_back(d - left);
    left = d;
  }
  lengths.push_back(1.0 - left);
  return lengths;
}

double JumpSet::min_interval() const {
  const auto lengths = interval_lengths();
  return *std::min_element(lengths.begin(), lengths.end());
}

PlateauFunction::PlateauFunction(JumpSet jumps, std::vector<double> heights)
    : jumps_(std::move(jumps)), heights_(std::move(heights)) {
  if (heights_.size() != jumps_.size() + 1) {
    throw DomainError("a plateau function with " + std::to_string(jumps_.size()) +
                      " jumps needs " + std::to_string(jumps_.size() + 1) + " heights, got " +
                      std::to_string(heights_.size()));
  }
  for (std::size_t i = 0; i < heights_.size(); ++i) {
    if (!std::isfinite(heights_[i])) throw DomainError("plateau height is not finite");
    if (i > 0 && heights_[i] == heights_[i - 1]) {
      throw DomainError("adjacent plateau heights " + std::to_string(i - 1) + " and " +
                        std::to_string(i) + " coincide; the jump between them must be removed");
    }
  }
}

PlateauFunction PlateauFunction::constant(double value) {
  return PlateauFunction(JumpSet{}, {value});
}

double PlateauFunction::jump_height(std::size_t i) const {
  return heights_.at(i + 1) - heights_.at(i);
}

std::vector<double> PlateauFunction::jump_heights() const {
  std::vector<double> out(jump_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = jump_height(i);
  return out;
}

double PlateauFunction::mean() const {
  const auto len = lengths();
  double acc = 0.0;
  for (std::size_t i = 0; i < heights_.size(); ++i) acc += len[i] * heights_[i];
  return acc;
}

double PlateauFunction::linf() const {
  double m = 0.0;
  for (double h : heights_) m = std::max(m, std::abs(h));
  return m;
}

double PlateauFunction::operator()(double x) const {
  const auto pts = jumps_.points();
  const auto it = std::upper_bound(pts.begin(), pts.end(), x);
  return heights_[static_cast<std::size_t>(it - pts.begin())];
}

GridFunction forward_diff(const GridFunction& u) {
  const auto v = u.values();
  const double n = static_cast<double>(v.size());
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) out[i] = n * (v[i + 1] - v[i]);
  return GridFunction(std::move(out));
}

GridFunction backward_diff(const GridFunction& u) {
  const auto v = u.values();
  const double n = static_cast<double>(v.size());
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t i = 1; i < v.size(); ++i) out[i] = n * (v[i] - v[i - 1]);
  return GridFunction(std::move(out));
}

JumpCell jump_cell(double d, std::size_t n) {
  if (!(d > 0.0 && d < 1.0)) {
    std::ostringstream msg;
    msg << "jump point " << d << " is not inside (0,1)";
    throw DomainError(msg.str());
  }
  if (n == 0) throw DomainError("grid needs at least one cell");
  const double scaled = std::ceil(static_cast<double>(n) * d);
  const auto c = static_cast<std::size_t>(scaled);
  return JumpCell{std::clamp<std::size_t>(c, 1, n)};
}

CellSet jump_cells(const JumpSet& jumps, std::size_t n) {
  CellSet cells;
  for (double d : jumps) cells.insert(jump_cell(d, n).index);
  return cells;
}

double discrete_jump_height(const GridFunction& u, double d) {
  const std::size_t c = jump_cell(d, u.n()).index;
  if (c == u.n()) return 0.0;
  return u.cell(c + 1) - u.cell(c);
}

CellSet supercritical_cells(const GridFunction& u) {
  const auto v = u.values();
  const double n = static_cast<double>(v.size());
  CellSet cells;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (std::abs(n * (v[i + 1] - v[i])) > 1.0) cells.insert(i + 1);
  }
  return cells;
}

bool is_piecewise_subcritical(const GridFunction& u, const JumpSet& jumps) {
  return supercritical_cells(u) == jump_cells(jumps, u.n());
}

double subcritical_quotient(const GridFunction& u, const CellSet& excluded) {
  const auto v = u.values();
  const double n = static_cast<double>(v.size());
  double sq = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (excluded.contains(i + 1)) continue;
    sq = std::max(sq, std::abs(n * (v[i + 1] - v[i])));
  }
  return sq;
}

double subcritical_quotient(const GridFunction& u, const JumpSet& jumps) {
  if (!is_piecewise_subcritical(u, jumps)) {
    throw StateError("function is not piecewise subcritical with respect to the given jump set");
  }
  return subcritical_quotient(u, jump_cells(jumps, u.n()));
}

GridFunction sample_plateau(const PlateauFunction& p, std::size_t n) {
  if (n == 0) throw DomainError("grid needs at least one cell");
  std::vector<std::size_t> cells;
  cells.reserve(p.jump_count());
  for (double d : p.jumps()) {
    const std::size_t c = jump_cell(d, n).index;
    if (!cells.empty() && c <= cells.back()) {
      throw JumpCollisionError("two jumps share cell " + std::to_string(c) + " at n = " +
                               std::to_string(n));
    }
    if (c >= n) {
      throw JumpCollisionError("last jump falls into the last cell at n = " + std::to_string(n));
    }
    cells.push_back(c);
  }
  const auto heights = p.heights();
  std::vector<double> values(n);
  std::size_t plateau = 0;
  for (std::size_t c = 1; c <= n; ++c) {
    // Cell c lies right of jump j exactly when its jump cell is < c.
    while (plateau < cells.size() && cells[plateau] < c) ++plateau;
    values[c - 1] = heights[plateau];
  }
  return GridFunction(std::move(values));
}

Norms norms(const GridFunction& u) {
  const auto v = u.values();
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  double sum_sq = 0.0;
  double linf = 0.0;
  double tv = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    sum += v[i];
    sum_sq += v[i] * v[i];
    linf = std::max(linf, std::abs(v[i]));
    if (i + 1 < v.size()) tv += std::abs(v[i + 1] - v[i]);
  }
  return Norms{std::sqrt(sum_sq / n), linf, tv, sum / n};
}

double inner_product(const GridFunction& u, const GridFunction& v) {
  if (u.n() != v.n()) throw DomainError("inner product of grid functions on different grids");
  const auto a = u.values();
  const auto b = v.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc / static_cast<double>(a.size());
}

double l2_distance(const GridFunction& u, const GridFunction& v) {
  if (u.n() == v.n()) {
    const auto a = u.values();
    const auto b = v.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc / static_cast<double>(a.size()));
  }
  return l2_distance_steps(to_steps(u), to_steps(v));
}

double l2_distance(const GridFunction& u, const PlateauFunction& p) {
  return l2_distance_steps(to_steps(u), to_steps(p));
}

double l2_distance(const PlateauFunction& p, const PlateauFunction& q) {
  return l2_distance_steps(to_steps(p), to_steps(q));
}

}  // namespace pmslow
