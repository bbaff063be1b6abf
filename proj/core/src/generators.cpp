#include "pmslow/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pmslow/errors.hpp"
#include "pmslow/functionals.hpp"

namespace pmslow {

namespace {

constexpr int kMaxAttempts = 10'000;

// Inverse of g(s) = s/(1+s^2) on the subcritical branch |s| <= 1.
double inverse_flux_subcritical(double h) {
  if (h == 0.0) return 0.0;
  const double disc = std::max(0.0, 1.0 - 4.0 * h * h);
  return 2.0 * h / (1.0 + std::sqrt(disc));
}

GridFunction shift_to_mean(std::vector<double> values, double mean) {
  const double cur = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  for (double& v : values) v += mean - cur;
  return GridFunction(std::move(values));
}

}  // namespace

JumpSet random_jump_set(std::mt19937_64& rng, std::size_t k, double min_interval) {
  if (static_cast<double>(k + 1) * min_interval >= 1.0) {
    throw DomainError("no jump set with these interval lengths exists");
  }
  // Spread the slack 1 - (k+1) * min_interval uniformly over the intervals.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> cuts(k);
  for (double& c : cuts) c = unit(rng);
  std::sort(cuts.begin(), cuts.end());
  const double slack = 1.0 - static_cast<double>(k + 1) * min_interval;
  std::vector<double> points(k);
  for (std::size_t i = 0; i < k; ++i) {
    points[i] = static_cast<double>(i + 1) * min_interval + slack * cuts[i];
  }
  return JumpSet(std::move(points));
}

GridFunction random_piecewise_subcritical(std::mt19937_64& rng, std::size_t n, const JumpSet& jumps) {
  const CellSet cells = jump_cells(jumps, n);
  if (cells.size() != jumps.size() || (!cells.empty() && *cells.rbegin() >= n)) {
    throw JumpCollisionError("jump set is not resolved on a grid with " + std::to_string(n) + " cells");
  }
  std::uniform_real_distribution<double> magnitude(0.3, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> start(-1.0, 1.0);
  std::bernoulli_distribution sign(0.5);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const double spread = 0.95 * unit(rng);
    std::uniform_real_distribution<double> quotient(-spread, spread);
    std::vector<double> v(n);
    v[0] = start(rng);
    for (std::size_t i = 1; i < n; ++i) {
      const double inc = cells.contains(i) ? (sign(rng) ? 1.0 : -1.0) * magnitude(rng)
                                           : quotient(rng) / static_cast<double>(n);
      v[i] = v[i - 1] + inc;
    }
    GridFunction u(std::move(v));
    if (supercritical_cells(u) == cells) return u;
  }
  throw StateError("could not sample a piecewise subcritical datum");
}

PsSample random_ps_sample(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  const double min_interval = std::max(3.0 / static_cast<double>(n), 0.05);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    JumpSet d = random_jump_set(rng, k, min_interval);
    const CellSet cells = jump_cells(d, n);
    if (cells.size() != k || (!cells.empty() && *cells.rbegin() >= n)) continue;
    GridFunction u = random_piecewise_subcritical(rng, n, d);
    return PsSample{std::move(u), std::move(d)};
  }
  throw StateError("could not sample a resolved jump set");
}

GridFunction with_extra_jump(const PlateauFunction& p, std::size_t n, double x, double height) {
  const GridFunction base = sample_plateau(p, n);
  const std::size_t c = jump_cell(x, n).index;
  const CellSet existing = jump_cells(p.jumps(), n);
  if (existing.contains(c) || c >= n) throw JumpCollisionError("extra jump shares a cell with a jump");
  // Cells of the plateau containing x: between the neighbouring jump cells.
  std::size_t lo = 1;
  std::size_t hi = n;
  for (std::size_t e : existing) {
    if (e < c) lo = e + 1;
    if (e > c) {
      hi = e;
      break;
    }
  }
  const double left = static_cast<double>(c - lo + 1);
  const double right = static_cast<double>(hi - c);
  if (right < 1.0) throw JumpCollisionError("extra jump sits on the edge of its plateau");
  std::vector<double> v(base.values().begin(), base.values().end());
  for (std::size_t i = lo; i <= hi; ++i) {
    v[i - 1] += (i <= c) ? -height * right / (left + right) : height * left / (left + right);
  }
  return GridFunction(std::move(v));
}

GridFunction recovery_sequence(const PlateauFunction& p, std::size_t n) {
  if (p.jump_count() == 0) return GridFunction::constant(n, p.heights()[0]);
  (void)sample_plateau(p, n);  // validates the resolution
  const double nd = static_cast<double>(n);
  std::vector<std::size_t> anchors{0};
  std::vector<double> flux{0.0};
  const auto jh = p.jump_heights();
  for (std::size_t j = 0; j < p.jump_count(); ++j) {
    anchors.push_back(jump_cell(p.jumps()[j], n).index);
    flux.push_back(pm_flux(nd * jh[j]));
  }
  anchors.push_back(n);
  flux.push_back(0.0);

  std::vector<double> v(n);
  v[0] = 0.0;
  std::size_t seg = 0;
  for (std::size_t i = 1; i < n; ++i) {
    while (anchors[seg + 1] < i) ++seg;
    double inc = 0.0;
    if (i == anchors[seg + 1] && seg + 1 < anchors.size() - 1) {
      inc = jh[seg];
    } else {
      const double a = static_cast<double>(anchors[seg]);
      const double b = static_cast<double>(anchors[seg + 1]);
      const double w = (static_cast<double>(i) - a) / (b - a);
      inc = inverse_flux_subcritical((1.0 - w) * flux[seg] + w * flux[seg + 1]) / nd;
    }
    v[i] = v[i - 1] + inc;
  }
  return shift_to_mean(std::move(v), p.mean());
}

}  // namespace pmslow
