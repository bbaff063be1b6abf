#include "pmslow/functionals.hpp"

#include <cmath>
#include <vector>

namespace pmslow {

namespace {

double half_log_sum(const GridFunction& u) {
  const auto v = u.values();
  const double n = static_cast<double>(v.size());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double s = n * (v[i + 1] - v[i]);
    acc += std::log1p(s * s);
  }
  return 0.5 * acc;
}

}  // namespace

double pm_energy(const GridFunction& u) {
  return half_log_sum(u) / static_cast<double>(u.n());
}

EnergyValue k_energy(const GridFunction& u, std::size_t k) {
  const std::size_t n = u.n();
  const double value = half_log_sum(u) - static_cast<double>(k) * std::log(static_cast<double>(n));
  return EnergyValue{value, k, n};
}

GridFunction k_energy_gradient(const GridFunction& u) {
  const auto v = u.values();
  const std::size_t n = v.size();
  const double nd = static_cast<double>(n);
  const double n2 = nd * nd;
  std::vector<double> grad(n);
  double flux_left = 0.0;  // phantom cell left of 0
  for (std::size_t i = 0; i < n; ++i) {
    const double flux = (i + 1 < n) ? pm_flux(nd * (v[i + 1] - v[i])) : 0.0;
    grad[i] = n2 * (flux_left - flux);
    flux_left = flux;
  }
  return GridFunction(std::move(grad));
}

double discrete_slope(const GridFunction& u) {
  const auto g = k_energy_gradient(u);
  double acc = 0.0;
  for (double x : g.values()) acc += x * x;
  return std::sqrt(acc / static_cast<double>(u.n()));
}

double limit_energy(const PlateauFunction& p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.jump_count(); ++i) acc += std::log(std::abs(p.jump_height(i)));
  return acc;
}

std::optional<double> limit_slope(const PlateauFunction& p) {
  const std::size_t k = p.jump_count();
  if (k == 0) return std::nullopt;
  const auto d = p.jumps().points();
  const auto jumps = p.jump_heights();
  double sq = 1.0 / d[0] / (jumps[0] * jumps[0]) +
              1.0 / (1.0 - d[k - 1]) / (jumps[k - 1] * jumps[k - 1]);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const double diff = 1.0 / jumps[i + 1] - 1.0 / jumps[i];
    sq += diff * diff / (d[i + 1] - d[i]);
  }
  return std::sqrt(sq);
}

}  // namespace pmslow
