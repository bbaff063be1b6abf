#pragma once

#include <cstddef>
#include <optional>

#include "pmslow/grid.hpp"

namespace pmslow {

/// Perona-Malik flux g(s) = s / (1 + s^2).
inline double pm_flux(double s) noexcept { return s / (1.0 + s * s); }

/// g'(s) = (1 - s^2) / (1 + s^2)^2; |g'| <= 1, negative for |s| > 1.
inline double pm_flux_derivative(double s) noexcept {
  const double q = 1.0 + s * s;
  return (1.0 - s * s) / (q * q);
}

/// Renormalized energy value. n = 0 marks a limit energy.
struct EnergyValue {
  double value;
  std::size_t k;
  std::size_t n;
};

/// (1/(2n)) sum_i log(1 + (D^{1/n} u)_i^2).
double pm_energy(const GridFunction& u);

/// k-energy n PM_n(u) - k log n.
EnergyValue k_energy(const GridFunction& u, std::size_t k);

/// L^2 gradient of the k-energy (independent of k):
/// -n D^{-1/n}[ g(D^{1/n} u) ] with the flux set to zero outside [0,1].
/// Its entries sum to zero.
GridFunction k_energy_gradient(const GridFunction& u);

/// L^2 norm of k_energy_gradient(u).
double discrete_slope(const GridFunction& u);

/// sum over jumps of log |J_d|.
double limit_energy(const PlateauFunction& p);

/// Slope of the limit energy at p. Empty for a constant p, where no slope is
/// defined; callers that need a number use value_or(0.0).
std::optional<double> limit_slope(const PlateauFunction& p);

}  // namespace pmslow
