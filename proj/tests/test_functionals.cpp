#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pmslow/functionals.hpp"
#include "pmslow/grid.hpp"

namespace pmslow {
namespace {

TEST(PmFlux, Shape) {
  EXPECT_DOUBLE_EQ(pm_flux(1.0), 0.5);
  EXPECT_DOUBLE_EQ(pm_flux(-2.0), -0.4);
  EXPECT_DOUBLE_EQ(pm_flux_derivative(0.0), 1.0);
  EXPECT_DOUBLE_EQ(pm_flux_derivative(1.0), 0.0);
  EXPECT_LT(pm_flux_derivative(1.5), 0.0);
}

TEST(PmEnergy, Values) {
  EXPECT_DOUBLE_EQ(pm_energy(GridFunction::constant(8, 4.0)), 0.0);
  EXPECT_NEAR(pm_energy(GridFunction({0.0, 1.0})), 0.25 * std::log(5.0), 1e-15);
  EXPECT_NEAR(pm_energy(GridFunction({0.0, 0.0, 1.0, 1.0})), std::log(17.0) / 8.0, 1e-15);
}

TEST(KEnergy, Renormalization) {
  EXPECT_DOUBLE_EQ(k_energy(GridFunction::constant(3, 1.0), 0).value, 0.0);
  const EnergyValue e = k_energy(GridFunction({0.0, 1.0}), 1);
  EXPECT_NEAR(e.value, 0.5 * std::log(5.0) - std::log(2.0), 1e-15);
  EXPECT_EQ(e.k, 1u);
  EXPECT_EQ(e.n, 2u);
  const PlateauFunction sym2(JumpSet({0.5}), {-1.0, 1.0});
  EXPECT_NEAR(k_energy(sample_plateau(sym2, 100), 1).value, 0.5 * std::log(1e-4 + 4.0), 1e-13);
}

TEST(KEnergyGradient, TwoCells) {
  const GridFunction g = k_energy_gradient(GridFunction({0.0, 1.0}));
  EXPECT_NEAR(g.cell(1), -1.6, 1e-15);
  EXPECT_NEAR(g.cell(2), 1.6, 1e-15);
  EXPECT_NEAR(discrete_slope(GridFunction({0.0, 1.0})), 1.6, 1e-15);
  EXPECT_DOUBLE_EQ(discrete_slope(GridFunction::constant(6, 2.0)), 0.0);
}

TEST(KEnergyGradient, MatchesFiniteDifferences) {
  // The L^2 Riesz representative: dG/du_i = grad_i / n.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (std::size_t n : {4u, 17u, 64u}) {
    std::vector<double> v(n);
    for (auto& x : v) x = unif(rng);
    const GridFunction u(v);
    const GridFunction grad = k_energy_gradient(u);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double h = 1e-6;
      auto plus = v, minus = v;
      plus[i] += h;
      minus[i] -= h;
      const double fd = (k_energy(GridFunction(plus), 1).value - k_energy(GridFunction(minus), 1).value) / (2 * h);
      const double riesz = fd * static_cast<double>(n);
      EXPECT_NEAR(grad.cell(i + 1), riesz, 1e-6 * std::max(1.0, std::abs(riesz))) << "n=" << n << " i=" << i;
      sum += grad.cell(i + 1);
    }
    EXPECT_NEAR(sum, 0.0, 1e-9 * static_cast<double>(n * n));
  }
}

TEST(LimitEnergy, Values) {
  EXPECT_NEAR(limit_energy(PlateauFunction(JumpSet({0.5}), {-1.0, 1.0})), std::log(2.0), 1e-15);
  EXPECT_NEAR(limit_energy(PlateauFunction(JumpSet({0.25, 0.6}), {0.0, 1.0, -0.5})), std::log(1.5), 1e-15);
  EXPECT_DOUBLE_EQ(limit_energy(PlateauFunction(JumpSet({0.5}), {0.0, 1.0})), 0.0);
  EXPECT_DOUBLE_EQ(limit_energy(PlateauFunction::constant(1.0)), 0.0);
}

TEST(LimitSlope, Values) {
  EXPECT_NEAR(*limit_slope(PlateauFunction(JumpSet({0.5}), {-1.0, 1.0})), 1.0, 1e-15);
  const double stair = *limit_slope(PlateauFunction(JumpSet({0.25, 0.6}), {0.0, 1.0, -0.5}));
  EXPECT_NEAR(stair * stair, 4.0 + 1.0 / (0.4 * 2.25) + (1.0 / 0.35) * std::pow(-1.0 / 1.5 - 1.0, 2), 1e-12);
  EXPECT_NEAR(stair, 3.61215, 1e-5);
  EXPECT_FALSE(limit_slope(PlateauFunction::constant(2.0)).has_value());
}

TEST(LimitSlope, HomogeneousOfDegreeMinusOne) {
  const PlateauFunction p(JumpSet({0.2, 0.45, 0.8}), {0.3, -0.4, 1.2, 0.1});
  const PlateauFunction q(JumpSet({0.2, 0.45, 0.8}), {0.6, -0.8, 2.4, 0.2});
  EXPECT_NEAR(*limit_slope(q), 0.5 * *limit_slope(p), 1e-14);
}

}  // namespace
}  // namespace pmslow
