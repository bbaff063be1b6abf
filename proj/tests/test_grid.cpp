#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pmslow/errors.hpp"
#include "pmslow/grid.hpp"

namespace pmslow {
namespace {

std::vector<double> as_vector(const GridFunction& u) { return {u.values().begin(), u.values().end()}; }

TEST(ForwardDiff, ConstantIsZero) {
  EXPECT_EQ(as_vector(forward_diff(GridFunction::constant(7, 3.5))), std::vector<double>(7, 0.0));
}

TEST(ForwardDiff, RightExtension) {
  EXPECT_EQ(as_vector(forward_diff(GridFunction({0.0, 1.0}))), (std::vector<double>{2.0, 0.0}));
  EXPECT_EQ(as_vector(forward_diff(GridFunction({0.0, 0.0, 1.0, 1.0}))), (std::vector<double>{0.0, 4.0, 0.0, 0.0}));
}

TEST(BackwardDiff, LeftExtension) {
  EXPECT_EQ(as_vector(backward_diff(GridFunction::constant(4, -2.0))), std::vector<double>(4, 0.0));
  EXPECT_EQ(as_vector(backward_diff(GridFunction({0.0, 1.0}))), (std::vector<double>{0.0, 2.0}));
  EXPECT_EQ(as_vector(backward_diff(GridFunction({1.0, 1.0, 5.0}))), (std::vector<double>{0.0, 0.0, 12.0}));
}

TEST(ForwardDiff, AdjointOfBackwardDiff) {
  // <D+ u, v> + <u, D- v> = u_n v_n - u_1 v_1, so the pairing is
  // antisymmetric once v vanishes in the first and last cells.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + static_cast<std::size_t>(trial);
    std::vector<double> a(n), b(n);
    for (auto& x : a) x = unif(rng);
    for (auto& x : b) x = unif(rng);
    b.front() = 0.0;
    b.back() = 0.0;
    const GridFunction u(a), v(b);
    EXPECT_NEAR(inner_product(forward_diff(u), v), -inner_product(u, backward_diff(v)), 1e-12)
        << "n=" << n;
  }
}

TEST(JumpCell, Ceiling) {
  EXPECT_EQ(jump_cell(0.5, 4).index, 2u);
  EXPECT_EQ(jump_cell(0.5, 3).index, 2u);
  EXPECT_EQ(jump_cell(0.999, 2).index, 2u);
  EXPECT_EQ(jump_cell(0.5, 2).index, 1u);
  EXPECT_THROW(jump_cell(0.0, 4), DomainError);
  EXPECT_THROW(jump_cell(1.0, 4), DomainError);
}

TEST(DiscreteJumpHeight, AcrossJumpCell) {
  EXPECT_DOUBLE_EQ(discrete_jump_height(GridFunction({0.0, 0.0, 1.0, 1.0}), 0.5), 1.0);
  EXPECT_DOUBLE_EQ(discrete_jump_height(GridFunction::constant(4, 2.0), 0.3), 0.0);
  EXPECT_NEAR(discrete_jump_height(GridFunction({0.0, 0.1, 1.1, 1.15}), 0.5), 1.0, 1e-15);
}

TEST(SupercriticalCells, Quotients) {
  EXPECT_TRUE(supercritical_cells(GridFunction::constant(5, 1.0)).empty());
  EXPECT_EQ(supercritical_cells(GridFunction({0.0, 0.0, 1.0, 1.0})), (CellSet{2}));
  EXPECT_TRUE(supercritical_cells(GridFunction({0.0, 0.4})).empty());
}

TEST(SubcriticalQuotient, OffJumpCells) {
  const PlateauFunction p(JumpSet({0.25, 0.75}), {0.0, 1.0, 0.0});
  EXPECT_DOUBLE_EQ(subcritical_quotient(sample_plateau(p, 16), p.jumps()), 0.0);
  EXPECT_NEAR(subcritical_quotient(GridFunction({0.0, 0.1, 1.1, 1.15}), JumpSet({0.5})), 0.4, 1e-14);
  EXPECT_DOUBLE_EQ(subcritical_quotient(GridFunction({0.0, 1.0}), JumpSet({0.5})), 0.0);
  EXPECT_THROW(subcritical_quotient(GridFunction({0.0, 0.0, 1.0, 1.0}), JumpSet({0.9})), StateError);
}

TEST(SamplePlateau, FloorSampling) {
  EXPECT_EQ(as_vector(sample_plateau(PlateauFunction(JumpSet({0.5}), {-1.0, 1.0}), 4)),
            (std::vector<double>{-1.0, -1.0, 1.0, 1.0}));
  EXPECT_EQ(as_vector(sample_plateau(PlateauFunction::constant(0.3), 5)), std::vector<double>(5, 0.3));
  // Cell c carries p((c-1)/n): the jump at 0.25 lies in cell 3 and the one at
  // 0.6 in cell 6, so the values change after cells 3 and 6.
  const PlateauFunction stair(JumpSet({0.25, 0.6}), {0.0, 1.0, -0.5});
  EXPECT_EQ(as_vector(sample_plateau(stair, 10)),
            (std::vector<double>{0.0, 0.0, 0.0, 1.0, 1.0, 1.0, -0.5, -0.5, -0.5, -0.5}));
  EXPECT_TRUE(is_piecewise_subcritical(sample_plateau(stair, 10), stair.jumps()));
}

TEST(SamplePlateau, RejectsSharedCells) {
  const PlateauFunction p(JumpSet({0.3, 0.35}), {0.0, 1.0, 0.0});
  EXPECT_THROW(sample_plateau(p, 4), JumpCollisionError);
  const PlateauFunction last(JumpSet({0.9}), {0.0, 1.0});
  EXPECT_THROW(sample_plateau(last, 4), JumpCollisionError);
}

TEST(Norms, DirectEvaluation) {
  const Norms c = norms(GridFunction::constant(3, -2.0));
  EXPECT_DOUBLE_EQ(c.l2, 2.0);
  EXPECT_DOUBLE_EQ(c.linf, 2.0);
  EXPECT_DOUBLE_EQ(c.tv, 0.0);
  EXPECT_DOUBLE_EQ(c.mean, -2.0);
  for (const auto& u : {GridFunction({0.0, 1.0}), GridFunction({0.0, 0.0, 1.0, 1.0})}) {
    const Norms m = norms(u);
    EXPECT_NEAR(m.l2, std::sqrt(0.5), 1e-15);
    EXPECT_DOUBLE_EQ(m.linf, 1.0);
    EXPECT_DOUBLE_EQ(m.tv, 1.0);
    EXPECT_DOUBLE_EQ(m.mean, 0.5);
  }
}

TEST(L2Distance, MixedGrids) {
  const PlateauFunction p(JumpSet({0.5}), {-1.0, 1.0});
  EXPECT_NEAR(l2_distance(sample_plateau(p, 4), p), 0.0, 1e-15);
  // floor sampling at n = 3 shifts the jump from 0.5 to 1/3; the mismatch
  // has length 1/6 and height 2.
  EXPECT_NEAR(l2_distance(sample_plateau(p, 3), p), std::sqrt(4.0 / 6.0), 1e-14);
  EXPECT_NEAR(l2_distance(GridFunction({0.0, 1.0}), GridFunction({0.0, 0.0, 1.0, 1.0})), 0.0, 1e-15);
  const PlateauFunction q(JumpSet({0.25}), {-1.0, 1.0});
  EXPECT_NEAR(l2_distance(p, q), 1.0, 1e-15);
}

TEST(PlateauFunction, Accessors) {
  const PlateauFunction p(JumpSet({0.25, 0.6}), {0.0, 1.0, -0.5});
  EXPECT_EQ(p.jump_heights(), (std::vector<double>{1.0, -1.5}));
  EXPECT_NEAR(p.mean(), 0.35 - 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(p.linf(), 1.0);
  EXPECT_DOUBLE_EQ(p(0.25), 1.0);
  EXPECT_DOUBLE_EQ(p(0.24), 0.0);
  EXPECT_THROW(PlateauFunction(JumpSet({0.5}), {1.0, 1.0}), DomainError);
  EXPECT_THROW(JumpSet({0.6, 0.4}), DomainError);
}

}  // namespace
}  // namespace pmslow
