#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pmslow/functionals.hpp"
#include "pmslow/generators.hpp"

namespace pmslow {
namespace {

TEST(RandomJumpSet, MinimalInterval) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const JumpSet d = random_jump_set(rng, 3, 0.1);
    EXPECT_EQ(d.size(), 3u);
    EXPECT_GE(d.min_interval(), 0.1 - 1e-15);
  }
}

TEST(RandomPsSample, InClass) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const auto s = random_ps_sample(rng, 32 + 4 * i, 1 + i % 4);
    EXPECT_TRUE(is_piecewise_subcritical(s.u, s.jumps));
    for (double d : s.jumps) {
      EXPECT_GE(std::abs(discrete_jump_height(s.u, d)), 0.3);
      EXPECT_LE(std::abs(discrete_jump_height(s.u, d)), 2.0 + 1e-12);
    }
  }
}

TEST(WithExtraJump, KeepsMassAndAddsCell) {
  const PlateauFunction p(JumpSet({0.5}), {-1.0, 1.0});
  for (std::size_t n : {64u, 128u}) {
    const GridFunction u = with_extra_jump(p, n, 0.25, 2.0 / static_cast<double>(n));
    EXPECT_NEAR(norms(u).mean, p.mean(), 1e-14);
    const CellSet sc = supercritical_cells(u);
    EXPECT_EQ(sc.size(), 2u);
    EXPECT_TRUE(sc.count(jump_cell(0.25, n).index));
    EXPECT_NEAR(discrete_jump_height(u, 0.25), 2.0 / static_cast<double>(n), 1e-14);
  }
}

TEST(RecoverySequence, MatchesJumpsAndMean) {
  const PlateauFunction p(JumpSet({0.25, 0.6}), {0.0, 1.0, -0.5});
  const GridFunction u = recovery_sequence(p, 256);
  EXPECT_TRUE(is_piecewise_subcritical(u, p.jumps()));
  EXPECT_NEAR(norms(u).mean, p.mean(), 1e-13);
  // Dominated by the offset ceil(0.6 n)/n - 0.6 of the jump cell, which is
  // 1/640 here: 1.5 * sqrt(1/640) ~ 0.0593.
  EXPECT_LT(l2_distance(u, p), 0.06);
  EXPECT_NEAR(discrete_slope(u), *limit_slope(p), 0.02 * *limit_slope(p));
}

}  // namespace
}  // namespace pmslow
