#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pmslow/analysis.hpp"
#include "pmslow/errors.hpp"
#include "pmslow/functionals.hpp"
#include "pmslow/generators.hpp"

namespace pmslow {
namespace {

const PlateauFunction kSym2(JumpSet({0.5}), {-1.0, 1.0});
const PlateauFunction kStair3(JumpSet({0.25, 0.6}), {0.0, 1.0, -0.5});

const AuditReport& find(const std::vector<AuditReport>& rs, const std::string& name) {
  for (const auto& r : rs) {
    if (r.name == name) return r;
  }
  throw std::runtime_error("no report " + name);
}

TEST(MakeReport, SlackConventions) {
  const auto le = make_report("le", 1.0, Relation::kLessEqual, 3.0);
  EXPECT_DOUBLE_EQ(le.slack, 2.0);
  EXPECT_TRUE(le.passed);
  const auto ge = make_report("ge", 1.0, Relation::kGreaterEqual, 3.0);
  EXPECT_DOUBLE_EQ(ge.slack, -2.0);
  EXPECT_FALSE(ge.passed);
  const auto eq = make_report("eq", 1.0, Relation::kEqual, 1.0 + 1e-12);
  EXPECT_TRUE(eq.passed);
  EXPECT_DOUBLE_EQ(audit_tolerance(0.1, 100.0), 1e-7);
  EXPECT_DOUBLE_EQ(worst_slack({le, ge}), -2.0);
  EXPECT_FALSE(all_passed({le, ge}));
  EXPECT_TRUE(std::isinf(worst_slack({})));
}

TEST(HolderConstant, OneJumpLogTwo) {
  EXPECT_NEAR(holder_constant(1, std::log(2.0)), std::pow(3.0, 0.75) * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(holder_constant(1, std::log(2.0)), 3.2237, 5e-5);
}

TEST(HolderAudit, ConstantTrajectoryPasses) {
  const auto traj = integrate_discrete(GridFunction::constant(8, 1.0), 0.1);
  const auto r = holder_audit(traj, 1, 0.0, 0.1);
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.slack - 0.0, 1.0);
  EXPECT_TRUE(gradient_flow_holder_audit(traj).passed);
}

TEST(HolderAudit, Sym2LimitAndDiscrete) {
  const auto lt = integrate_limit(kSym2, 1.0);
  std::vector<double> ts;
  for (int i = 0; i <= 64; ++i) ts.push_back(0.5 * i / 64.0);
  EXPECT_TRUE(holder_audit(lt, 1, std::log(2.0), ts).passed);

  const GridFunction u0 = sample_plateau(kSym2, 64);
  const auto traj = integrate_discrete(u0, 0.6);
  const auto r = holder_audit(traj, 1, k_energy(u0, 1).value, *first_extinction(traj));
  EXPECT_TRUE(r.passed) << r.slack;
  EXPECT_TRUE(gradient_flow_holder_audit(traj).passed);
}

TEST(EnergyBalance, Sym2QuadratureOrder) {
  IntegratorOptions coarse;
  coarse.sample_dt = std::ldexp(1.0, -18);
  coarse.store_states = false;
  IntegratorOptions fine = coarse;
  fine.sample_dt = coarse.sample_dt / 2.0;
  const GridFunction u0 = sample_plateau(kSym2, 64);
  const auto a = energy_balance_residual(integrate_discrete(u0, 0.25, coarse), 0.0, 0.25);
  const auto b = energy_balance_residual(integrate_discrete(u0, 0.25, fine), 0.0, 0.25);
  EXPECT_TRUE(a.passed);
  EXPECT_TRUE(b.passed);
  const double ra = std::abs(a.lhs - a.rhs), rb = std::abs(b.lhs - b.rhs);
  EXPECT_LE(ra, 1e-4 * std::abs(a.lhs));
  // Second order once the initial layer is resolved.
  EXPECT_GT(ra / rb, 3.0);
  EXPECT_LT(ra / rb, 5.0);
}

TEST(EnergyBalance, ConstantTrajectory) {
  const auto traj = integrate_discrete(GridFunction::constant(8, 1.0), 0.25);
  const auto r = energy_balance_residual(traj, 0.0, 0.25);
  EXPECT_DOUBLE_EQ(r.lhs, 0.0);
  EXPECT_DOUBLE_EQ(r.rhs, 0.0);
  EXPECT_TRUE(r.passed);
}

TEST(FundamentalEstimates, SampledSym2) {
  const auto rs = fundamental_estimates_audit(sample_plateau(kSym2, 16), kSym2.jumps(), 1);
  EXPECT_EQ(rs.size(), 5u);
  EXPECT_TRUE(all_passed(rs));
  const auto& e = find(rs, "energy_vs_min_jump");
  EXPECT_NEAR(e.lhs - e.rhs, 0.5 * std::log(1.0 + 1.0 / (4.0 * 256.0)), 1e-13);
  const auto& s = find(rs, "slope_vs_min_jump");
  EXPECT_DOUBLE_EQ(s.rhs, 0.5);
  EXPECT_NEAR(s.lhs, discrete_slope(sample_plateau(kSym2, 16)), 1e-15);
}

TEST(FundamentalEstimates, RandomInstances) {
  std::mt19937_64 rng(5);
  const auto rs = random_fundamental_audits(rng, 40);
  EXPECT_EQ(rs.size(), 200u);
  EXPECT_TRUE(all_passed(rs)) << worst_slack(rs);
}

TEST(FundamentalEstimates, OutsideClassThrows) {
  EXPECT_THROW(fundamental_estimates_audit(GridFunction({0.0, 0.0, 1.0, 1.0}), JumpSet({0.9}), 1), StateError);
}

TEST(JumpEstimates, IdenticalStates) {
  const GridFunction u = sample_plateau(kStair3, 40);
  const auto rs = jump_estimate_audit(u, u, kStair3.jumps());
  EXPECT_EQ(rs.size(), 3u);
  for (const auto& r : rs) {
    EXPECT_DOUBLE_EQ(r.lhs, 0.0);
    EXPECT_TRUE(r.passed);
  }
}

TEST(JumpEstimates, OnePlateauShifted) {
  const PlateauFunction q(JumpSet({0.25, 0.6}), {0.0, 1.1, -0.5});
  const GridFunction v = sample_plateau(kStair3, 40), w = sample_plateau(q, 40);
  const auto rs = jump_estimate_audit(v, w, kStair3.jumps());
  const auto& u = find(rs, "uniform_vs_l2");
  EXPECT_NEAR(u.lhs, 0.1, 1e-12);
  EXPECT_NEAR(u.rhs, 3.0 * std::cbrt(0.01 * 0.35), 1e-12);
  EXPECT_TRUE(all_passed(rs));
}

TEST(JumpEstimates, RandomInstances) {
  std::mt19937_64 rng(9);
  const auto rs = random_jump_audits(rng, 40);
  EXPECT_TRUE(all_passed(rs)) << worst_slack(rs);
}

TEST(FlowInvariants, RandomDatum) {
  std::mt19937_64 rng(13);
  const auto s = random_ps_sample(rng, 64, 3);
  IntegratorOptions o;
  o.store_states = false;
  const auto rs = flow_invariant_audits(integrate_discrete(s.u, 0.2, o));
  EXPECT_EQ(rs.size(), 5u);
  EXPECT_TRUE(all_passed(rs));
}

TEST(StrictlyDecreasing, Reports) {
  EXPECT_TRUE(strictly_decreasing({3.0, 2.0, 1.0}));
  EXPECT_FALSE(strictly_decreasing({3.0, 3.0, 1.0}));
  const auto r = strictly_decreasing_report("x", {4.0, 2.0, 1.5});
  EXPECT_DOUBLE_EQ(r.lhs, 0.75);
  EXPECT_TRUE(r.passed);
  EXPECT_FALSE(strictly_decreasing_report("y", {1.0, 1.0}).passed);
}

TEST(GammaProbe, Sym2ExactGap) {
  const GammaProbe probe = gamma_probe(kSym2, {25, 50, 100, 200}, 1);
  EXPECT_NEAR(probe.limit_energy, std::log(2.0), 1e-15);
  for (const auto& row : probe.rows) {
    const double n = static_cast<double>(row.n);
    EXPECT_NEAR(row.gap, 0.5 * std::log1p(1.0 / (4.0 * n * n)), 1e-13) << row.n;
  }
  EXPECT_TRUE(probe.monotone);
  EXPECT_NEAR(probe.rows[2].gap, 1.25e-5, 1e-8);
}

TEST(GammaProbe, Stair3SumOverJumps) {
  // Off the jump cells the sampled datum is flat, so the gap is exactly
  // sum_d (1/2) log(1 + 1/(n J_d)^2); it is not bounded by the min-jump term
  // alone once k >= 2.
  const GammaProbe probe = gamma_probe(kStair3, {25, 50, 100, 200}, 2);
  for (const auto& row : probe.rows) {
    const double n = static_cast<double>(row.n);
    const double exact = 0.5 * std::log1p(1.0 / (n * n)) + 0.5 * std::log1p(1.0 / (2.25 * n * n));
    EXPECT_NEAR(row.gap, exact, 1e-13) << row.n;
    EXPECT_LE(row.gap, (1.0 + 1.0 / 2.25) / (2.0 * n * n));
  }
  EXPECT_LT(probe.rows[2].gap, 1e-4);
  EXPECT_TRUE(probe.monotone);
}

TEST(SlopeProbe, Stair3) {
  const SlopeProbe probe = slope_probe(kStair3, {64, 128});
  EXPECT_NEAR(probe.limit_slope, 3.6122, 1e-4);
  ASSERT_EQ(probe.rows.size(), 2u);
  // The sampled slope grows like sqrt(n); the recovery sequence stays close.
  EXPECT_GT(probe.rows[1].sampled, probe.rows[0].sampled);
  EXPECT_LT(probe.rows[1].recovery_rel_gap, 0.05);
}

}  // namespace
}  // namespace pmslow
