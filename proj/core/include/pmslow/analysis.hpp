#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pmslow/discrete_flow.hpp"
#include "pmslow/grid.hpp"
#include "pmslow/limit_flow.hpp"

namespace pmslow {

enum class Relation { kLessEqual, kGreaterEqual, kEqual };

struct AuditContext {
  std::optional<std::size_t> n;
  std::optional<double> t;
  std::optional<double> k0;
  std::string state;
};

/// One checked inequality. slack is rhs - lhs for <=, lhs - rhs for >=, and
/// -|lhs - rhs| for equalities; passed <=> slack >= -tol.
struct AuditReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  Relation relation = Relation::kLessEqual;
  double slack = 0.0;
  double tol = 0.0;
  bool passed = false;
  AuditContext context;
};

/// Default audit tolerance 1e-9 * max(1, |lhs|, |rhs|).
double audit_tolerance(double lhs, double rhs);

AuditReport make_report(std::string name, double lhs, Relation relation, double rhs,
                        AuditContext context = {});
AuditReport make_report(std::string name, double lhs, Relation relation, double rhs, double tol,
                        AuditContext context = {});

/// Worst slack over a batch (+inf for an empty batch).
double worst_slack(const std::vector<AuditReport>& reports);
bool all_passed(const std::vector<AuditReport>& reports);

/// Energy drop G(s) - G(t) against the trapezoid value of int_s^t |grad G|^2
/// (the speed and slope integrals coincide since u' = -grad G). s and t must
/// be sample times. Passes when |residual| <= rel_tol * |drop|.
AuditReport energy_balance_residual(const DiscreteTrajectory& traj, double s, double t,
                                    double rel_tol = 1e-3);

/// (3k)^{3/4} exp(G0 / (2k)).
double holder_constant(std::size_t k, double g0);

/// Worst pair of ||u(t) - u(s)||_2 <= C |t - s|^{1/4} over all stored samples
/// in [0, t_max]. Requires states and k >= 1.
AuditReport holder_audit(const DiscreteTrajectory& traj, std::size_t k, double g0, double t_max);

/// Same over the limit evolution evaluated at the given times.
AuditReport holder_audit(const LimitTrajectory& traj, std::size_t k, double g0,
                         const std::vector<double>& times);

/// Standard gradient-flow bound ||u(t)-u(s)||_2 <= sqrt(G(s)-G(t)) |t-s|^{1/2}
/// over all stored sample pairs.
AuditReport gradient_flow_holder_audit(const DiscreteTrajectory& traj);

/// The five fundamental estimates for u in PS_{D,n} with k = |D|: energy
/// lower and upper bounds, slope vs SQ_n, slope vs the smallest jump, and the
/// slope vs consecutive jump heights. Throws StateError outside PS_{D,n}.
std::vector<AuditReport> fundamental_estimates_audit(const GridFunction& u, const JumpSet& jumps,
                                                     std::size_t k);

/// min{K0, |v-w|_inf} <= 3 |v-w|_2^{2/3} and, per d in D,
/// min{K0, |J_{d,n}(v) - J_{d,n}(w)|} <= 6 |v-w|_2^{2/3}. Requires n >= 3/K0
/// and the supercritical cells of v and w among the jump cells of D.
std::vector<AuditReport> jump_estimate_audit(const GridFunction& v, const GridFunction& w,
                                             const JumpSet& jumps);

/// Monitored invariants of a discrete run: k-energy, L-infinity norm and
/// total variation nonincreasing (violations <= 1e-9 * scale), mean drift
/// <= 1e-9 per unit time, and supercritical sets nested along the samples.
std::vector<AuditReport> flow_invariant_audits(const DiscreteTrajectory& traj);

/// Fundamental estimates on `instances` random data in PS_{D,n} (n in
/// [16, 256], 1 <= k <= 4).
std::vector<AuditReport> random_fundamental_audits(std::mt19937_64& rng, std::size_t instances);

/// Jump-height estimates on `instances` random pairs v in PS_{D',n},
/// w in PS_{D'',n} with D', D'' random subsets of a random D.
std::vector<AuditReport> random_jump_audits(std::mt19937_64& rng, std::size_t instances);

/// Report for a strictly decreasing sequence: lhs is the largest ratio
/// values[i] / values[i-1], rhs is 1, and passing requires lhs < 1.
AuditReport strictly_decreasing_report(std::string name, const std::vector<double>& values);

struct GammaRow {
  std::size_t n;
  double energy;
  double gap;  // |energy - limit|
};

struct GammaProbe {
  double limit_energy;
  std::vector<GammaRow> rows;
  bool monotone;  // gaps strictly decreasing along the ladder
};

GammaProbe gamma_probe(const PlateauFunction& p, const std::vector<std::size_t>& n_values,
                       std::size_t k);

struct SlopeRow {
  std::size_t n;
  double sampled;   // discrete slope of sample_plateau(p, n)
  double recovery;  // discrete slope of recovery_sequence(p, n)
  double sampled_rel_gap;
  double recovery_rel_gap;
};

struct SlopeProbe {
  double limit_slope;  // 0 for a constant p
  std::vector<SlopeRow> rows;
};

SlopeProbe slope_probe(const PlateauFunction& p, const std::vector<std::size_t>& n_values);

struct StudyOptions {
  IntegratorOptions integrator;
  LimitOptions limit;
  /// Worker threads for the n-ladder; 0 uses the hardware concurrency.
  unsigned threads = 0;
};

struct ConvergenceTable {
  std::vector<std::size_t> n_values;
  std::vector<double> sup_l2_error;
  std::vector<double> sup_unif_error;
  std::vector<double> tsing_error;
  /// First discrete extinction per n (NaN when none occurred).
  std::vector<double> tsing_n;
  /// Mean of the discrete state at T, per n.
  std::vector<double> final_mean;
  /// Largest deviation of the discrete state at T from its mean, per n.
  std::vector<double> final_oscillation;
  double tsing = 0.0;  // NaN for a constant datum
  std::optional<double> limit_final_constant;
};

/// Runs the discrete flow from sample_plateau(p0, n) for every n and the limit
/// flow from p0 on the same sample grid, and tabulates the errors.
ConvergenceTable convergence_study(const PlateauFunction& p0, const std::vector<std::size_t>& n_values,
                                   double t_end, const StudyOptions& opts = {});

/// True when every entry is strictly smaller than the previous one.
bool strictly_decreasing(const std::vector<double>& values);

struct WellPrepRow {
  std::size_t n;
  double s_n;
  std::size_t extra_cells;
  bool extra_extinct;
  double energy;
  double energy_gap;
  /// |energy - G_inf(u(S_n))| against the limit evolution at S_n, i.e. the
  /// gap once the motion of the limit itself is factored out.
  double evolved_gap;
  double max_deviation;
};

struct WellPrepProbe {
  double limit_energy;
  std::vector<WellPrepRow> rows;
};

/// Integrates each generated datum up to S_n = n^{-1/2} and compares with
/// the limit datum. Extra cells are the supercritical cells of the datum that
/// are not jump cells of p_limit.
WellPrepProbe well_preparation_probe(const std::function<GridFunction(std::size_t)>& generator,
                                     const PlateauFunction& p_limit, std::size_t k_prime,
                                     const std::vector<std::size_t>& n_values,
                                     const StudyOptions& opts = {});

}  // namespace pmslow
