#include "pmslow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "parallel.hpp"
#include "pmslow/errors.hpp"
#include "pmslow/functionals.hpp"
#include "pmslow/generators.hpp"

namespace pmslow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t sample_index(const DiscreteTrajectory& traj, double t) {
  const auto& ts = traj.times;
  const auto it = std::lower_bound(ts.begin(), ts.end(), t);
  std::size_t best = ts.size();
  double dist = kInf;
  for (auto cand : {it, it == ts.begin() ? it : it - 1}) {
    if (cand == ts.end()) continue;
    const double d = std::abs(*cand - t);
    if (d < dist) {
      dist = d;
      best = static_cast<std::size_t>(cand - ts.begin());
    }
  }
  if (best == ts.size() || dist > 1e-9 * std::max(1.0, std::abs(t))) {
    std::ostringstream msg;
    msg << "time " << t << " is not a sample time of the trajectory";
    throw DomainError(msg.str());
  }
  return best;
}

std::string pair_label(double s, double t) {
  std::ostringstream out;
  out << "s=" << s << " t=" << t;
  return out.str();
}

double relative_gap(double value, double reference) {
  return reference != 0.0 ? std::abs(value - reference) / std::abs(reference) : std::abs(value);
}

}  // namespace

double audit_tolerance(double lhs, double rhs) {
  return 1e-9 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

AuditReport make_report(std::string name, double lhs, Relation relation, double rhs,
                        AuditContext context) {
  return make_report(std::move(name), lhs, relation, rhs, audit_tolerance(lhs, rhs), std::move(context));
}

AuditReport make_report(std::string name, double lhs, Relation relation, double rhs, double tol,
                        AuditContext context) {
  AuditReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.relation = relation;
  switch (relation) {
    case Relation::kLessEqual: r.slack = rhs - lhs; break;
    case Relation::kGreaterEqual: r.slack = lhs - rhs; break;
    case Relation::kEqual: r.slack = -std::abs(lhs - rhs); break;
  }
  r.tol = tol;
  r.passed = std::isfinite(r.slack) && r.slack >= -tol;
  r.context = std::move(context);
  return r;
}

double worst_slack(const std::vector<AuditReport>& reports) {
  double w = kInf;
  for (const auto& r : reports) w = std::min(w, r.slack);
  return w;
}

bool all_passed(const std::vector<AuditReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const AuditReport& r) { return r.passed; });
}

AuditReport energy_balance_residual(const DiscreteTrajectory& traj, double s, double t,
                                    double rel_tol) {
  if (!(s <= t)) throw DomainError("energy balance needs s <= t");
  const std::size_t i = sample_index(traj, s);
  const std::size_t j = sample_index(traj, t);
  double integral = 0.0;
  for (std::size_t q = i; q < j; ++q) {
    const double a = traj.monitors[q].slope;
    const double b = traj.monitors[q + 1].slope;
    integral += 0.5 * (a * a + b * b) * (traj.times[q + 1] - traj.times[q]);
  }
  const double drop = traj.monitors[i].k_energy - traj.monitors[j].k_energy;
  const double tol = std::max(rel_tol * std::abs(drop), 1e-14);
  return make_report("energy_balance", drop, Relation::kEqual, integral, tol,
                     AuditContext{traj.n, t, std::nullopt, pair_label(s, t)});
}

double holder_constant(std::size_t k, double g0) {
  if (k == 0) throw DomainError("the Hoelder constant needs k >= 1");
  const double kd = static_cast<double>(k);
  return std::pow(3.0 * kd, 0.75) * std::exp(g0 / (2.0 * kd));
}

AuditReport holder_audit(const DiscreteTrajectory& traj, std::size_t k, double g0, double t_max) {
  const double c = holder_constant(k, g0);
  if (!traj.has_states()) throw StateError("Hoelder audit needs stored states");
  std::size_t m = 0;
  while (m < traj.times.size() && traj.times[m] <= t_max + 1e-12) ++m;
  AuditReport worst = make_report("holder_quarter", 0.0, Relation::kLessEqual, 0.0,
                                  AuditContext{traj.n, std::nullopt, std::nullopt, "no pairs"});
  worst.slack = kInf;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      const double lhs = l2_distance(traj.states[a], traj.states[b]);
      const double rhs = c * std::pow(traj.times[b] - traj.times[a], 0.25);
      if (rhs - lhs < worst.slack) {
        worst = make_report("holder_quarter", lhs, Relation::kLessEqual, rhs, 1e-9,
                            AuditContext{traj.n, traj.times[b], std::nullopt,
                                         pair_label(traj.times[a], traj.times[b])});
      }
    }
  }
  if (!std::isfinite(worst.slack)) worst.slack = 0.0, worst.passed = true;
  return worst;
}

AuditReport holder_audit(const LimitTrajectory& traj, std::size_t k, double g0,
                         const std::vector<double>& times) {
  const double c = holder_constant(k, g0);
  std::vector<PlateauFunction> states;
  states.reserve(times.size());
  for (double t : times) states.push_back(traj.evaluate(t));
  AuditReport worst = make_report("holder_quarter_limit", 0.0, Relation::kLessEqual, 0.0,
                                  AuditContext{std::nullopt, std::nullopt, std::nullopt, "no pairs"});
  worst.slack = kInf;
  for (std::size_t a = 0; a < times.size(); ++a) {
    for (std::size_t b = a + 1; b < times.size(); ++b) {
      const double lhs = l2_distance(states[a], states[b]);
      const double rhs = c * std::pow(std::abs(times[b] - times[a]), 0.25);
      if (rhs - lhs < worst.slack) {
        worst = make_report("holder_quarter_limit", lhs, Relation::kLessEqual, rhs, 1e-9,
                            AuditContext{std::nullopt, times[b], std::nullopt,
                                         pair_label(times[a], times[b])});
      }
    }
  }
  if (!std::isfinite(worst.slack)) worst.slack = 0.0, worst.passed = true;
  return worst;
}

AuditReport gradient_flow_holder_audit(const DiscreteTrajectory& traj) {
  // The energy difference loses about eps * |G| to cancellation once the
  // flow has nearly stopped; that rounding is added to the tolerance.
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  if (!traj.has_states()) throw StateError("Hoelder audit needs stored states");
  AuditReport worst = make_report("holder_half", 0.0, Relation::kLessEqual, 0.0,
                                  AuditContext{traj.n, std::nullopt, std::nullopt, "no pairs"});
  worst.slack = kInf;
  const std::size_t m = traj.times.size();
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      const double lhs = l2_distance(traj.states[a], traj.states[b]);
      const double ga = traj.monitors[a].k_energy;
      const double gb = traj.monitors[b].k_energy;
      const double span = traj.times[b] - traj.times[a];
      const double drop = std::max(0.0, ga - gb);
      const double rhs = std::sqrt(drop * span);
      const double rounding = 4.0 * kEps * std::max({1.0, std::abs(ga), std::abs(gb)});
      const double tol = audit_tolerance(lhs, rhs) + std::sqrt((drop + rounding) * span) - rhs;
      if (rhs - lhs + tol < worst.slack + worst.tol || !std::isfinite(worst.slack)) {
        worst = make_report("holder_half", lhs, Relation::kLessEqual, rhs, tol,
                            AuditContext{traj.n, traj.times[b], std::nullopt,
                                         pair_label(traj.times[a], traj.times[b])});
      }
    }
  }
  if (!std::isfinite(worst.slack)) worst.slack = 0.0, worst.passed = true;
  return worst;
}

std::vector<AuditReport> fundamental_estimates_audit(const GridFunction& u, const JumpSet& jumps,
                                                     std::size_t k) {
  if (k != jumps.size()) throw DomainError("k must equal the number of jumps");
  if (k == 0) throw DomainError("fundamental estimates need at least one jump");
  const double sq = subcritical_quotient(u, jumps);  // throws outside PS_{D,n}
  const std::size_t n = u.n();
  const double nd = static_cast<double>(n);
  const double g = k_energy(u, k).value;
  const double slope = discrete_slope(u);
  std::vector<double> jh;
  for (double d : jumps) jh.push_back(discrete_jump_height(u, d));
  double min_j = kInf;
  for (double j : jh) min_j = std::min(min_j, std::abs(j));
  const AuditContext ctx{n, std::nullopt, jumps.min_interval(), ""};

  std::vector<AuditReport> out;
  out.push_back(make_report("energy_vs_min_jump", g, Relation::kGreaterEqual,
                            static_cast<double>(k) * std::log(min_j), ctx));
  double upper = 0.5 * nd * std::log1p(sq * sq);
  for (double j : jh) upper += 0.5 * std::log(1.0 / (nd * nd) + j * j);
  out.push_back(make_report("energy_upper_bound", g, Relation::kLessEqual, upper, ctx));
  out.push_back(make_report("slope_vs_sq", slope, Relation::kGreaterEqual, nd * sq, ctx));
  out.push_back(make_report("slope_vs_min_jump", slope, Relation::kGreaterEqual, 1.0 / min_j, ctx));
  double weighted = 0.0;
  double prev_d = 0.0;
  double prev_term = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    const double d = i < k ? jumps[i] : 1.0;
    const double term = i < k ? jh[i] / (1.0 / (nd * nd) + jh[i] * jh[i]) : 0.0;
    const double diff = term - prev_term;
    weighted += diff * diff / (d - prev_d + 1.0 / nd);
    prev_d = d;
    prev_term = term;
  }
  out.push_back(make_report("slope_vs_jump_profile", slope * slope, Relation::kGreaterEqual, weighted, ctx));
  return out;
}

std::vector<AuditReport> jump_estimate_audit(const GridFunction& v, const GridFunction& w,
                                             const JumpSet& jumps) {
  if (v.n() != w.n()) throw DomainError("jump estimates need grid functions on the same grid");
  const std::size_t n = v.n();
  const double k0 = jumps.min_interval();
  if (static_cast<double>(n) * k0 < 3.0) throw StateError("jump estimates need n >= 3/K0");
  const CellSet allowed = jump_cells(jumps, n);
  for (const GridFunction* f : {&v, &w}) {
    for (std::size_t c : supercritical_cells(*f)) {
      if (!allowed.contains(c)) throw StateError("supercritical cell outside the jump cells of D");
    }
  }
  const auto a = v.values();
  const auto b = w.values();
  double linf = 0.0;
  for (std::size_t i = 0; i < n; ++i) linf = std::max(linf, std::abs(a[i] - b[i]));
  const double l2 = l2_distance(v, w);
  const double rhs = std::cbrt(l2 * l2);
  const AuditContext ctx{n, std::nullopt, k0, ""};
  std::vector<AuditReport> out;
  out.push_back(make_report("uniform_vs_l2", std::min(k0, linf), Relation::kLessEqual, 3.0 * rhs, ctx));
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    const double dj = std::abs(discrete_jump_height(v, jumps[i]) - discrete_jump_height(w, jumps[i]));
    AuditContext c = ctx;
    c.state = "d=" + std::to_string(jumps[i]);
    out.push_back(make_report("jump_vs_l2", std::min(k0, dj), Relation::kLessEqual, 6.0 * rhs, c));
  }
  return out;
}

std::vector<AuditReport> flow_invariant_audits(const DiscreteTrajectory& traj) {
  double energy_rise = 0.0, linf_rise = 0.0, tv_rise = 0.0, drift = 0.0;
  double energy_scale = 1.0, linf_scale = 1.0, tv_scale = 1.0;
  std::size_t not_nested = 0;
  const auto& m = traj.monitors;
  for (std::size_t j = 0; j < m.size(); ++j) {
    energy_scale = std::max(energy_scale, std::abs(m[j].k_energy));
    linf_scale = std::max(linf_scale, m[j].linf);
    tv_scale = std::max(tv_scale, m[j].tv);
    drift = std::max(drift, std::abs(m[j].mean - m.front().mean));
    if (j == 0) continue;
    energy_rise = std::max(energy_rise, m[j].k_energy - m[j - 1].k_energy);
    linf_rise = std::max(linf_rise, m[j].linf - m[j - 1].linf);
    tv_rise = std::max(tv_rise, m[j].tv - m[j - 1].tv);
    if (!std::includes(m[j - 1].supercritical.begin(), m[j - 1].supercritical.end(),
                       m[j].supercritical.begin(), m[j].supercritical.end())) {
      ++not_nested;
    }
  }
  const double span = traj.times.empty() ? 0.0 : traj.times.back() - traj.times.front();
  const AuditContext ctx{traj.n, traj.times.empty() ? std::nullopt : std::optional<double>(traj.times.back()),
                         std::nullopt, ""};
  std::vector<AuditReport> out;
  out.push_back(make_report("k_energy_nonincreasing", energy_rise, Relation::kLessEqual, 0.0,
                            1e-9 * energy_scale, ctx));
  out.push_back(make_report("linf_nonincreasing", linf_rise, Relation::kLessEqual, 0.0, 1e-9 * linf_scale, ctx));
  out.push_back(make_report("tv_nonincreasing", tv_rise, Relation::kLessEqual, 0.0, 1e-9 * tv_scale, ctx));
  out.push_back(make_report("mean_drift", drift, Relation::kLessEqual, 1e-9 * std::max(1.0, span), 0.0, ctx));
  out.push_back(make_report("supercritical_nested", static_cast<double>(not_nested), Relation::kLessEqual,
                            0.0, 0.0, ctx));
  return out;
}

std::vector<AuditReport> random_fundamental_audits(std::mt19937_64& rng, std::size_t instances) {
  std::uniform_int_distribution<std::size_t> grid(16, 256);
  std::uniform_int_distribution<std::size_t> count(1, 4);
  std::vector<AuditReport> out;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t n = grid(rng);
    const std::size_t k = count(rng);
    const PsSample s = random_ps_sample(rng, n, k);
    for (auto& r : fundamental_estimates_audit(s.u, s.jumps, k)) {
      r.context.state = "instance " + std::to_string(i);
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<AuditReport> random_jump_audits(std::mt19937_64& rng, std::size_t instances) {
  std::uniform_int_distribution<std::size_t> grid(16, 256);
  std::uniform_int_distribution<std::size_t> count(1, 4);
  std::bernoulli_distribution keep(0.5);
  std::vector<AuditReport> out;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t n = grid(rng);
    const PsSample base = random_ps_sample(rng, n, count(rng));
    auto subset = [&] {
      std::vector<double> pts;
      for (double d : base.jumps) {
        if (keep(rng)) pts.push_back(d);
      }
      return JumpSet(std::move(pts));
    };
    const GridFunction v = random_piecewise_subcritical(rng, n, subset());
    const GridFunction w = random_piecewise_subcritical(rng, n, subset());
    for (auto& r : jump_estimate_audit(v, w, base.jumps)) {
      r.context.state = "instance " + std::to_string(i) + (r.context.state.empty() ? "" : " " + r.context.state);
      out.push_back(std::move(r));
    }
  }
  return out;
}

AuditReport strictly_decreasing_report(std::string name, const std::vector<double>& values) {
  double worst = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double ratio = values[i - 1] > 0.0 ? values[i] / values[i - 1]
                                             : (values[i] < values[i - 1] ? 0.0 : kInf);
    worst = std::max(worst, ratio);
  }
  AuditReport r = make_report(std::move(name), worst, Relation::kLessEqual, 1.0, 0.0);
  r.passed = strictly_decreasing(values);
  return r;
}

GammaProbe gamma_probe(const PlateauFunction& p, const std::vector<std::size_t>& n_values,
                       std::size_t k) {
  if (k != p.jump_count()) throw DomainError("k must equal the number of jumps of p");
  GammaProbe probe{limit_energy(p), {}, true};
  for (std::size_t n : n_values) {
    const double e = k_energy(sample_plateau(p, n), k).value;
    probe.rows.push_back(GammaRow{n, e, std::abs(e - probe.limit_energy)});
  }
  std::vector<double> gaps;
  for (const auto& r : probe.rows) gaps.push_back(r.gap);
  probe.monotone = strictly_decreasing(gaps);
  return probe;
}

SlopeProbe slope_probe(const PlateauFunction& p, const std::vector<std::size_t>& n_values) {
  SlopeProbe probe{limit_slope(p).value_or(0.0), {}};
  for (std::size_t n : n_values) {
    SlopeRow row{};
    row.n = n;
    row.sampled = discrete_slope(sample_plateau(p, n));
    row.recovery = discrete_slope(recovery_sequence(p, n));
    row.sampled_rel_gap = relative_gap(row.sampled, probe.limit_slope);
    row.recovery_rel_gap = relative_gap(row.recovery, probe.limit_slope);
    probe.rows.push_back(row);
  }
  return probe;
}

bool strictly_decreasing(const std::vector<double>& values) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] < values[i - 1])) return false;
  }
  return true;
}

ConvergenceTable convergence_study(const PlateauFunction& p0, const std::vector<std::size_t>& n_values,
                                   double t_end, const StudyOptions& opts) {
  const LimitTrajectory limit = integrate_limit(p0, t_end, opts.limit);
  ConvergenceTable table;
  table.n_values = n_values;
  table.tsing = limit.collisions.empty() ? kNaN : limit.collisions.front().time;
  table.limit_final_constant = limit.final_constant;
  const std::size_t m = n_values.size();
  table.sup_l2_error.assign(m, 0.0);
  table.sup_unif_error.assign(m, 0.0);
  table.tsing_error.assign(m, 0.0);
  table.tsing_n.assign(m, kNaN);
  table.final_mean.assign(m, 0.0);
  table.final_oscillation.assign(m, 0.0);

  IntegratorOptions iopts = opts.integrator;
  iopts.store_states = true;
  detail::parallel_for(m, opts.threads, [&](std::size_t idx) {
    const std::size_t n = n_values[idx];
    const DiscreteTrajectory traj = integrate_discrete(sample_plateau(p0, n), t_end, iopts);
    double sup_l2 = 0.0;
    double sup_unif = 0.0;
    const double nd = static_cast<double>(n);
    for (std::size_t j = 0; j < traj.times.size(); ++j) {
      const PlateauFunction u = limit.evaluate(traj.times[j]);
      const GridFunction& un = traj.states[j];
      sup_l2 = std::max(sup_l2, l2_distance(un, u));
      const CellSet excluded = jump_cells(u.jumps(), n);
      for (std::size_t c = 1; c <= n; ++c) {
        if (excluded.contains(c)) continue;
        const double x = (static_cast<double>(c) - 0.5) / nd;
        sup_unif = std::max(sup_unif, std::abs(un.cell(c) - u(x)));
      }
    }
    table.sup_l2_error[idx] = sup_l2;
    table.sup_unif_error[idx] = sup_unif;
    const auto ext = first_extinction(traj);
    if (ext) table.tsing_n[idx] = *ext;
    if (p0.jump_count() == 0) {
      table.tsing_error[idx] = 0.0;
    } else {
      table.tsing_error[idx] = (ext && std::isfinite(table.tsing)) ? std::abs(*ext - table.tsing) : kInf;
    }
    const auto nm = norms(*traj.final_state);
    table.final_mean[idx] = nm.mean;
    double osc = 0.0;
    for (double v : traj.final_state->values()) osc = std::max(osc, std::abs(v - nm.mean));
    table.final_oscillation[idx] = osc;
  });
  return table;
}

WellPrepProbe well_preparation_probe(const std::function<GridFunction(std::size_t)>& generator,
                                     const PlateauFunction& p_limit, std::size_t k_prime,
                                     const std::vector<std::size_t>& n_values,
                                     const StudyOptions& opts) {
  if (k_prime != p_limit.jump_count()) throw DomainError("k' must equal the jumps of the limit datum");
  WellPrepProbe probe{limit_energy(p_limit), std::vector<WellPrepRow>(n_values.size())};
  std::vector<GridFunction> data;
  for (std::size_t n : n_values) data.push_back(generator(n));
  std::optional<LimitTrajectory> limit;
  if (p_limit.jump_count() > 0 && !n_values.empty()) {
    const double longest = 1.0 / std::sqrt(static_cast<double>(*std::min_element(n_values.begin(), n_values.end())));
    limit = integrate_limit(p_limit, longest, opts.limit);
  }
  detail::parallel_for(n_values.size(), opts.threads, [&](std::size_t idx) {
    const std::size_t n = n_values[idx];
    const GridFunction& u0 = data[idx];
    if (u0.n() != n) throw DomainError("generator returned a datum on the wrong grid");
    const double s_n = 1.0 / std::sqrt(static_cast<double>(n));
    CellSet extra = supercritical_cells(u0);
    for (std::size_t c : jump_cells(p_limit.jumps(), n)) extra.erase(c);

    IntegratorOptions iopts = opts.integrator;
    iopts.store_states = true;
    iopts.sample_dt = s_n / 64.0;
    const DiscreteTrajectory traj = integrate_discrete(u0, s_n, iopts);
    const CellSet remaining = supercritical_cells(*traj.final_state);
    bool extinct = true;
    for (std::size_t c : extra) extinct = extinct && !remaining.contains(c);
    double dev = 0.0;
    for (const auto& s : traj.states) dev = std::max(dev, l2_distance(s, p_limit));
    WellPrepRow& row = probe.rows[idx];
    row.n = n;
    row.s_n = s_n;
    row.extra_cells = extra.size();
    row.extra_extinct = extinct;
    row.energy = k_energy(*traj.final_state, k_prime).value;
    row.energy_gap = std::abs(row.energy - probe.limit_energy);
    const double evolved = limit ? limit_energy(limit->evaluate(s_n)) : probe.limit_energy;
    row.evolved_gap = std::abs(row.energy - evolved);
    row.max_deviation = dev;
  });
  return probe;
}

}  // namespace pmslow
