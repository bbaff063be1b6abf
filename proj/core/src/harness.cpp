#include "pmslow/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pmslow/analysis.hpp"
#include "pmslow/errors.hpp"
#include "pmslow/functionals.hpp"
#include "pmslow/generators.hpp"
#include "pmslow/io.hpp"

#ifndef PMSLOW_VERSION_STRING
#define PMSLOW_VERSION_STRING "0.0.0"
#endif

namespace pmslow {

namespace {

using nlohmann::json;

constexpr std::pair<Experiment, std::string_view> kExperiments[] = {
    {Experiment::kSimulateDiscrete, "simulate-discrete"},
    {Experiment::kSimulateLimit, "simulate-limit"},
    {Experiment::kConverge, "converge"},
    {Experiment::kAudits, "audits"},
    {Experiment::kGamma, "gamma"},
    {Experiment::kSlope, "slope"},
    {Experiment::kWellPrep, "wellprep"},
};

std::vector<std::size_t> default_ladder(Experiment e) {
  switch (e) {
    case Experiment::kGamma: return {25, 50, 100, 200};
    case Experiment::kSlope: return {64, 128, 256, 512};
    case Experiment::kWellPrep: return {64, 128, 256};
    default: return {32, 64, 128, 256};
  }
}

// ---- config parsing -------------------------------------------------------

template <class F>
auto field(const std::string& name, F&& parse) {
  try {
    return parse();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(name, e.what());
  }
}

void reject_unknown(const json& obj, const std::string& prefix, std::initializer_list<std::string_view> keys) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(prefix + key, "unknown field");
    }
  }
}

double number(const json& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
  return x;
}

std::size_t count(const json& v, const std::string& path) {
  if (!v.is_number_unsigned()) throw ConfigError(path, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

void parse_integrator(const json& j, IntegratorOptions& o) {
  if (!j.is_object()) throw ConfigError("integrator", "expected an object");
  reject_unknown(j, "integrator.", {"theta", "sample_dt", "bisect_tol", "scheme"});
  if (j.contains("theta")) o.theta = number(j, "theta", "integrator.theta");
  if (j.contains("sample_dt")) o.sample_dt = number(j, "sample_dt", "integrator.sample_dt");
  if (j.contains("bisect_tol")) o.bisect_tol = number(j, "bisect_tol", "integrator.bisect_tol");
  if (j.contains("scheme")) {
    const auto& s = j.at("scheme");
    if (s == "sdirk2") {
      o.scheme = TimeScheme::kSdirk2;
    } else if (s == "rk4") {
      o.scheme = TimeScheme::kRk4;
    } else {
      throw ConfigError("integrator.scheme", "expected \"sdirk2\" or \"rk4\"");
    }
  }
}

void parse_limit(const json& j, LimitOptions& o) {
  if (!j.is_object()) throw ConfigError("limit", "expected an object");
  reject_unknown(j, "limit.", {"collide_eps", "rel_tol", "max_dt", "gap_step_factor", "simultaneity_tol"});
  if (j.contains("collide_eps")) o.collide_eps = number(j, "collide_eps", "limit.collide_eps");
  if (j.contains("rel_tol")) o.rel_tol = number(j, "rel_tol", "limit.rel_tol");
  if (j.contains("max_dt")) o.max_dt = number(j, "max_dt", "limit.max_dt");
  if (j.contains("gap_step_factor")) o.gap_step_factor = number(j, "gap_step_factor", "limit.gap_step_factor");
  if (j.contains("simultaneity_tol")) o.simultaneity_tol = number(j, "simultaneity_tol", "limit.simultaneity_tol");
}

void parse_initial(const json& j, RunConfig& c) {
  if (!j.is_object()) throw ConfigError("initial", "expected an object");
  if (j.contains("values")) {
    reject_unknown(j, "initial.", {"n", "values"});
    auto values = numbers(j.at("values"), "initial.values");
    if (j.contains("n") && count(j.at("n"), "initial.n") != values.size()) {
      throw ConfigError("initial.n", "does not match the number of values");
    }
    c.grid = field("initial.values", [&] { return GridFunction(std::move(values)); });
    c.plateau.reset();
    return;
  }
  reject_unknown(j, "initial.", {"jumps", "heights"});
  if (!j.contains("jumps")) throw ConfigError("initial.jumps", "missing");
  if (!j.contains("heights")) throw ConfigError("initial.heights", "missing");
  JumpSet d = field("initial.jumps", [&] { return JumpSet(numbers(j.at("jumps"), "initial.jumps")); });
  auto heights = numbers(j.at("heights"), "initial.heights");
  c.plateau = field("initial.heights", [&] { return PlateauFunction(std::move(d), std::move(heights)); });
  c.grid.reset();
}

json echo_json(const RunConfig& c) {
  json j;
  j["name"] = c.name;
  j["experiment"] = std::string(experiment_name(c.experiment));
  if (c.plateau) {
    j["initial"] = {{"jumps", std::vector<double>(c.plateau->jumps().begin(), c.plateau->jumps().end())},
                    {"heights", std::vector<double>(c.plateau->heights().begin(), c.plateau->heights().end())}};
  } else if (c.grid) {
    j["initial"] = {{"n", c.grid->n()}, {"values", std::vector<double>(c.grid->values().begin(), c.grid->values().end())}};
  }
  j["n"] = c.n;
  j["n_ladder"] = c.n_ladder;
  j["t_end"] = c.t_end;
  j["integrator"] = {{"theta", c.integrator.theta},
                     {"sample_dt", c.integrator.sample_dt},
                     {"bisect_tol", c.integrator.bisect_tol},
                     {"scheme", c.integrator.scheme == TimeScheme::kSdirk2 ? "sdirk2" : "rk4"}};
  j["limit"] = {{"collide_eps", c.limit.collide_eps},
                {"rel_tol", c.limit.rel_tol},
                {"max_dt", c.limit.max_dt},
                {"gap_step_factor", c.limit.gap_step_factor},
                {"simultaneity_tol", c.limit.simultaneity_tol}};
  j["seed"] = c.seed;
  j["instances"] = c.instances;
  j["extra_jump"] = {{"x", c.extra_jump_x}, {"height", c.extra_jump_height}};
  j["write_states"] = c.write_states;
  return j;
}

// ---- experiments ----------------------------------------------------------

struct Outcome {
  std::vector<AuditReport> audits;
  std::vector<std::filesystem::path> files;
  json diagnostics = json::object();
};

class Writer {
 public:
  Writer(std::filesystem::path dir, Outcome& outcome) : dir_(std::move(dir)), outcome_(outcome) {}

  std::ofstream open(const std::string& name) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.imbue(std::locale::classic());
    outcome_.files.push_back(path);
    return out;
  }

  void text(const std::string& name, const std::string& content) {
    auto out = open(name);
    out << content << '\n';
  }

 private:
  std::filesystem::path dir_;
  Outcome& outcome_;
};

std::vector<double> sample_times(double t_end, double dt) {
  std::vector<double> ts;
  const auto count = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
  for (std::size_t j = 0; j <= count; ++j) ts.push_back(static_cast<double>(j) * dt);
  if (t_end - ts.back() > 1e-12 * std::max(1.0, t_end)) ts.push_back(t_end);
  return ts;
}

GridFunction initial_grid(const RunConfig& c, std::size_t n) {
  if (c.grid) return *c.grid;
  return sample_plateau(*c.plateau, n);
}

void simulate_discrete(const RunConfig& c, Writer& w, Outcome& out) {
  const GridFunction u0 = initial_grid(c, c.n);
  IntegratorOptions opts = c.integrator;
  opts.store_states = true;
  const DiscreteTrajectory traj = integrate_discrete(u0, c.t_end, opts);
  {
    auto f = w.open("trajectory.csv");
    write_discrete_csv(f, traj, c.write_states);
  }
  w.text("extinctions.json", extinctions_json(traj));

  out.audits = flow_invariant_audits(traj);
  const auto t_sing = first_extinction(traj);
  if (traj.k > 0) {
    const double g0 = k_energy(u0, traj.k).value;
    out.audits.push_back(holder_audit(traj, traj.k, g0, t_sing.value_or(c.t_end)));
  }
  out.audits.push_back(gradient_flow_holder_audit(traj));
  const auto balance = energy_balance_residual(traj, traj.times.front(), traj.times.back());
  out.diagnostics["energy_balance"] = {{"drop", balance.lhs}, {"integral", balance.rhs},
                                       {"relative_residual", balance.lhs != 0 ? (balance.rhs - balance.lhs) / balance.lhs : 0.0}};
  out.diagnostics["first_extinction"] = t_sing ? json(*t_sing) : json(nullptr);
  out.diagnostics["internal_step"] = traj.step;
}

void simulate_limit(const RunConfig& c, Writer& w, Outcome& out) {
  const PlateauFunction& p0 = *c.plateau;
  const LimitTrajectory traj = integrate_limit(p0, c.t_end, c.limit);
  const auto times = sample_times(c.t_end, c.integrator.sample_dt);
  {
    auto f = w.open("limit.csv");
    write_limit_csv(f, traj, times, p0.jump_count());
  }
  w.text("collisions.json", collisions_json(traj));

  const double mean0 = p0.mean();
  const double linf0 = p0.linf();
  double drift = 0.0;
  double linf = 0.0;
  for (double t : times) {
    const PlateauFunction p = traj.evaluate(t);
    drift = std::max(drift, std::abs(p.mean() - mean0));
    linf = std::max(linf, p.linf());
  }
  out.audits.push_back(make_report("limit_mean_conservation", drift, Relation::kLessEqual, 1e-9, 0.0));
  out.audits.push_back(make_report("limit_linf_bound", linf, Relation::kLessEqual, linf0));
  if (p0.jump_count() > 0 && !traj.collisions.empty()) {
    out.audits.push_back(make_report("lifespan_upper_bound", traj.collisions.front().time, Relation::kLessEqual,
                                     lifespan_upper_bound(p0)));
  }
  // Hoelder bound and energy decay on every segment, with the constant
  // recomputed from the state at the start of the segment.
  for (const auto& seg : traj.segments) {
    if (seg.jumps.empty() || !(seg.t_end > seg.t_start)) continue;
    std::vector<double> ts{seg.t_start};
    for (double t : times) {
      if (t > seg.t_start && t < seg.t_end) ts.push_back(t);
    }
    ts.push_back(seg.t_end);
    const PlateauFunction start = traj.evaluate(seg.t_start);
    auto r = holder_audit(traj, start.jump_count(), limit_energy(start), std::vector<double>(ts.begin(), ts.end() - 1));
    r.context.state += " segment from t=" + format_double(seg.t_start);
    out.audits.push_back(r);
    double rise = 0.0;
    double prev = limit_energy(start);
    for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
      const double e = limit_energy(traj.evaluate(ts[i]));
      rise = std::max(rise, e - prev);
      prev = e;
    }
    out.audits.push_back(make_report("limit_energy_nonincreasing", rise, Relation::kLessEqual, 0.0,
                                     1e-9 * std::max(1.0, std::abs(prev)),
                                     AuditContext{std::nullopt, seg.t_start, std::nullopt, ""}));
  }
  out.diagnostics["collisions"] = traj.collisions.size();
  out.diagnostics["final_constant"] = traj.final_constant ? json(*traj.final_constant) : json(nullptr);
}

void converge(const RunConfig& c, Writer& w, Outcome& out, unsigned threads) {
  StudyOptions opts{c.integrator, c.limit, threads};
  const ConvergenceTable table = convergence_study(*c.plateau, c.n_ladder, c.t_end, opts);
  {
    auto f = w.open("convergence.csv");
    CsvWriter csv(f, {"n", "sup_l2_error", "sup_unif_error", "tsing_error", "tsing_n", "final_mean",
                      "final_oscillation"});
    for (std::size_t i = 0; i < table.n_values.size(); ++i) {
      csv.cell(table.n_values[i]).cell(table.sup_l2_error[i]).cell(table.sup_unif_error[i])
          .cell(table.tsing_error[i]).cell(table.tsing_n[i]).cell(table.final_mean[i])
          .cell(table.final_oscillation[i]);
      csv.end_row();
    }
  }
  out.audits.push_back(strictly_decreasing_report("sup_l2_error_decreasing", table.sup_l2_error));
  out.audits.push_back(strictly_decreasing_report("sup_unif_error_decreasing", table.sup_unif_error));
  if (c.plateau->jump_count() > 0) {
    out.audits.push_back(strictly_decreasing_report("tsing_error_decreasing", table.tsing_error));
  }
  out.diagnostics["tsing"] = std::isfinite(table.tsing) ? json(table.tsing) : json(nullptr);
  out.diagnostics["limit_final_constant"] =
      table.limit_final_constant ? json(*table.limit_final_constant) : json(nullptr);
}

void audits(const RunConfig& c, Writer& w, Outcome& out) {
  std::mt19937_64 rng(c.seed);
  auto reports = random_fundamental_audits(rng, c.instances);
  auto jumps = random_jump_audits(rng, c.instances);
  reports.insert(reports.end(), jumps.begin(), jumps.end());
  if (c.plateau && c.plateau->jump_count() > 0) {
    const GridFunction u = sample_plateau(*c.plateau, c.n);
    auto own = fundamental_estimates_audit(u, c.plateau->jumps(), c.plateau->jump_count());
    for (auto& r : own) r.context.state = "initial datum";
    reports.insert(reports.end(), own.begin(), own.end());
  }
  {
    auto f = w.open("audits.csv");
    write_audit_csv(f, reports);
  }
  out.audits = std::move(reports);
}

void gamma(const RunConfig& c, Writer& w, Outcome& out) {
  const GammaProbe probe = gamma_probe(*c.plateau, c.n_ladder, c.plateau->jump_count());
  {
    auto f = w.open("gamma.csv");
    CsvWriter csv(f, {"n", "k_energy", "limit_energy", "gap"});
    for (const auto& r : probe.rows) {
      csv.cell(r.n).cell(r.energy).cell(probe.limit_energy).cell(r.gap);
      csv.end_row();
    }
  }
  std::vector<double> gaps;
  for (const auto& r : probe.rows) gaps.push_back(r.gap);
  out.audits.push_back(strictly_decreasing_report("gamma_gap_decreasing", gaps));
}

void slope(const RunConfig& c, Writer& w, Outcome& out) {
  const SlopeProbe probe = slope_probe(*c.plateau, c.n_ladder);
  {
    auto f = w.open("slope.csv");
    CsvWriter csv(f, {"n", "sampled_slope", "recovery_slope", "limit_slope", "sampled_rel_gap",
                      "recovery_rel_gap"});
    for (const auto& r : probe.rows) {
      csv.cell(r.n).cell(r.sampled).cell(r.recovery).cell(probe.limit_slope).cell(r.sampled_rel_gap)
          .cell(r.recovery_rel_gap);
      csv.end_row();
    }
  }
  // Lower semicontinuity of the slope along the sampled sequence.
  for (const auto& r : probe.rows) {
    out.audits.push_back(make_report("slope_liminf", r.sampled, Relation::kGreaterEqual, probe.limit_slope,
                                     AuditContext{r.n, std::nullopt, std::nullopt, "sampled"}));
  }
  std::vector<double> gaps;
  for (const auto& r : probe.rows) gaps.push_back(r.recovery_rel_gap);
  out.diagnostics["recovery_gap_decreasing"] = strictly_decreasing(gaps);
}

void wellprep(const RunConfig& c, Writer& w, Outcome& out, unsigned threads) {
  const PlateauFunction& p = *c.plateau;
  const double x = c.extra_jump_x;
  const double height = c.extra_jump_height;
  StudyOptions opts{c.integrator, c.limit, threads};
  const WellPrepProbe probe = well_preparation_probe(
      [&](std::size_t n) { return with_extra_jump(p, n, x, height / static_cast<double>(n)); }, p,
      p.jump_count(), c.n_ladder, opts);
  {
    auto f = w.open("wellprep.csv");
    CsvWriter csv(f, {"n", "s_n", "extra_cells", "extra_extinct", "k_energy", "limit_energy", "energy_gap",
                      "evolved_gap", "max_deviation"});
    for (const auto& r : probe.rows) {
      csv.cell(r.n).cell(r.s_n).cell(r.extra_cells).cell(r.extra_extinct ? "1" : "0").cell(r.energy)
          .cell(probe.limit_energy).cell(r.energy_gap).cell(r.evolved_gap).cell(r.max_deviation);
      csv.end_row();
    }
  }
  std::vector<double> gaps, devs;
  for (const auto& r : probe.rows) {
    out.audits.push_back(make_report("extra_jump_extinct", r.extra_extinct ? 0.0 : 1.0, Relation::kLessEqual,
                                     0.0, 0.0, AuditContext{r.n, r.s_n, std::nullopt, ""}));
    gaps.push_back(r.energy_gap);
    devs.push_back(r.max_deviation);
  }
  out.audits.push_back(strictly_decreasing_report("energy_gap_decreasing", gaps));
  out.audits.push_back(strictly_decreasing_report("max_deviation_decreasing", devs));
}

json audit_json(const AuditReport& r) {
  const char* rel = r.relation == Relation::kLessEqual ? "<=" : r.relation == Relation::kGreaterEqual ? ">=" : "==";
  return {{"name", r.name}, {"relation", rel}, {"lhs", r.lhs},   {"rhs", r.rhs},
          {"slack", r.slack}, {"tol", r.tol},  {"passed", r.passed}};
}

// JSON has no infinities; non-finite numbers are written as null.
json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::optional<Experiment> parse_experiment(std::string_view name) {
  for (const auto& [e, n] : kExperiments) {
    if (n == name) return e;
  }
  return std::nullopt;
}

std::string_view experiment_name(Experiment e) {
  for (const auto& [x, n] : kExperiments) {
    if (x == e) return n;
  }
  return "unknown";
}

std::string_view version() { return PMSLOW_VERSION_STRING; }

std::vector<std::string> preset_names() { return {"sym2", "sym3", "stair3"}; }

RunConfig RunConfig::preset(std::string_view name, Experiment experiment) {
  RunConfig c;
  c.experiment = experiment;
  c.name = std::string(name);
  c.n_ladder = default_ladder(experiment);
  if (name == "sym2") {
    c.plateau = PlateauFunction(JumpSet({0.5}), {-1.0, 1.0});
    c.n = 64;
    c.t_end = 1.0;
  } else if (name == "sym3") {
    c.plateau = PlateauFunction(JumpSet({1.0 / 3.0, 2.0 / 3.0}), {-1.0, 0.0, 1.0});
    c.n = 96;
    c.t_end = 0.5;
  } else if (name == "stair3") {
    c.plateau = PlateauFunction(JumpSet({0.25, 0.6}), {0.0, 1.0, -0.5});
    c.extra_jump_x = 0.45;
    c.n = 64;
    c.t_end = 1.0;
  } else {
    throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
  }
  c.echo = echo_json(c).dump();
  return c;
}

RunConfig RunConfig::from_json(std::string_view text, Experiment experiment) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  reject_unknown(j, "", {"name", "experiment", "preset", "initial", "n", "n_ladder", "t_end", "integrator", "limit",
                         "seed", "instances", "extra_jump", "write_states"});
  RunConfig c;
  if (j.contains("preset")) {
    if (!j.at("preset").is_string()) throw ConfigError("preset", "expected a string");
    c = preset(j.at("preset").get<std::string>(), experiment);
  }
  c.experiment = experiment;
  if (!j.contains("preset")) c.n_ladder = default_ladder(experiment);
  if (j.contains("experiment")) {
    const auto& e = j.at("experiment");
    if (!e.is_string() || parse_experiment(e.get<std::string>()) != experiment) {
      throw ConfigError("experiment", "does not match the experiment given on the command line");
    }
  }
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw ConfigError("name", "expected a string");
    c.name = j.at("name").get<std::string>();
  }
  if (j.contains("initial")) parse_initial(j.at("initial"), c);
  if (j.contains("n")) c.n = count(j.at("n"), "n");
  if (j.contains("n_ladder")) {
    const auto& l = j.at("n_ladder");
    if (!l.is_array()) throw ConfigError("n_ladder", "expected an array of integers");
    c.n_ladder.clear();
    for (std::size_t i = 0; i < l.size(); ++i) c.n_ladder.push_back(count(l[i], "n_ladder[" + std::to_string(i) + "]"));
  }
  if (j.contains("t_end")) c.t_end = number(j, "t_end", "t_end");
  if (j.contains("integrator")) parse_integrator(j.at("integrator"), c.integrator);
  if (j.contains("limit")) parse_limit(j.at("limit"), c.limit);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed", "expected a nonnegative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("instances")) c.instances = count(j.at("instances"), "instances");
  if (j.contains("extra_jump")) {
    const auto& e = j.at("extra_jump");
    if (!e.is_object()) throw ConfigError("extra_jump", "expected an object");
    reject_unknown(e, "extra_jump.", {"x", "height"});
    if (e.contains("x")) c.extra_jump_x = number(e, "x", "extra_jump.x");
    if (e.contains("height")) c.extra_jump_height = number(e, "height", "extra_jump.height");
  }
  if (j.contains("write_states")) {
    if (!j.at("write_states").is_boolean()) throw ConfigError("write_states", "expected a boolean");
    c.write_states = j.at("write_states").get<bool>();
  }
  c.echo = echo_json(c).dump();
  return c;
}

void RunConfig::validate() const {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end", "must be positive");
  field("integrator", [&] {
    integrator.validate();
    return 0;
  });
  field("limit", [&] {
    limit.validate();
    return 0;
  });
  if (plateau && grid) throw ConfigError("initial", "give either a plateau or a grid function");
  const bool needs_plateau = experiment != Experiment::kSimulateDiscrete && experiment != Experiment::kAudits;
  if (needs_plateau && !plateau) throw ConfigError("initial", "this experiment needs {jumps, heights}");
  if (experiment == Experiment::kSimulateDiscrete && !plateau && !grid) throw ConfigError("initial", "missing");

  auto check_grid = [&](std::size_t m, const std::string& where) {
    if (m < 2) throw ConfigError(where, "needs at least two cells");
    if (plateau) field(where, [&] { return sample_plateau(*plateau, m); });
  };
  const bool uses_ladder = experiment == Experiment::kConverge || experiment == Experiment::kGamma ||
                           experiment == Experiment::kSlope || experiment == Experiment::kWellPrep;
  if (uses_ladder) {
    if (n_ladder.empty()) throw ConfigError("n_ladder", "must not be empty");
    for (std::size_t i = 0; i < n_ladder.size(); ++i) check_grid(n_ladder[i], "n_ladder[" + std::to_string(i) + "]");
  } else if (!grid && plateau) {
    check_grid(n, "n");
  }
  if (experiment == Experiment::kGamma && plateau && plateau->jump_count() == 0) {
    throw ConfigError("initial", "the gamma probe needs at least one jump");
  }
  if (experiment == Experiment::kWellPrep) {
    if (plateau->jump_count() == 0) throw ConfigError("initial", "the well-preparation probe needs a jump");
    if (!(extra_jump_x > 0.0 && extra_jump_x < 1.0)) throw ConfigError("extra_jump.x", "must lie in (0,1)");
    if (!(extra_jump_height > 1.0)) throw ConfigError("extra_jump.height", "must exceed 1 to be supercritical");
    for (std::size_t i = 0; i < n_ladder.size(); ++i) {
      field("extra_jump.x", [&] {
        return with_extra_jump(*plateau, n_ladder[i], extra_jump_x, extra_jump_height / static_cast<double>(n_ladder[i]));
      });
    }
  }
  if (experiment == Experiment::kAudits && instances == 0 && !plateau) {
    throw ConfigError("instances", "nothing to audit");
  }
}

RunResult run(const RunConfig& config, const std::filesystem::path& out_dir, unsigned threads) {
  RunResult result;
  try {
    config.validate();
  } catch (const ConfigError& e) {
    result.status = kExitConfigError;
    result.passed = false;
    result.message = e.what();
    return result;
  }

  const auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    result.status = kExitConfigError;
    result.passed = false;
    result.message = "out: cannot create " + out_dir.string() + ": " + ec.message();
    return result;
  }

  Outcome outcome;
  Writer writer(out_dir, outcome);
  std::string error;
  try {
    switch (config.experiment) {
      case Experiment::kSimulateDiscrete: simulate_discrete(config, writer, outcome); break;
      case Experiment::kSimulateLimit: simulate_limit(config, writer, outcome); break;
      case Experiment::kConverge: converge(config, writer, outcome, threads); break;
      case Experiment::kAudits: audits(config, writer, outcome); break;
      case Experiment::kGamma: gamma(config, writer, outcome); break;
      case Experiment::kSlope: slope(config, writer, outcome); break;
      case Experiment::kWellPrep: wellprep(config, writer, outcome, threads); break;
    }
  } catch (const ConfigError& e) {
    result.status = kExitConfigError;
    error = e.what();
  } catch (const std::exception& e) {
    result.status = kExitNumericalAbort;
    error = e.what();
  }

  if (result.status == kExitOk) {
    result.passed = all_passed(outcome.audits);
    result.worst_slack = outcome.audits.empty() ? 0.0 : worst_slack(outcome.audits);
    if (!result.passed) result.status = kExitAuditFailed;
    json summary;
    summary["name"] = std::string(experiment_name(config.experiment)) + ":" + config.name;
    summary["passed"] = result.passed;
    summary["worst_slack"] = finite_or_null(result.worst_slack);
    json list = json::array();
    for (const auto& r : outcome.audits) {
      json a = audit_json(r);
      a["lhs"] = finite_or_null(r.lhs);
      a["rhs"] = finite_or_null(r.rhs);
      a["slack"] = finite_or_null(r.slack);
      list.push_back(std::move(a));
    }
    summary["audits"] = std::move(list);
    summary["diagnostics"] = outcome.diagnostics;
    writer.text("summary.json", summary.dump(2));
  } else {
    result.passed = false;
    result.message = error;
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest;
  manifest["experiment"] = std::string(experiment_name(config.experiment));
  manifest["config"] = json::parse(config.echo.empty() ? echo_json(config).dump() : config.echo);
  manifest["version"] = std::string(version());
  manifest["compiler"] = __VERSION__;
  manifest["seed"] = config.seed;
  manifest["threads"] = threads;
  manifest["wall_time_s"] = wall;
  manifest["status"] = result.status;
  if (!error.empty()) manifest["error"] = error;
  std::vector<std::string> names;
  for (const auto& f : outcome.files) names.push_back(f.filename().string());
  manifest["files"] = names;
  writer.text("manifest.json", manifest.dump(2));
  result.files = outcome.files;
  return result;
}

}  // namespace pmslow
