#include "pmslow/io.hpp"

#include <charconv>
#include <cmath>

#include <nlohmann/json.hpp>

#include "pmslow/errors.hpp"

namespace pmslow {

namespace {

using nlohmann::json;

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("malformed JSON: ") + e.what());
  }
}

std::vector<double> number_array(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw DomainError(std::string("expected an array '") + key + "'");
  }
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw DomainError(std::string("'") + key + "' must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

const char* relation_symbol(Relation r) {
  switch (r) {
    case Relation::kLessEqual: return "<=";
    case Relation::kGreaterEqual: return ">=";
    case Relation::kEqual: return "==";
  }
  return "?";
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string to_json(const GridFunction& u) {
  json j;
  j["n"] = u.n();
  j["values"] = std::vector<double>(u.values().begin(), u.values().end());
  return j.dump();
}

std::string to_json(const PlateauFunction& p) {
  json j;
  j["jumps"] = std::vector<double>(p.jumps().begin(), p.jumps().end());
  j["heights"] = std::vector<double>(p.heights().begin(), p.heights().end());
  return j.dump();
}

GridFunction grid_function_from_json(std::string_view text) {
  const json j = parse(text);
  auto values = number_array(j, "values");
  if (j.contains("n") && (!j.at("n").is_number_unsigned() || j.at("n").get<std::size_t>() != values.size())) {
    throw DomainError("'n' does not match the number of values");
  }
  return GridFunction(std::move(values));
}

PlateauFunction plateau_function_from_json(std::string_view text) {
  const json j = parse(text);
  return PlateauFunction(JumpSet(number_array(j, "jumps")), number_array(j, "heights"));
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

void CsvWriter::sep() {
  if (in_row_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::cell(double x) {
  sep();
  out_ << format_double(x);
  return *this;
}

CsvWriter& CsvWriter::cell(std::size_t x) {
  sep();
  out_ << x;
  return *this;
}

CsvWriter& CsvWriter::cell(std::string_view text) {
  sep();
  out_ << text;
  return *this;
}

CsvWriter& CsvWriter::empty() {
  sep();
  return *this;
}

void CsvWriter::end_row() {
  while (in_row_ < columns_) empty();
  out_ << '\n';
  in_row_ = 0;
}

void write_discrete_csv(std::ostream& out, const DiscreteTrajectory& traj, bool with_states) {
  std::vector<std::string> header{"t", "k_energy", "pm_energy", "slope", "linf", "tv", "mean", "sq"};
  for (std::size_t i = 1; i <= traj.tracked_cells.size(); ++i) header.push_back("J_" + std::to_string(i));
  const bool states = with_states && traj.has_states();
  if (states) {
    for (std::size_t i = 1; i <= traj.n; ++i) header.push_back("v_" + std::to_string(i));
  }
  CsvWriter csv(out, header);
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    const Monitors& m = traj.monitors[j];
    csv.cell(traj.times[j]).cell(m.k_energy).cell(m.pm_energy).cell(m.slope).cell(m.linf).cell(m.tv)
        .cell(m.mean).cell(m.sq);
    for (double jh : m.jump_heights) csv.cell(jh);
    if (states) {
      for (double v : traj.states[j].values()) csv.cell(v);
    }
    csv.end_row();
  }
}

void write_limit_csv(std::ostream& out, const LimitTrajectory& traj, std::span<const double> times,
                     std::size_t initial_jumps) {
  std::vector<std::string> header{"t", "k"};
  for (std::size_t i = 0; i <= initial_jumps; ++i) header.push_back("a_" + std::to_string(i));
  CsvWriter csv(out, header);
  for (double t : times) {
    const PlateauFunction p = traj.evaluate(t);
    csv.cell(t).cell(p.jump_count());
    for (double h : p.heights()) csv.cell(h);
    csv.end_row();
  }
}

std::string collisions_json(const LimitTrajectory& traj) {
  json events = json::array();
  for (const auto& c : traj.collisions) {
    events.push_back({{"time", c.time}, {"merged_groups", c.merged_groups}, {"new_heights", c.new_heights}});
  }
  return events.dump(2);
}

std::string extinctions_json(const DiscreteTrajectory& traj) {
  json events = json::array();
  for (const auto& e : traj.extinction_events) {
    events.push_back({{"time", e.time},
                      {"cell", e.cell},
                      {"remaining_supercritical",
                       std::vector<std::size_t>(e.remaining_supercritical.begin(),
                                                e.remaining_supercritical.end())}});
  }
  return events.dump(2);
}

void write_audit_csv(std::ostream& out, const std::vector<AuditReport>& reports) {
  CsvWriter csv(out, {"name", "relation", "lhs", "rhs", "slack", "tol", "passed", "n", "t", "k0", "state"});
  for (const auto& r : reports) {
    csv.cell(r.name).cell(relation_symbol(r.relation)).cell(r.lhs).cell(r.rhs).cell(r.slack).cell(r.tol)
        .cell(r.passed ? "1" : "0");
    if (r.context.n) csv.cell(*r.context.n); else csv.empty();
    if (r.context.t) csv.cell(*r.context.t); else csv.empty();
    if (r.context.k0) csv.cell(*r.context.k0); else csv.empty();
    csv.cell(r.context.state);
    csv.end_row();
  }
}

}  // namespace pmslow
