#include "pmslow/discrete_flow.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <sstream>

#include "pmslow/errors.hpp"
#include "pmslow/functionals.hpp"
#include "tridiagonal.hpp"

namespace pmslow {

namespace {

// 1 - 1/sqrt(2): diagonal coefficient of the L-stable two-stage SDIRK scheme.
constexpr double kGamma = 0.29289321881345247559915563789515;
// Each implicit stage keeps gamma * h * (largest positive eigenvalue) below
// this value so that I - gamma h J stays positive definite.
constexpr double kStageSpectralLimit = 0.5;
constexpr int kMaxNewtonIterations = 25;
constexpr int kMaxSplitDepth = 24;

// Right-hand side f(v) = -grad G_n(v) and its tridiagonal Jacobian.
class FlowOperator {
 public:
  explicit FlowOperator(std::size_t n)
      : n_(n), nd_(static_cast<double>(n)), flux_(n), slope_(n) {}

  std::size_t size() const noexcept { return n_; }

  void eval(std::span<const double> v, std::span<double> out) {
    fill_flux(v);
    const double n2 = nd_ * nd_;
    double left = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      out[i] = n2 * (flux_[i] - left);
      left = flux_[i];
    }
  }

  // Assembles I - c J(v) where J = df/dv. The matrix is symmetric.
  void assemble(std::span<const double> v, double c, std::span<double> lower,
                std::span<double> diag, std::span<double> upper) {
    const double n3 = nd_ * nd_ * nd_;
    double gp_left = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double gp = (i + 1 < n_) ? pm_flux_derivative(nd_ * (v[i + 1] - v[i])) : 0.0;
      diag[i] = 1.0 + c * n3 * (gp + gp_left);
      if (i + 1 < n_) {
        upper[i] = -c * n3 * gp;
        lower[i + 1] = upper[i];
      }
      gp_left = gp;
    }
    lower[0] = 0.0;
    upper[n_ - 1] = 0.0;
  }

  // Gershgorin bound on the positive part of the spectrum of J(v); nonzero
  // only where some quotient is supercritical (backward diffusion).
  double anti_diffusion_bound(std::span<const double> v) const {
    const double n3 = nd_ * nd_ * nd_;
    double worst = 0.0;
    double neg_left = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double gp = (i + 1 < n_) ? pm_flux_derivative(nd_ * (v[i + 1] - v[i])) : 0.0;
      const double neg = std::max(0.0, -gp);
      worst = std::max(worst, neg + neg_left);
      neg_left = neg;
    }
    return 2.0 * n3 * worst;
  }

 private:
  void fill_flux(std::span<const double> v) {
    for (std::size_t i = 0; i + 1 < n_; ++i) flux_[i] = pm_flux(nd_ * (v[i + 1] - v[i]));
    flux_[n_ - 1] = 0.0;
  }

  std::size_t n_;
  double nd_;
  std::vector<double> flux_;
  std::vector<double> slope_;
};

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

class Stepper {
 public:
  Stepper(std::size_t n, TimeScheme scheme)
      : op_(n), scheme_(scheme), k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n), base_(n), y1_(n),
        lower_(n), diag_(n), upper_(n), res_(n), split_(n) {}

  std::size_t size() const noexcept { return op_.size(); }
  FlowOperator& op() noexcept { return op_; }

  // Advances v by h into out. Implicit steps that fail to converge or that
  // would cross strongly backward-diffusive states are split recursively.
  bool advance(std::span<const double> v, double h, std::span<double> out) {
    if (scheme_ == TimeScheme::kRk4) {
      rk4(v, h, out);
      return all_finite(out);
    }
    const double lambda = op_.anti_diffusion_bound(v);
    const auto pieces =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(kGamma * h * lambda / kStageSpectralLimit)));
    if (pieces == 1) return advance_split(v, h, out, 0);
    std::vector<double> cur(v.begin(), v.end());
    const double sub = h / static_cast<double>(pieces);
    for (std::size_t p = 0; p < pieces; ++p) {
      if (!advance_split(cur, sub, out, 0)) return false;
      std::copy(out.begin(), out.end(), cur.begin());
    }
    return true;
  }

 private:
  bool advance_split(std::span<const double> v, double h, std::span<double> out, int depth) {
    if (sdirk2(v, h, out)) return true;
    if (depth >= kMaxSplitDepth) return false;
    std::vector<double> mid(v.size());
    if (!advance_split(v, 0.5 * h, mid, depth + 1)) return false;
    return advance_split(mid, 0.5 * h, out, depth + 1);
  }

  void rk4(std::span<const double> v, double h, std::span<double> out) {
    const std::size_t n = v.size();
    op_.eval(v, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = v[i] + 0.5 * h * k1_[i];
    op_.eval(tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = v[i] + 0.5 * h * k2_[i];
    op_.eval(tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = v[i] + h * k3_[i];
    op_.eval(tmp_, k4_);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = v[i] + h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
  }

  // Solves y = base + c f(y) by Newton's method starting from y.
  bool solve_stage(std::span<const double> base, double c, std::span<double> y) {
    const std::size_t n = y.size();
    for (int it = 0; it < kMaxNewtonIterations; ++it) {
      op_.eval(y, res_);
      for (std::size_t i = 0; i < n; ++i) res_[i] = -(y[i] - base[i] - c * res_[i]);
      op_.assemble(y, c, lower_, diag_, upper_);
      if (!detail::solve_tridiagonal(lower_, diag_, upper_, res_)) return false;
      for (std::size_t i = 0; i < n; ++i) y[i] += res_[i];
      if (!all_finite(y)) return false;
      if (max_abs(res_) <= 1e-13 * std::max(1.0, max_abs(y))) return true;
    }
    return false;
  }

  bool sdirk2(std::span<const double> v, double h, std::span<double> out) {
    const std::size_t n = v.size();
    const double c = kGamma * h;
    std::copy(v.begin(), v.end(), y1_.begin());
    if (!solve_stage(v, c, y1_)) return false;
    op_.eval(y1_, k1_);
    for (std::size_t i = 0; i < n; ++i) base_[i] = v[i] + (1.0 - kGamma) * h * k1_[i];
    std::copy(y1_.begin(), y1_.end(), out.begin());
    return solve_stage(base_, c, out);
  }

  FlowOperator op_;
  TimeScheme scheme_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_, base_, y1_;
  std::vector<double> lower_, diag_, upper_, res_, split_;
};

CellSet supercritical_of(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  CellSet cells;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (std::abs(n * (v[i + 1] - v[i])) > 1.0) cells.insert(i + 1);
  }
  return cells;
}

bool cell_supercritical(std::span<const double> v, std::size_t cell) {
  const double n = static_cast<double>(v.size());
  return std::abs(n * (v[cell] - v[cell - 1])) > 1.0;
}

Monitors monitor(const GridFunction& u, std::size_t k, const std::vector<std::size_t>& tracked,
                 CellSet supercritical) {
  const auto nm = norms(u);
  Monitors m;
  m.k_energy = k_energy(u, k).value;
  m.pm_energy = pm_energy(u);
  m.linf = nm.linf;
  m.tv = nm.tv;
  m.mean = nm.mean;
  m.slope = discrete_slope(u);
  m.sq = subcritical_quotient(u, supercritical);
  m.jump_heights.reserve(tracked.size());
  for (std::size_t c : tracked) m.jump_heights.push_back(u.cell(c + 1) - u.cell(c));
  m.supercritical = std::move(supercritical);
  return m;
}

std::vector<double> sample_grid(double t_end, double sample_dt) {
  std::vector<double> times{0.0};
  const auto count = static_cast<std::size_t>(std::floor(t_end / sample_dt + 1e-9));
  for (std::size_t j = 1; j <= count; ++j) times.push_back(static_cast<double>(j) * sample_dt);
  if (t_end - times.back() > 1e-12 * std::max(1.0, t_end)) {
    times.push_back(t_end);
  } else {
    times.back() = t_end;
  }
  if (times.size() == 1) times.push_back(t_end);
  return times;
}

}  // namespace

void IntegratorOptions::validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("theta must be positive");
  if (!(sample_dt > 0.0) || !std::isfinite(sample_dt)) {
    throw DomainError("sample_dt must be positive");
  }
  if (!(bisect_tol >= 0.0)) throw DomainError("bisect_tol must be nonnegative");
}

GridFunction DiscreteTrajectory::state_at(double t) const {
  if (states.empty()) throw StateError("trajectory was recorded without states");
  if (t <= times.front()) return states.front();
  if (t >= times.back()) return states.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto j = static_cast<std::size_t>(it - times.begin());
  const double t0 = times[j - 1];
  const double t1 = times[j];
  const double w = (t - t0) / (t1 - t0);
  const auto a = states[j - 1].values();
  const auto b = states[j].values();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - w) * a[i] + w * b[i];
  return GridFunction(std::move(out));
}

GridFunction rhs(const GridFunction& u) {
  const auto g = k_energy_gradient(u);
  std::vector<double> out(g.values().begin(), g.values().end());
  for (double& x : out) x = -x;
  return GridFunction(std::move(out));
}

DiscreteTrajectory integrate_discrete(const GridFunction& u0, double t_end,
                                      const IntegratorOptions& opts) {
  opts.validate();
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("t_end must be positive");

  const std::size_t n = u0.n();
  const double nd = static_cast<double>(n);
  const double nominal =
      opts.scheme == TimeScheme::kSdirk2 ? opts.theta / (nd * nd) : opts.theta / (nd * nd * nd);

  DiscreteTrajectory traj;
  traj.n = n;
  traj.scheme = opts.scheme;
  traj.step = std::min(nominal, opts.sample_dt);

  CellSet current = supercritical_cells(u0);
  traj.tracked_cells.assign(current.begin(), current.end());
  traj.k = opts.k.value_or(current.size());
  const double bisect_tol = opts.bisect_tol > 0.0 ? opts.bisect_tol : traj.step * 0x1p-20;

  const auto times = sample_grid(t_end, opts.sample_dt);
  traj.times.reserve(times.size());
  traj.monitors.reserve(times.size());
  if (opts.store_states) traj.states.reserve(times.size());

  Stepper stepper(n, opts.scheme);
  std::vector<double> v(u0.values().begin(), u0.values().end());
  std::vector<double> next(n);
  std::vector<double> probe(n);

  auto record = [&](double t) {
    GridFunction u(v);
    traj.times.push_back(t);
    traj.monitors.push_back(monitor(u, traj.k, traj.tracked_cells, current));
    if (opts.store_states) traj.states.push_back(std::move(u));
  };
  record(0.0);

  double t = 0.0;
  for (std::size_t j = 1; j < times.size(); ++j) {
    const double span = times[j] - times[j - 1];
    const auto steps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / traj.step - 1e-9)));
    const double h = span / static_cast<double>(steps);
    for (std::size_t s = 0; s < steps; ++s) {
      const double t_start = times[j - 1] + static_cast<double>(s) * h;
      if (!stepper.advance(v, h, next) || !all_finite(next)) {
        throw NumericalAbort("discrete flow produced a non-finite state at n = " + std::to_string(n),
                             t_start);
      }
      CellSet after = supercritical_of(next);
      std::vector<std::size_t> created;
      std::set_difference(after.begin(), after.end(), current.begin(), current.end(),
                          std::back_inserter(created));
      if (!created.empty()) {
        std::ostringstream msg;
        msg << "cell " << created.front() << " became supercritical near t = " << t_start + h
            << " (n = " << n << ")";
        throw InvariantViolation(msg.str());
      }
      std::vector<std::size_t> removed;
      std::set_difference(current.begin(), current.end(), after.begin(), after.end(),
                          std::back_inserter(removed));
      if (!removed.empty()) {
        std::vector<std::pair<double, std::size_t>> crossings;
        for (std::size_t cell : removed) {
          double lo = 0.0;
          double hi = h;
          while (hi - lo > bisect_tol) {
            const double mid = 0.5 * (lo + hi);
            if (!stepper.advance(v, mid, probe)) {
              throw NumericalAbort("extinction bisection failed", t_start);
            }
            if (cell_supercritical(probe, cell)) {
              lo = mid;
            } else {
              hi = mid;
            }
          }
          crossings.emplace_back(t_start + 0.5 * (lo + hi), cell);
        }
        std::sort(crossings.begin(), crossings.end());
        for (const auto& [time, cell] : crossings) {
          current.erase(cell);
          traj.extinction_events.push_back(ExtinctionEvent{time, cell, current});
        }
      }
      v.swap(next);
    }
    t = times[j];
    record(t);
  }
  traj.final_state = GridFunction(v);
  return traj;
}

std::optional<double> first_extinction(const DiscreteTrajectory& traj) {
  if (traj.extinction_events.empty()) return std::nullopt;
  return traj.extinction_events.front().time;
}

}  // namespace pmslow
