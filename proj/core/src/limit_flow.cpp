#include "pmslow/limit_flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmslow/errors.hpp"

namespace pmslow {

namespace {

constexpr int kMaxSteps = 10'000'000;
constexpr int kBisectionIterations = 200;

// Heights plus time, advanced either in t or in the rescaled time s with
// dt/ds = w = 1 / sum_i gap_i^-2. In s the gaps decay exponentially instead of
// like square roots, so steps stay regular up to the collision threshold.
struct State {
  std::vector<double> y;
  double t = 0.0;
};

enum class Clock { kTime, kRescaled };

class PlateauSystem {
 public:
  PlateauSystem(std::vector<double> lengths, std::vector<int> signs)
      : len_(std::move(lengths)), sign_(std::move(signs)) {}

  std::size_t size() const noexcept { return len_.size(); }

  // Returns false when a gap vanished or changed sign.
  bool rates(std::span<const double> y, std::span<double> out, double* weight = nullptr) const {
    const std::size_t m = len_.size();
    double inv_sq = 0.0;
    double left = 0.0;  // 1/(a_i - a_{i-1}), zero outside
    for (std::size_t i = 0; i < m; ++i) {
      double right = 0.0;
      if (i + 1 < m) {
        const double gap = y[i + 1] - y[i];
        if (!(gap * sign_[i] > 0.0) || !std::isfinite(gap)) return false;
        right = 1.0 / gap;
        inv_sq += right * right;
      }
      out[i] = (right - left) / len_[i];
      left = right;
    }
    if (weight != nullptr) *weight = 1.0 / inv_sq;
    return true;
  }

  double min_gap(std::span<const double> y) const {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < y.size(); ++i) g = std::min(g, std::abs(y[i + 1] - y[i]));
    return g;
  }

  bool signs_ok(std::span<const double> y) const {
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
      if (!((y[i + 1] - y[i]) * sign_[i] > 0.0)) return false;
    }
    return true;
  }

  // Derivative of the augmented state (y, t) with respect to the clock.
  bool derivative(const State& z, Clock clock, std::vector<double>& dy, double& dt) const {
    double w = 1.0;
    if (!rates(z.y, dy, &w)) return false;
    if (clock == Clock::kRescaled) {
      for (double& v : dy) v *= w;
      dt = w;
    } else {
      dt = 1.0;
    }
    return true;
  }

  bool rk4(const State& z, double h, Clock clock, State& out) const {
    const std::size_t m = size();
    std::vector<double> k1(m), k2(m), k3(m), k4(m);
    double t1 = 0, t2 = 0, t3 = 0, t4 = 0;
    State tmp{std::vector<double>(m), 0.0};
    if (!derivative(z, clock, k1, t1)) return false;
    for (std::size_t i = 0; i < m; ++i) tmp.y[i] = z.y[i] + 0.5 * h * k1[i];
    if (!derivative(tmp, clock, k2, t2)) return false;
    for (std::size_t i = 0; i < m; ++i) tmp.y[i] = z.y[i] + 0.5 * h * k2[i];
    if (!derivative(tmp, clock, k3, t3)) return false;
    for (std::size_t i = 0; i < m; ++i) tmp.y[i] = z.y[i] + h * k3[i];
    if (!derivative(tmp, clock, k4, t4)) return false;
    out.y.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      out.y[i] = z.y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out.t = z.t + h / 6.0 * (t1 + 2.0 * t2 + 2.0 * t3 + t4);
    return signs_ok(out.y);
  }

  // Step doubling with Richardson extrapolation. Returns the error estimate
  // (infinite on failure) and writes the extrapolated state.
  double doubled_step(const State& z, double h, Clock clock, State& out) const {
    State big;
    State half;
    if (!rk4(z, h, clock, big) || !rk4(z, 0.5 * h, clock, half) ||
        !rk4(half, 0.5 * h, clock, out)) {
      return std::numeric_limits<double>::infinity();
    }
    double err = 0.0;
    for (std::size_t i = 0; i < out.y.size(); ++i) {
      const double d = (out.y[i] - big.y[i]) / 15.0;
      err = std::max(err, std::abs(d));
      out.y[i] += d;
    }
    out.t += (out.t - big.t) / 15.0;
    if (!signs_ok(out.y)) return std::numeric_limits<double>::infinity();
    return err;
  }

 private:
  std::vector<double> len_;
  std::vector<int> sign_;
};

std::vector<int> gap_signs(std::span<const double> heights) {
  std::vector<int> s;
  for (std::size_t i = 0; i + 1 < heights.size(); ++i) s.push_back(heights[i + 1] > heights[i] ? 1 : -1);
  return s;
}


struct Merge {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<double> heights;
  std::vector<double> jumps;
  std::vector<double> lengths;
};

// Groups plateaus joined by a flagged gap into maximal runs and replaces each
// run by its length-weighted average.
Merge merge_plateaus(std::span<const double> heights, std::span<const double> jumps,
                     std::span<const double> lengths, const std::vector<bool>& merge_gap) {
  Merge out;
  std::size_t i = 0;
  const std::size_t m = heights.size();
  while (i < m) {
    std::size_t j = i;
    while (j + 1 < m && merge_gap[j]) ++j;
    std::vector<std::size_t> group;
    double mass = 0.0;
    double len = 0.0;
    for (std::size_t q = i; q <= j; ++q) {
      group.push_back(q);
      mass += heights[q] * lengths[q];
      len += lengths[q];
    }
    if (j > i) out.groups.push_back(group);
    out.heights.push_back(mass / len);
    out.lengths.push_back(len);
    if (j + 1 < m) out.jumps.push_back(jumps[j]);
    i = j + 1;
  }
  return out;
}

}  // namespace

void LimitOptions::validate() const {
  if (!(collide_eps > 0.0)) throw DomainError("collide_eps must be positive");
  if (!(rel_tol > 0.0)) throw DomainError("rel_tol must be positive");
  if (!(max_dt > 0.0)) throw DomainError("max_dt must be positive");
  if (!(gap_step_factor > 0.0)) throw DomainError("gap_step_factor must be positive");
  if (!(simultaneity_tol >= 0.0)) throw DomainError("simultaneity_tol must be nonnegative");
}

std::vector<double> plateau_rhs(const PlateauFunction& p) {
  if (p.jump_count() == 0) throw DomainError("plateau_rhs needs at least one jump");
  const auto h = p.heights();
  const auto len = p.lengths();
  std::vector<double> out(h.size());
  double left = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    double right = 0.0;
    if (i + 1 < h.size()) {
      const double gap = h[i + 1] - h[i];
      if (gap == 0.0) throw SingularityError("vanishing gap between plateaus " + std::to_string(i) +
                                             " and " + std::to_string(i + 1));
      right = 1.0 / gap;
    }
    out[i] = (right - left) / len[i];
    left = right;
  }
  return out;
}

std::vector<double> LimitSegment::heights_at(double t) const {
  if (times.empty()) throw StateError("empty limit segment");
  if (t <= times.front()) return heights.front();
  if (t >= times.back()) return heights.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto j = static_cast<std::size_t>(it - times.begin());
  const double t0 = times[j - 1];
  const double h = times[j] - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  const auto& y0 = heights[j - 1];
  const auto& y1 = heights[j];
  const auto& f0 = rates[j - 1];
  const auto& f1 = rates[j];
  std::vector<double> out(y0.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = h00 * y0[i] + h * h10 * f0[i] + h01 * y1[i] + h * h11 * f1[i];
  }
  return out;
}

PlateauFunction LimitTrajectory::evaluate(double t) const {
  if (!(t >= 0.0)) throw DomainError("evaluation time must be nonnegative");
  for (const auto& seg : segments) {
    if (t < seg.t_end) return PlateauFunction(seg.jumps, seg.heights_at(t));
  }
  if (final_constant) return PlateauFunction::constant(*final_constant);
  if (segments.empty()) throw StateError("empty limit trajectory");
  const auto& last = segments.back();
  return PlateauFunction(last.jumps, last.heights.back());
}

PlateauFunction evaluate_limit(const LimitTrajectory& traj, double t) { return traj.evaluate(t); }

LimitTrajectory integrate_limit(const PlateauFunction& p0, double t_end, const LimitOptions& opts) {
  opts.validate();
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("t_end must be positive");

  LimitTrajectory traj;
  const double mean0 = p0.mean();
  if (p0.jump_count() == 0) {
    traj.final_constant = p0.heights()[0];
    traj.t_end = t_end;
    return traj;
  }

  std::vector<double> jumps(p0.jumps().begin(), p0.jumps().end());
  std::vector<double> lengths = p0.lengths();
  State z{std::vector<double>(p0.heights().begin(), p0.heights().end()), 0.0};
  const double scale = std::max(p0.linf(), std::numeric_limits<double>::min());
  const double abs_tol = opts.rel_tol * scale;
  double h = 1e-3;
  double horizon = t_end;
  double last_event_time = 0.0;
  std::vector<std::vector<std::size_t>> origin;

  while (true) {
    PlateauSystem sys(lengths, gap_signs(z.y));
    LimitSegment seg;
    seg.t_start = z.t;
    seg.jumps = JumpSet(jumps);
    std::vector<double> rate(z.y.size());
    auto push_node = [&](const State& s) {
      if (!sys.rates(s.y, rate)) throw NumericalAbort("plateau gap closed inside a step", s.t);
      seg.times.push_back(s.t);
      seg.heights.push_back(s.y);
      seg.rates.push_back(rate);
    };
    push_node(z);

    bool collided = false;
    int steps = 0;
    while (z.t < horizon) {
      if (++steps > kMaxSteps) throw NumericalAbort("limit integrator made no progress", z.t);
      double w = 0.0;
      if (!sys.rates(z.y, rate, &w)) throw NumericalAbort("plateau gap closed", z.t);
      const double gap = sys.min_gap(z.y);
      // Caps in t translate to caps in s through dt = w ds.
      const double dt_cap = std::min(opts.max_dt, opts.gap_step_factor * gap * gap);
      h = std::min(h, dt_cap / w);

      State next;
      Clock clock = Clock::kRescaled;
      double step = h;
      if (z.t + w * h >= horizon) {
        clock = Clock::kTime;
        step = horizon - z.t;
      }
      const double tol = abs_tol;
      const double err = sys.doubled_step(z, step, clock, next);
      if (!(err <= tol)) {
        if (clock == Clock::kTime) {
          h = 0.5 * (horizon - z.t) / w;
        } else {
          h *= std::isfinite(err) ? std::max(0.1, 0.9 * std::pow(tol / err, 0.2)) : 0.25;
        }
        if (!(h > 0.0) || !std::isfinite(h)) throw NumericalAbort("limit step size underflow", z.t);
        continue;
      }
      if (clock == Clock::kTime) next.t = horizon;

      if (sys.min_gap(next.y) <= opts.collide_eps) {
        // Locate the threshold crossing by bisection on the step length.
        double lo = 0.0;
        double hi = step;
        State best = next;
        for (int it = 0; it < kBisectionIterations && hi - lo > 1e-15 * step; ++it) {
          const double mid = 0.5 * (lo + hi);
          State trial;
          const double e = sys.doubled_step(z, mid, clock, trial);
          const bool closed = !std::isfinite(e) || sys.min_gap(trial.y) <= opts.collide_eps;
          if (closed) {
            hi = mid;
            if (std::isfinite(e)) best = trial;
          } else {
            lo = mid;
          }
        }
        z = best;
        push_node(z);
        collided = true;
        break;
      }

      z = next;
      push_node(z);
      if (!(err > 0.0)) {
        h *= 4.0;
      } else {
        h *= std::min(4.0, std::max(0.1, 0.9 * std::pow(tol / err, 0.2)));
      }
    }

    if (!collided) {
      seg.t_end = z.t;
      traj.segments.push_back(std::move(seg));
      traj.t_end = z.t;
      return traj;
    }

    // Extrapolate the collision time from gap^2 closing at its current rate.
    if (!sys.rates(z.y, rate)) throw NumericalAbort("plateau gap closed", z.t);
    const std::size_t gaps = z.y.size() - 1;
    double r_min = std::numeric_limits<double>::infinity();
    std::vector<bool> merge_gap(gaps);
    for (std::size_t i = 0; i < gaps; ++i) {
      const double g = z.y[i + 1] - z.y[i];
      merge_gap[i] = std::abs(g) <= opts.collide_eps;
      const double closing = -2.0 * g * (rate[i + 1] - rate[i]);
      if (merge_gap[i] && closing > 0.0) r_min = std::min(r_min, g * g / closing);
    }
    if (!std::isfinite(r_min)) r_min = 0.0;
    const double t_collision = z.t + r_min;
    seg.t_end = t_collision;
    traj.segments.push_back(std::move(seg));

    // Collisions within the simultaneity window of the previous event belong
    // to it: near a multiple collision the symmetric configuration is
    // unstable, and integration error splits it into a burst of close events.
    const bool coalesce = !traj.collisions.empty() &&
                          t_collision - last_event_time <= opts.simultaneity_tol;
    if (!coalesce) {
      origin.assign(z.y.size(), {});
      for (std::size_t i = 0; i < origin.size(); ++i) origin[i] = {i};
    }
    std::vector<double> heights = z.y;
    std::vector<double> cur_jumps = jumps;
    std::vector<double> cur_lengths = lengths;
    while (true) {
      Merge mg = merge_plateaus(heights, cur_jumps, cur_lengths, merge_gap);
      std::vector<std::vector<std::size_t>> next_origin;
      std::size_t q = 0;
      while (q < heights.size()) {
        std::vector<std::size_t> joined = origin[q];
        while (q + 1 < heights.size() && merge_gap[q]) {
          ++q;
          joined.insert(joined.end(), origin[q].begin(), origin[q].end());
        }
        next_origin.push_back(std::move(joined));
        ++q;
      }
      origin = std::move(next_origin);
      heights = std::move(mg.heights);
      cur_jumps = std::move(mg.jumps);
      cur_lengths = std::move(mg.lengths);
      merge_gap.assign(heights.empty() ? 0 : heights.size() - 1, false);
      bool again = false;
      for (std::size_t i = 0; i + 1 < heights.size(); ++i) {
        if (std::abs(heights[i + 1] - heights[i]) <= opts.collide_eps) {
          merge_gap[i] = true;
          again = true;
        }
      }
      if (!again) break;
    }
    if (!coalesce) {
      traj.collisions.push_back(CollisionEvent{});
      traj.collisions.back().time = t_collision;
    }
    CollisionEvent& event = traj.collisions.back();
    event.merged_groups.clear();
    for (const auto& g : origin) {
      if (g.size() > 1) event.merged_groups.push_back(g);
    }
    event.new_heights = heights;
    last_event_time = t_collision;

    z.t = t_collision;
    z.y = std::move(heights);
    jumps = std::move(cur_jumps);
    lengths = std::move(cur_lengths);

    if (jumps.empty()) {
      traj.final_constant = mean0;
      traj.t_end = std::max(t_collision, t_end);
      return traj;
    }
    if (traj.collisions.size() >= opts.max_collisions) {
      // Keep going only long enough to absorb a burst into the last event.
      horizon = std::min(t_end, t_collision + opts.simultaneity_tol);
      if (horizon <= z.t) horizon = z.t;
    }
    if (z.t >= horizon) {
      LimitSegment tail;
      tail.t_start = tail.t_end = z.t;
      tail.jumps = JumpSet(jumps);
      tail.times = {z.t};
      tail.heights = {z.y};
      PlateauSystem tail_sys(lengths, gap_signs(z.y));
      std::vector<double> tail_rate(z.y.size());
      tail_sys.rates(z.y, tail_rate);
      tail.rates = {tail_rate};
      traj.segments.push_back(std::move(tail));
      traj.t_end = z.t;
      return traj;
    }
    h = 1e-3;
  }
}

double lifespan_upper_bound(const PlateauFunction& p0) {
  double s = 0.0;
  for (double j : p0.jump_heights()) s += std::abs(j);
  return p0.linf() * s / 2.0;
}

double limit_lifespan(const PlateauFunction& p0, const LimitOptions& opts) {
  if (p0.jump_count() == 0) throw DomainError("lifespan of a constant datum is undefined");
  LimitOptions o = opts;
  o.max_collisions = 1;
  const auto traj = integrate_limit(p0, 2.0 * lifespan_upper_bound(p0) + 1.0, o);
  if (traj.collisions.empty()) throw NumericalAbort("no collision before the lifespan bound", traj.t_end);
  return traj.collisions.front().time;
}

}  // namespace pmslow
