#pragma once

#include <cstddef>
#include <random>

#include "pmslow/grid.hpp"

namespace pmslow {

struct PsSample {
  GridFunction u;
  JumpSet jumps;
};

/// Random jump set with k points whose intervals are all at least
/// min_interval long.
JumpSet random_jump_set(std::mt19937_64& rng, std::size_t k, double min_interval);

/// Random element of PS_{D,n}: jump heights of magnitude in [0.3, 2] on the
/// jump cells and subcritical increments (|quotient| < 0.95) elsewhere.
/// Rejection-sampled until membership holds.
GridFunction random_piecewise_subcritical(std::mt19937_64& rng, std::size_t n, const JumpSet& jumps);

/// Random jump set (intervals >= max(3/n, 0.05)) and a datum in PS_{D,n}.
PsSample random_ps_sample(std::mt19937_64& rng, std::size_t n, std::size_t k);

/// sample_plateau(p, n) with one extra jump of height `height` at x inside
/// a plateau. The plateau mass is kept, so the datum converges to p.
GridFunction with_extra_jump(const PlateauFunction& p, std::size_t n, double x, double height);

/// Grid function close to p with the same discrete jump heights whose
/// discrete slope stays bounded: the flux g(D^{1/n} v) is interpolated
/// linearly between the jump cells, and the subcritical branch of g is
/// inverted off them.
GridFunction recovery_sequence(const PlateauFunction& p, std::size_t n);

}  // namespace pmslow
