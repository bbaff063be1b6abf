#pragma once

#include <span>

namespace pmslow::detail {

/// Solves a tridiagonal system in place with the Thomas algorithm.
///
/// lower[i] multiplies x[i-1] in row i (lower[0] unused), upper[i] multiplies
/// x[i+1] (upper[n-1] unused). `rhs` is overwritten with the solution and
/// `diag` is clobbered. Returns false on a zero or non-finite pivot.
bool solve_tridiagonal(std::span<const double> lower, std::span<double> diag,
                       std::span<const double> upper, std::span<double> rhs);

}  // namespace pmslow::detail
