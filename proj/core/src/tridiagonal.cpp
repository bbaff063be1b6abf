#include "tridiagonal.hpp"

#include <cmath>

namespace pmslow::detail {

bool solve_tridiagonal(std::span<const double> lower, std::span<double> diag,
                       std::span<const double> upper, std::span<double> rhs) {
  const std::size_t n = diag.size();
  if (n == 0) return true;
  // Forward elimination; diag[i] becomes the pivot, upper is read-only so the
  // modified super-diagonal is folded into the pivots.
  for (std::size_t i = 1; i < n; ++i) {
    const double pivot = diag[i - 1];
    if (pivot == 0.0 || !std::isfinite(pivot)) return false;
    const double m = lower[i] / pivot;
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  if (diag[n - 1] == 0.0 || !std::isfinite(diag[n - 1])) return false;
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
  }
  return true;
}

}  // namespace pmslow::detail
