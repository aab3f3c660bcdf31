#pragma once

// Earth mover's (Wasserstein-1) distance between 1-D empirical distributions.

#include <algorithm>
#include <cmath>
#include <vector>

#include "xtalgen/core/error.hpp"

namespace xtalgen {

// W1 = integral |F_a - F_b| dx. With F_a = i/na and F_b = j/nb the integrand
// is |i nb - j na| / (na nb); the integer numerators are accumulated first and
// divided once at the end, so integer-valued inputs give the exact rational
// result rounded once.
inline double emd_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error("emd_1d requires non-empty samples");
  for (double x : a)
    if (!std::isfinite(x)) throw Error("emd_1d samples must be finite");
  for (double x : b)
    if (!std::isfinite(x)) throw Error("emd_1d samples must be finite");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double x = std::min(a[0], b[0]);
  double total = 0.0;
  while (i < a.size() || j < b.size()) {
    // Advance past every sample equal to x.
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    if (i == a.size() && j == b.size()) break;
    double next = i < a.size() ? a[i] : b[j];
    if (j < b.size()) next = std::min(next, b[j]);
    total += std::abs(static_cast<double>(i) * nb - static_cast<double>(j) * na) * (next - x);
    x = next;
  }
  return total / (na * nb);
}

}  // namespace xtalgen
