#pragma once

#include <algorithm>

namespace qfilter {

// One resolution rule governs every time discretization (propagation and
// quadrature): at least 64 samples per cycle of the fastest harmonic present,
// with a floor of 1024 steps per period.
inline int default_step_count(int max_harmonic) {
  return std::max(1024, 64 * std::max(0, max_harmonic));
}

// Composite midpoint rule on [0, length]. Exact (to rounding) for
// trigonometric polynomials of degree below `steps` over a full period.
template <class F>
auto midpoint_integral(F&& f, double length, int steps) {
  const double dt = length / steps;
  auto acc = f(0.5 * dt);
  for (int k = 1; k < steps; ++k) {
    acc += f((static_cast<double>(k) + 0.5) * dt);
  }
  acc *= dt;
  return acc;
}

}  // namespace qfilter
