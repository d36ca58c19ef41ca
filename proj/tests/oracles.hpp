#pragma once

// Closed forms and small helpers shared by the tests. Nothing here calls
// into the library's numerics.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "contactdyn/phase_point.hpp"

namespace oracle {

inline double gaussian(double y, double mean, double var) {
  return std::exp(-0.5 * (y - mean) * (y - mean) / var) / std::sqrt(2.0 * M_PI * var);
}
inline double gaussian_d1(double y, double mean, double var) { return -(y - mean) / var * gaussian(y, mean, var); }
inline double gaussian_d2(double y, double mean, double var) {
  const double z = (y - mean) / var;
  return (z * z - 1.0 / var) * gaussian(y, mean, var);
}

inline contactdyn::PhasePoint random_point(std::mt19937_64& rng, std::size_t n, double half_width = 1.0) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  contactdyn::PhasePoint p;
  p.t = u(rng);
  for (std::size_t i = 0; i < n; ++i) p.y.push_back(u(rng));
  for (std::size_t i = 0; i < n; ++i) p.wp.push_back(u(rng));
  return p;
}

inline double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace oracle
