#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace contactdyn {

/// A point (t, y, wp) of the extended phase space, dimension 2n+1.
///
/// Coordinates are flattened in the fixed order (t, y1..yn, wp1..wpn); that
/// order is shared by forms, tangent vectors and gradients.
struct PhasePoint {
  double t = 0.0;
  std::vector<double> y;
  std::vector<double> wp;

  PhasePoint() = default;
  PhasePoint(double t_, std::vector<double> y_, std::vector<double> wp_);

  [[nodiscard]] std::size_t n() const noexcept { return y.size(); }
  [[nodiscard]] std::size_t dimension() const noexcept { return 2 * y.size() + 1; }
  [[nodiscard]] bool finite() const noexcept;

  [[nodiscard]] std::vector<double> coords() const;
  [[nodiscard]] double coord(std::size_t index) const;
  void set_coord(std::size_t index, double value);

  static PhasePoint from_coords(std::span<const double> c);
};

}  // namespace contactdyn
