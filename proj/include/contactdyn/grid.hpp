#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "contactdyn/multi_index.hpp"

namespace contactdyn {

enum class Boundary { periodic, reflecting };

std::string to_string(Boundary bc);
Boundary parse_boundary(const std::string& s);

/// Cell-centred regular grid: m cells per axis on [lo, hi), spacing (hi-lo)/m,
/// centres lo + (i + 1/2) * spacing. Flat index is row-major with axis 0 slowest.
struct GridSpec {
  std::size_t n = 1;
  std::vector<double> lo{0.0};
  std::vector<double> hi{1.0};
  std::size_t m = 64;
  Boundary bc = Boundary::periodic;

  [[nodiscard]] double spacing(std::size_t axis) const;
  [[nodiscard]] double centre(std::size_t axis, std::size_t i) const;
  [[nodiscard]] std::size_t cells() const;
  [[nodiscard]] double cell_volume() const;
  /// Throws ContractViolation on inconsistent shapes; n must be 1 or 2.
  void validate() const;

  static GridSpec line(double lo, double hi, std::size_t m, Boundary bc);
  static GridSpec square(double lo0, double hi0, double lo1, double hi1, std::size_t m, Boundary bc);
};

struct GridDensity {
  GridSpec spec;
  std::vector<double> values;

  GridDensity() = default;
  explicit GridDensity(GridSpec s);

  /// Samples f at cell centres; f receives a vector of n coordinates.
  static GridDensity from_function(GridSpec s, const std::function<double(const std::vector<double>&)>& f);

  [[nodiscard]] double mass() const;
  /// Scales to unit mass; throws Rejected when the mass is not positive.
  void normalize();
  [[nodiscard]] double mean(std::size_t axis) const;
  [[nodiscard]] double variance(std::size_t axis) const;
  [[nodiscard]] double sup_norm() const;
};

/// Derivative grids d_alpha P for every sorted |alpha| <= K.
struct JetStack {
  std::size_t order = 0;
  GridSpec spec;
  std::map<MultiIndex, std::vector<double>> derivatives;

  [[nodiscard]] const std::vector<double>& get(const MultiIndex& a) const;
};

/// Columns y1[,y2],p.
void write_density_csv(std::ostream& os, const GridDensity& p);

}  // namespace contactdyn
