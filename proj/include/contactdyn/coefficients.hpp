#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "contactdyn/multi_index.hpp"

namespace contactdyn {

/// literal: order-k term weighted (-1)^k/k!  (so D^(1,1) multiplies d^2/2)
/// standard: order-k term weighted (-1)^k    (net Kramers-Moyal coefficients)
enum class Normalization { literal, standard };

double order_sign(Normalization norm, std::size_t k);
std::string to_string(Normalization norm);
Normalization parse_normalization(const std::string& s);

/// Coefficients D^alpha, stored on sorted multi-indices so permutation
/// symmetry holds by construction.
struct CoefficientSet {
  std::size_t n = 1;
  Normalization normalization = Normalization::standard;
  std::map<MultiIndex, double> entries;
  /// Jackknife standard errors when estimated from data; empty otherwise.
  std::map<MultiIndex, double> standard_error;

  void set(const MultiIndex& a, double v);
  [[nodiscard]] double get(const MultiIndex& a) const;
  [[nodiscard]] std::size_t order() const;
};

/// B_i^alpha: covector coefficients of wp_i = sum_alpha B_i^alpha d_alpha P + C_i.
struct BCoefficients {
  std::size_t n = 1;
  std::map<std::pair<MultiIndex, std::size_t>, double> entries;
  std::map<std::pair<MultiIndex, std::size_t>, double> standard_error;
  /// Integration constant C_i; zero for dissipative systems.
  std::vector<double> constant;

  void set(const MultiIndex& a, std::size_t i, double v);
  [[nodiscard]] double get(const MultiIndex& a, std::size_t i) const;
  [[nodiscard]] std::size_t order() const;
};

}  // namespace contactdyn
