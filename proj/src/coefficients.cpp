#include "contactdyn/coefficients.hpp"

#include <algorithm>

#include "contactdyn/error.hpp"

namespace contactdyn {

double order_sign(Normalization norm, std::size_t k) {
  const double s = (k % 2 == 0) ? 1.0 : -1.0;
  return norm == Normalization::literal ? s / factorial(k) : s;
}

std::string to_string(Normalization norm) {
  return norm == Normalization::literal ? "literal" : "standard";
}

Normalization parse_normalization(const std::string& s) {
  if (s == "literal") return Normalization::literal;
  if (s == "standard") return Normalization::standard;
  throw Rejected("normalization must be 'literal' or 'standard', got '" + s + "'");
}

void CoefficientSet::set(const MultiIndex& a, double v) {
  if (a.empty()) throw ContractViolation("coefficient multi-index must have order >= 1");
  for (auto d : a)
    if (d >= n) throw ContractViolation("coefficient axis out of range");
  entries[canonical(a)] = v;
}

double CoefficientSet::get(const MultiIndex& a) const {
  auto it = entries.find(canonical(a));
  return it == entries.end() ? 0.0 : it->second;
}

std::size_t CoefficientSet::order() const {
  std::size_t k = 0;
  for (const auto& [a, v] : entries) k = std::max(k, a.size());
  return k;
}

void BCoefficients::set(const MultiIndex& a, std::size_t i, double v) {
  if (a.empty()) throw ContractViolation("B multi-index must have order >= 1");
  if (i >= n) throw ContractViolation("B lower index out of range");
  for (auto d : a)
    if (d >= n) throw ContractViolation("B axis out of range");
  entries[{canonical(a), i}] = v;
}

double BCoefficients::get(const MultiIndex& a, std::size_t i) const {
  auto it = entries.find({canonical(a), i});
  return it == entries.end() ? 0.0 : it->second;
}

std::size_t BCoefficients::order() const {
  std::size_t k = 0;
  for (const auto& [key, v] : entries) k = std::max(k, key.first.size());
  return k;
}

}  // namespace contactdyn
