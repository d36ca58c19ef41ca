#pragma once

#include <functional>
#include <string>
#include <vector>

#include "contactdyn/phase_point.hpp"

namespace contactdyn {

/// Scalar function on extended phase space with an optional analytic gradient.
///
/// The gradient, when supplied, returns 2n+1 components ordered
/// (d/dt, d/dy1..d/dyn, d/dwp1..d/dwpn). Without it, gradients are central
/// differences with step `fd_step` in every coordinate.
struct Hamiltonian {
  using ValueFn = std::function<double(const PhasePoint&)>;
  using GradFn = std::function<std::vector<double>(const PhasePoint&)>;

  ValueFn value;
  GradFn grad;
  double fd_step = 1e-5;
  std::string name;

  [[nodiscard]] bool has_analytic_gradient() const noexcept { return static_cast<bool>(grad); }
};

/// Evaluates H at p; throws EvaluationError on a non-finite result.
double evaluate(const Hamiltonian& h, const PhasePoint& p);

/// Central-difference gradient, regardless of any analytic gradient.
/// Throws EvaluationError naming the offending coordinate.
std::vector<double> fd_gradient(const Hamiltonian& h, const PhasePoint& p);

/// Analytic gradient when available, otherwise fd_gradient.
std::vector<double> gradient(const Hamiltonian& h, const PhasePoint& p);

/// Result of comparing an analytic gradient with central differences.
struct GradientCheck {
  bool consistent = true;
  double max_relative_error = 0.0;
  std::size_t worst_coordinate = 0;
};

/// Compares the analytic gradient against central differences at p with
/// relative tolerance `rel_tol` (scaled by max(1, |component|)). A
/// Hamiltonian without analytic gradient is trivially consistent.
GradientCheck check_gradient(const Hamiltonian& h, const PhasePoint& p, double rel_tol = 1e-4);

/// Throws ContractViolation when check_gradient fails.
void require_consistent_gradient(const Hamiltonian& h, const PhasePoint& p, double rel_tol = 1e-4);

/// The constraint function eps = wp_i dH/dwp_i - H, with dy/dt taken on-shell.
Hamiltonian constraint_function(const Hamiltonian& h);

/// Wraps a plain function of phase space (no analytic gradient).
Hamiltonian make_function(Hamiltonian::ValueFn f, std::string name = {}, double fd_step = 1e-5);

/// Coordinate function x_index (t is 0, y_i is i, wp_i is n+i) with exact gradient.
Hamiltonian coordinate_function(std::size_t n, std::size_t index);

}  // namespace contactdyn
