#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "contactdyn/dynamics.hpp"
#include "contactdyn/hamiltonian.hpp"
#include "contactdyn/phase_point.hpp"

namespace contactdyn {

/// Node sequence in extended phase space. Interior nodes carry the degrees of
/// freedom (y, wp, and t when `optimize_time` is set); endpoints stay put
/// when `fixed_endpoints` is set.
struct DiscretePath {
  std::vector<PhasePoint> nodes;
  bool fixed_endpoints = true;
  bool optimize_time = false;

  static DiscretePath from_trajectory(const Trajectory& tr);
  [[nodiscard]] std::size_t n() const { return nodes.empty() ? 0 : nodes.front().n(); }
  /// Unknowns per interior node: 2n, plus one with optimize_time.
  [[nodiscard]] std::size_t dofs_per_node() const { return 2 * n() + (optimize_time ? 1 : 0); }
  [[nodiscard]] std::size_t dofs() const;
  [[nodiscard]] std::vector<double> unknowns() const;
  void set_unknowns(const std::vector<double>& x);
  /// Euclidean norm of all node coordinates.
  [[nodiscard]] double norm() const;
  /// Strictly increasing t and consistent n; throws ContractViolation.
  void validate() const;
};

/// S = sum_k [wpbar_k . (y_{k+1} - y_k) - H(mid_k) (t_{k+1} - t_k)], mid_k the
/// coordinate midpoint of nodes k and k+1.
double action(const Hamiltonian& h, const DiscretePath& path);

struct ActionReport {
  double action = 0.0;
  double grad_norm = 0.0;
  std::vector<double> residuals;       ///< dS/d(unknowns), node-major
  std::vector<double> node_residuals;  ///< Euclidean norm per interior node
};

/// Analytic gradient of the discrete action over the interior unknowns.
ActionReport first_variation(const Hamiltonian& h, const DiscretePath& path);

/// Five-point central differences of action() with step `step` per unknown.
std::vector<double> finite_difference_gradient(const Hamiltonian& h, const DiscretePath& path, double step = 1e-3);

struct DescendOptions {
  std::size_t max_iterations = 500;
  double rate = 1.0;        ///< initial line-search step
  double tolerance = 1e-5;  ///< stop once grad_norm <= tolerance
  std::size_t max_backtracks = 40;
  double hessian_step = 1e-6;
};

struct DescendResult {
  DiscretePath path;
  std::size_t iterations = 0;
  std::size_t accepted_steps = 0;
  double grad_norm = 0.0;
  std::vector<double> objective;  ///< 0.5 * grad_norm^2 after each accepted step (first entry: start)
  bool converged = false;
  bool stalled = false;  ///< line search could not decrease the objective
};

/// Damped Gauss-Newton on 0.5 * |grad S|^2 with Armijo backtracking. The
/// Hessian of S comes from differences of the analytic gradient, three node
/// colours at a time, and is solved sparsely.
DescendResult descend(const Hamiltonian& h, const DiscretePath& init, const DescendOptions& options = {});

}  // namespace contactdyn
