#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "contactdyn/forms.hpp"
#include "contactdyn/hamiltonian.hpp"
#include "contactdyn/phase_point.hpp"

namespace contactdyn {

/// {F,G} = sum_i (dF/dy^i dG/dwp_i - dF/dwp_i dG/dy^i).
double poisson_bracket(const Hamiltonian& f, const Hamiltonian& g, const PhasePoint& p);

/// X_H = (1, dH/dwp_i, -dH/dy^i).
forms::TangentVector contact_vector_field(const Hamiltonian& h, const PhasePoint& p);

struct Trajectory {
  std::vector<PhasePoint> nodes;
  double step = 0.0;
  std::string meta;
  bool diverged = false;
  /// Index of the step that produced a non-finite state (valid when diverged).
  std::size_t divergence_step = 0;
};

/// Classical RK4 with fixed step h. A non-finite stage stops the run; the
/// trajectory keeps every finite node and sets `diverged`.
Trajectory integrate(const Hamiltonian& h, const PhasePoint& p0, double step, std::size_t steps,
                     std::string meta = {});

struct ConstraintSeries {
  std::vector<double> values;
  double drift = 0.0;
};

/// eps(t_k) = wp_i dH/dwp_i - H at every node (on-shell velocity).
ConstraintSeries constraint_series(const Hamiltonian& h, const Trajectory& tr);

/// max_k |dF/dt - (dF/dt|explicit + {F,H})| with dF/dt by centered
/// differences along the trajectory (interior nodes only).
double conservation_check(const Hamiltonian& f, const Hamiltonian& h, const Trajectory& tr);

/// Header t,y1..yn,wp1..wpn,eps then one row per node.
void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const ConstraintSeries& eps);

}  // namespace contactdyn
