#pragma once

#include <cstddef>
#include <vector>

#include "contactdyn/coefficients.hpp"
#include "contactdyn/grid.hpp"

namespace contactdyn {

/// sum_{k=1..K} s_k sum_alpha D^alpha d_alpha P on the grid, in conservative
/// flux form so that periodic and reflecting grids both conserve mass.
std::vector<double> apply_generator(const CoefficientSet& d, const GridDensity& p);

/// Largest dt the explicit solver accepts: 0.25 * dy^2 / max_k(|s_k D_k| dy^(2-k)).
double max_stable_dt(const CoefficientSet& d, const GridSpec& spec);

struct EvolveOptions {
  double cfl = 0.25;
  bool clip_negative = true;
};

struct EvolveResult {
  GridDensity density;
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t clip_events = 0;    ///< steps in which any cell went negative
  double clipped_mass = 0.0;      ///< total negative mass removed before renormalising
  double max_mass_drift = 0.0;    ///< max |mass(t) - mass(0)| over steps
};

/// Explicit RK4 for dP/dt = L P. Throws Rejected (with the largest admissible
/// dt in the message) when dt exceeds the stability bound.
EvolveResult evolve(const CoefficientSet& d, const GridDensity& p0, double dt, std::size_t steps,
                    const EvolveOptions& options = {});

struct StationaryResult {
  GridDensity density;
  double residual = 0.0;  ///< ||L P||_inf / ||P||_inf
};

/// Zero-flux stationary density of the second-order operator with drift D1
/// and diffusion D2 (row-major n x n). n = 1 uses the exact discrete
/// solution; n = 2 a sparse LU solve with one row replaced by normalisation.
StationaryResult stationary_second_order(const std::vector<double>& d1, const std::vector<double>& d2,
                                         const GridSpec& spec,
                                         Normalization normalization = Normalization::standard);

/// Derivative grids for every sorted |alpha| <= K; K <= 4 and m >= 4K.
JetStack jet_prolong(const GridDensity& p, std::size_t order);

/// wp_i on the grid: sum_alpha B_i^alpha d_alpha P + C_i, one array per i.
std::vector<std::vector<double>> connection_flux(const BCoefficients& b, const JetStack& j);

/// The coefficient set for a second-order operator with drift d1 and diffusion d2.
CoefficientSet second_order_coefficients(const std::vector<double>& d1, const std::vector<double>& d2,
                                         Normalization normalization);

}  // namespace contactdyn
