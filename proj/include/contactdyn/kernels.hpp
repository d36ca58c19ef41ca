#pragma once

// Hot loops with an OpenMP driver and a plain serial reference driver. Both
// drivers call the same per-item arithmetic, so their outputs agree bit for bit.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "contactdyn/coefficients.hpp"
#include "contactdyn/grid.hpp"
#include "contactdyn/multi_index.hpp"

namespace contactdyn::kernels {

/// Precomputed flux-form layout of the truncated generator on one grid.
struct GeneratorPlan {
  struct FluxTerm {
    double weight = 0.0;   ///< s_k * multiplicity * D^alpha * count_d(alpha) / k
    std::size_t q = 0;     ///< index into cell_derivs
    bool compact = false;  ///< face difference of q (true) or face average of q (false)
  };

  GridSpec spec;
  std::vector<MultiIndex> cell_derivs;
  std::vector<std::vector<FluxTerm>> flux;  ///< per axis
};

GeneratorPlan make_generator_plan(const CoefficientSet& d, const GridSpec& spec);

void generator_serial(const GeneratorPlan& plan, const std::vector<double>& p, std::vector<double>& out);
void generator_parallel(const GeneratorPlan& plan, const std::vector<double>& p, std::vector<double>& out);

/// Cell-centred central-difference derivative d_alpha p (|alpha| <= 4) with ghost cells per bc.
void derivative_serial(const GridSpec& spec, const MultiIndex& a, const std::vector<double>& p,
                       std::vector<double>& out);
void derivative_parallel(const GridSpec& spec, const MultiIndex& a, const std::vector<double>& p,
                         std::vector<double>& out);

/// Raw power sums of a multivariate ensemble about a fixed centre.
///
/// Values are laid out sample-major: x[s * dim + j]. For every sorted
/// multi-index of order 1..order over dim variables, sums[idx][t] holds
/// sum_s prod_{j in idx} (x_sj - centre_j). Samples are reduced in fixed
/// chunks, then the chunk partials are combined pairwise in a fixed tree.
struct PowerSums {
  std::vector<MultiIndex> index;
  std::vector<double> sums;  ///< one entry per index
};

inline constexpr std::size_t kChunk = 4096;

PowerSums power_sums_serial(const std::vector<double>& x, std::size_t samples, std::size_t dim,
                            const std::vector<double>& centre, std::size_t order);
PowerSums power_sums_parallel(const std::vector<double>& x, std::size_t samples, std::size_t dim,
                              const std::vector<double>& centre, std::size_t order);

}  // namespace contactdyn::kernels
