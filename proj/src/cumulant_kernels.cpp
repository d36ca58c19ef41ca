#include <algorithm>

#include "contactdyn/error.hpp"
#include "contactdyn/kernels.hpp"

namespace contactdyn::kernels {

namespace {

// Partial sums over samples [begin, end) in sample order.
void chunk_sums(const std::vector<double>& x, std::size_t begin, std::size_t end, std::size_t dim,
                const std::vector<double>& centre, const std::vector<MultiIndex>& index, double* out) {
  std::vector<double> dev(dim);
  for (std::size_t s = begin; s < end; ++s) {
    for (std::size_t j = 0; j < dim; ++j) dev[j] = x[s * dim + j] - centre[j];
    for (std::size_t k = 0; k < index.size(); ++k) {
      double p = 1.0;
      for (auto j : index[k]) p *= dev[j];
      out[k] += p;
    }
  }
}

// Fixed binary tree over chunk partials: stride 1, 2, 4, ...
void tree_reduce(std::vector<double>& partial, std::size_t chunks, std::size_t width) {
  for (std::size_t stride = 1; stride < chunks; stride *= 2) {
    for (std::size_t c = 0; c + stride < chunks; c += 2 * stride) {
      for (std::size_t k = 0; k < width; ++k) partial[c * width + k] += partial[(c + stride) * width + k];
    }
  }
}

template <bool Parallel>
PowerSums power_sums_impl(const std::vector<double>& x, std::size_t samples, std::size_t dim,
                          const std::vector<double>& centre, std::size_t order) {
  if (x.size() != samples * dim) throw ContractViolation("power_sums: data size mismatch");
  if (centre.size() != dim) throw ContractViolation("power_sums: centre size mismatch");
  PowerSums r;
  r.index = multi_indices_up_to(dim, 1, order);
  const std::size_t width = r.index.size();
  const std::size_t chunks = std::max<std::size_t>(1, (samples + kChunk - 1) / kChunk);
  std::vector<double> partial(chunks * width, 0.0);
  const auto nchunks = static_cast<std::ptrdiff_t>(chunks);
  if (Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < nchunks; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      chunk_sums(x, cc * kChunk, std::min(samples, (cc + 1) * kChunk), dim, centre, r.index, &partial[cc * width]);
    }
  } else {
    for (std::ptrdiff_t c = 0; c < nchunks; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      chunk_sums(x, cc * kChunk, std::min(samples, (cc + 1) * kChunk), dim, centre, r.index, &partial[cc * width]);
    }
  }
  tree_reduce(partial, chunks, width);
  r.sums.assign(partial.begin(), partial.begin() + static_cast<std::ptrdiff_t>(width));
  return r;
}

}  // namespace

PowerSums power_sums_serial(const std::vector<double>& x, std::size_t samples, std::size_t dim,
                            const std::vector<double>& centre, std::size_t order) {
  return power_sums_impl<false>(x, samples, dim, centre, order);
}

PowerSums power_sums_parallel(const std::vector<double>& x, std::size_t samples, std::size_t dim,
                              const std::vector<double>& centre, std::size_t order) {
  return power_sums_impl<true>(x, samples, dim, centre, order);
}

}  // namespace contactdyn::kernels
