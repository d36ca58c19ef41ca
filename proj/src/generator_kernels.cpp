#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "contactdyn/error.hpp"
#include "contactdyn/kernels.hpp"

namespace contactdyn::kernels {

namespace {

// Central stencils on offsets -2..2, second order accurate.
constexpr std::array<std::array<double, 5>, 5> kStencil{{
    {0.0, 0.0, 1.0, 0.0, 0.0},
    {0.0, -0.5, 0.0, 0.5, 0.0},
    {0.0, 1.0, -2.0, 1.0, 0.0},
    {-0.5, 1.0, 0.0, -1.0, 0.5},
    {1.0, -4.0, 6.0, -4.0, 1.0},
}};

// Cell index along one axis after ghost mapping.
inline std::size_t wrap(std::ptrdiff_t i, std::size_t m, Boundary bc) {
  const auto mm = static_cast<std::ptrdiff_t>(m);
  if (bc == Boundary::periodic) return static_cast<std::size_t>(((i % mm) + mm) % mm);
  if (i < 0) return static_cast<std::size_t>(-i - 1);
  if (i >= mm) return static_cast<std::size_t>(2 * mm - i - 1);
  return static_cast<std::size_t>(i);
}

inline void split_cell(const GridSpec& s, std::size_t c, std::size_t (&ij)[2]) {
  if (s.n == 1) {
    ij[0] = c;
    ij[1] = 0;
  } else {
    ij[0] = c / s.m;
    ij[1] = c % s.m;
  }
}

inline std::size_t join_cell(const GridSpec& s, std::size_t i, std::size_t j) { return s.n == 1 ? i : i * s.m + j; }

double derivative_at(const GridSpec& s, const std::size_t (&ord)[2], const std::vector<double>& p, std::size_t c) {
  std::size_t ij[2];
  split_cell(s, c, ij);
  if (s.n == 1) {
    const auto& w = kStencil[ord[0]];
    double acc = 0.0;
    for (int o = -2; o <= 2; ++o) {
      const double wt = w[static_cast<std::size_t>(o + 2)];
      if (wt == 0.0) continue;
      acc += wt * p[wrap(static_cast<std::ptrdiff_t>(ij[0]) + o, s.m, s.bc)];
    }
    return acc / std::pow(s.spacing(0), static_cast<double>(ord[0]));
  }
  const auto& w0 = kStencil[ord[0]];
  const auto& w1 = kStencil[ord[1]];
  double acc = 0.0;
  for (int o0 = -2; o0 <= 2; ++o0) {
    const double a = w0[static_cast<std::size_t>(o0 + 2)];
    if (a == 0.0) continue;
    const std::size_t i = wrap(static_cast<std::ptrdiff_t>(ij[0]) + o0, s.m, s.bc);
    double row = 0.0;
    for (int o1 = -2; o1 <= 2; ++o1) {
      const double b = w1[static_cast<std::size_t>(o1 + 2)];
      if (b == 0.0) continue;
      row += b * p[join_cell(s, i, wrap(static_cast<std::ptrdiff_t>(ij[1]) + o1, s.m, s.bc))];
    }
    acc += a * row;
  }
  return acc / (std::pow(s.spacing(0), static_cast<double>(ord[0])) *
                std::pow(s.spacing(1), static_cast<double>(ord[1])));
}

void orders_of(const GridSpec& s, const MultiIndex& a, std::size_t (&ord)[2]) {
  ord[0] = ord[1] = 0;
  for (auto d : a) {
    if (d >= s.n) throw ContractViolation("derivative axis out of range");
    ++ord[d];
  }
  if (ord[0] > 4 || ord[1] > 4 || a.size() > 4) throw UnsupportedOrder("derivative order above 4");
}

// Neighbour of cell c one step along axis d; `edge` is set when the step
// crosses a reflecting wall.
inline std::size_t step_cell(const GridSpec& s, std::size_t c, std::size_t d, int dir, bool& edge) {
  std::size_t ij[2];
  split_cell(s, c, ij);
  const auto k = static_cast<std::ptrdiff_t>(ij[d]) + dir;
  edge = s.bc == Boundary::reflecting && (k < 0 || k >= static_cast<std::ptrdiff_t>(s.m));
  ij[d] = wrap(k, s.m, s.bc);
  return join_cell(s, ij[0], ij[1]);
}

// Flux through the face between c and its +d neighbour.
inline double face_flux(const GeneratorPlan& plan, const std::vector<std::vector<double>>& q, std::size_t d,
                        std::size_t c) {
  bool edge = false;
  const std::size_t r = step_cell(plan.spec, c, d, +1, edge);
  if (edge) return 0.0;
  const double h = plan.spec.spacing(d);
  double f = 0.0;
  for (const auto& term : plan.flux[d]) {
    const auto& v = q[term.q];
    const double face = term.compact ? (v[r] - v[c]) / h : 0.5 * (v[c] + v[r]);
    f += term.weight * face;
  }
  return f;
}

inline double divergence(const GeneratorPlan& plan, const std::vector<std::vector<double>>& flux, std::size_t c) {
  double acc = 0.0;
  for (std::size_t d = 0; d < plan.spec.n; ++d) {
    bool edge = false;
    const std::size_t l = step_cell(plan.spec, c, d, -1, edge);
    const double left = edge ? 0.0 : flux[d][l];
    acc += (flux[d][c] - left) / plan.spec.spacing(d);
  }
  return acc;
}

template <bool Parallel>
void derivative_impl(const GridSpec& spec, const MultiIndex& a, const std::vector<double>& p,
                     std::vector<double>& out) {
  std::size_t ord[2];
  orders_of(spec, a, ord);
  const auto cells = static_cast<std::ptrdiff_t>(spec.cells());
  if (p.size() != spec.cells()) throw ContractViolation("density size does not match grid");
  out.assign(spec.cells(), 0.0);
  if (Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < cells; ++c)
      out[static_cast<std::size_t>(c)] = derivative_at(spec, ord, p, static_cast<std::size_t>(c));
  } else {
    for (std::ptrdiff_t c = 0; c < cells; ++c)
      out[static_cast<std::size_t>(c)] = derivative_at(spec, ord, p, static_cast<std::size_t>(c));
  }
}

template <bool Parallel>
void generator_impl(const GeneratorPlan& plan, const std::vector<double>& p, std::vector<double>& out) {
  const GridSpec& s = plan.spec;
  if (p.size() != s.cells()) throw ContractViolation("density size does not match grid");
  const auto cells = static_cast<std::ptrdiff_t>(s.cells());

  std::vector<std::vector<double>> q(plan.cell_derivs.size());
  for (std::size_t k = 0; k < plan.cell_derivs.size(); ++k) {
    if (plan.cell_derivs[k].empty()) {
      q[k] = p;
    } else {
      derivative_impl<Parallel>(s, plan.cell_derivs[k], p, q[k]);
    }
  }

  std::vector<std::vector<double>> flux(s.n, std::vector<double>(s.cells(), 0.0));
  for (std::size_t d = 0; d < s.n; ++d) {
    if (plan.flux[d].empty()) continue;
    auto& fd = flux[d];
    if (Parallel) {
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t c = 0; c < cells; ++c)
        fd[static_cast<std::size_t>(c)] = face_flux(plan, q, d, static_cast<std::size_t>(c));
    } else {
      for (std::ptrdiff_t c = 0; c < cells; ++c)
        fd[static_cast<std::size_t>(c)] = face_flux(plan, q, d, static_cast<std::size_t>(c));
    }
  }

  out.assign(s.cells(), 0.0);
  if (Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < cells; ++c)
      out[static_cast<std::size_t>(c)] = divergence(plan, flux, static_cast<std::size_t>(c));
  } else {
    for (std::ptrdiff_t c = 0; c < cells; ++c)
      out[static_cast<std::size_t>(c)] = divergence(plan, flux, static_cast<std::size_t>(c));
  }
}

}  // namespace

GeneratorPlan make_generator_plan(const CoefficientSet& dset, const GridSpec& spec) {
  spec.validate();
  if (dset.n != spec.n) throw ContractViolation("coefficient set and grid disagree on dimension");
  GeneratorPlan plan;
  plan.spec = spec;
  plan.flux.assign(spec.n, {});
  std::vector<MultiIndex> needed;
  auto slot = [&](const MultiIndex& b) {
    auto it = std::find(needed.begin(), needed.end(), b);
    if (it != needed.end()) return static_cast<std::size_t>(it - needed.begin());
    needed.push_back(b);
    return needed.size() - 1;
  };
  for (const auto& [alpha, value] : dset.entries) {
    const std::size_t k = alpha.size();
    if (k > 4) throw UnsupportedOrder("generator order " + std::to_string(k) + " exceeds 4");
    if (value == 0.0) continue;
    const double base = order_sign(dset.normalization, k) * multiplicity(alpha) * value;
    for (std::size_t d = 0; d < spec.n; ++d) {
      const std::size_t cd = count_axis(alpha, d);
      if (cd == 0) continue;
      const MultiIndex beta = remove_one(alpha, d);
      GeneratorPlan::FluxTerm term;
      term.weight = base * static_cast<double>(cd) / static_cast<double>(k);
      term.compact = count_axis(beta, d) > 0;
      term.q = slot(term.compact ? remove_one(beta, d) : beta);
      plan.flux[d].push_back(term);
    }
  }
  plan.cell_derivs = std::move(needed);
  return plan;
}

void generator_serial(const GeneratorPlan& plan, const std::vector<double>& p, std::vector<double>& out) {
  generator_impl<false>(plan, p, out);
}

void generator_parallel(const GeneratorPlan& plan, const std::vector<double>& p, std::vector<double>& out) {
  generator_impl<true>(plan, p, out);
}

void derivative_serial(const GridSpec& spec, const MultiIndex& a, const std::vector<double>& p,
                       std::vector<double>& out) {
  derivative_impl<false>(spec, a, p, out);
}

void derivative_parallel(const GridSpec& spec, const MultiIndex& a, const std::vector<double>& p,
                         std::vector<double>& out) {
  derivative_impl<true>(spec, a, p, out);
}

}  // namespace contactdyn::kernels
