#include "contactdyn/kinetic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "contactdyn/error.hpp"
#include "contactdyn/io.hpp"
#include "contactdyn/kernels.hpp"

namespace contactdyn {

namespace {

void check_order(const CoefficientSet& d, const GridSpec& spec) {
  const std::size_t k = d.order();
  if (k > 4) throw UnsupportedOrder("truncation order " + std::to_string(k) + " exceeds 4");
  if (spec.m < 4 * k) {
    throw Rejected("grid too coarse: m = " + std::to_string(spec.m) + " < 4K = " + std::to_string(4 * k));
  }
}

// Spectral radius of the order-k flux stencil on unit spacing.
double stencil_radius(std::size_t k) {
  switch (k) {
    case 1: return 1.0;
    case 2: return 4.0;
    case 3: return 2.6;
    default: return 16.0;
  }
}

}  // namespace

std::vector<double> apply_generator(const CoefficientSet& d, const GridDensity& p) {
  check_order(d, p.spec);
  const auto plan = kernels::make_generator_plan(d, p.spec);
  std::vector<double> out;
  kernels::generator_parallel(plan, p.values, out);
  return out;
}

double max_stable_dt(const CoefficientSet& d, const GridSpec& spec) {
  double h = spec.spacing(0);
  for (std::size_t a = 1; a < spec.n; ++a) h = std::min(h, spec.spacing(a));
  std::vector<double> eff(5, 0.0);
  for (const auto& [alpha, v] : d.entries) {
    if (alpha.size() > 4) throw UnsupportedOrder("truncation order exceeds 4");
    eff[alpha.size()] += std::abs(order_sign(d.normalization, alpha.size())) * multiplicity(alpha) * std::abs(v);
  }
  double rate = 0.0;
  for (std::size_t k = 1; k <= 4; ++k) rate += eff[k] * stencil_radius(k) / std::pow(h, static_cast<double>(k));
  if (rate == 0.0) return std::numeric_limits<double>::infinity();
  // for pure diffusion this is exactly 0.25 h^2 / D
  return 0.25 * 4.0 / rate;
}

EvolveResult evolve(const CoefficientSet& d, const GridDensity& p0, double dt, std::size_t steps,
                    const EvolveOptions& options) {
  check_order(d, p0.spec);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractViolation("evolve: dt must be positive");
  const double limit = max_stable_dt(d, p0.spec) * (options.cfl / 0.25);
  if (dt > limit) {
    std::ostringstream msg;
    msg << "dt = " << io::format_double(dt) << " violates the stability bound; use dt <= "
        << io::format_double(limit);
    throw Rejected(msg.str());
  }
  const auto plan = kernels::make_generator_plan(d, p0.spec);

  EvolveResult r;
  r.density = p0;
  r.dt = dt;
  r.steps = steps;
  auto& p = r.density.values;
  const std::size_t cells = p.size();
  const double vol = p0.spec.cell_volume();
  const double mass0 = r.density.mass();
  std::vector<double> k1, k2, k3, k4, tmp(cells);

  for (std::size_t s = 0; s < steps; ++s) {
    kernels::generator_parallel(plan, p, k1);
    for (std::size_t c = 0; c < cells; ++c) tmp[c] = p[c] + 0.5 * dt * k1[c];
    kernels::generator_parallel(plan, tmp, k2);
    for (std::size_t c = 0; c < cells; ++c) tmp[c] = p[c] + 0.5 * dt * k2[c];
    kernels::generator_parallel(plan, tmp, k3);
    for (std::size_t c = 0; c < cells; ++c) tmp[c] = p[c] + dt * k3[c];
    kernels::generator_parallel(plan, tmp, k4);
    for (std::size_t c = 0; c < cells; ++c) p[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);

    if (options.clip_negative) {
      double neg = 0.0;
      for (double v : p)
        if (v < 0.0) neg += v;
      if (neg < 0.0) {
        const double before = r.density.mass();
        for (double& v : p) v = std::max(v, 0.0);
        const double after = r.density.mass();
        if (after > 0.0)
          for (double& v : p) v *= before / after;
        ++r.clip_events;
        r.clipped_mass += -neg * vol;
      }
    }
    for (double v : p) {
      if (!std::isfinite(v)) throw EvaluationError("density became non-finite at step " + std::to_string(s));
    }
    r.max_mass_drift = std::max(r.max_mass_drift, std::abs(r.density.mass() - mass0));
  }
  return r;
}

CoefficientSet second_order_coefficients(const std::vector<double>& d1, const std::vector<double>& d2,
                                         Normalization normalization) {
  const std::size_t n = d1.size();
  if (n < 1 || n > 2 || d2.size() != n * n) throw ContractViolation("drift/diffusion shapes must be n and n x n");
  CoefficientSet c;
  c.n = n;
  c.normalization = normalization;
  for (std::size_t i = 0; i < n; ++i) c.set({i}, d1[i]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) c.set({i, j}, d2[i * n + j]);
  return c;
}

namespace {

void check_spd(const std::vector<double>& d2, std::size_t n) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double a = d2[i * n + j];
      if (!std::isfinite(a)) throw Rejected("diffusion matrix has non-finite entries");
      if (std::abs(a - d2[j * n + i]) > 1e-12 * (1.0 + std::abs(a))) throw Rejected("diffusion matrix is not symmetric");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a;
    }
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw Rejected("diffusion matrix is not positive definite");
}

double residual_of(const CoefficientSet& c, const GridDensity& p) {
  const auto lp = apply_generator(c, p);
  double r = 0.0;
  for (double v : lp) r = std::max(r, std::abs(v));
  return r / p.sup_norm();
}

// Matrix of the generator on a reflecting grid, assembled by colour probing.
Eigen::SparseMatrix<double> assemble(const kernels::GeneratorPlan& plan) {
  const GridSpec& s = plan.spec;
  constexpr std::size_t stride = 5;  // reach of the second-order stencil is 2 cells per axis
  const std::size_t cells = s.cells();
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> probe(cells), resp;
  const std::size_t colours1 = s.n == 2 ? stride : 1;
  for (std::size_t c0 = 0; c0 < stride; ++c0) {
    for (std::size_t c1 = 0; c1 < colours1; ++c1) {
      for (std::size_t k = 0; k < cells; ++k) {
        const std::size_t i = s.n == 1 ? k : k / s.m;
        const std::size_t j = s.n == 1 ? 0 : k % s.m;
        probe[k] = (i % stride == c0 && j % stride == c1) ? 1.0 : 0.0;
      }
      kernels::generator_serial(plan, probe, resp);
      for (std::size_t row = 0; row < cells; ++row) {
        if (resp[row] == 0.0) continue;
        const std::size_t ri = s.n == 1 ? row : row / s.m;
        const std::size_t rj = s.n == 1 ? 0 : row % s.m;
        auto nearest = [&](std::size_t r, std::size_t colour) {
          const auto off = static_cast<std::ptrdiff_t>((colour + stride - r % stride) % stride);
          return static_cast<std::ptrdiff_t>(r) + (off > 2 ? off - static_cast<std::ptrdiff_t>(stride) : off);
        };
        const auto ci = nearest(ri, c0);
        const auto cj = s.n == 1 ? 0 : nearest(rj, c1);
        const auto m = static_cast<std::ptrdiff_t>(s.m);
        if (ci < 0 || ci >= m || cj < 0 || cj >= m) continue;
        const auto col = s.n == 1 ? static_cast<std::size_t>(ci) : static_cast<std::size_t>(ci * m + cj);
        trip.emplace_back(static_cast<int>(row), static_cast<int>(col), resp[row]);
      }
    }
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(cells), static_cast<Eigen::Index>(cells));
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

}  // namespace

StationaryResult stationary_second_order(const std::vector<double>& d1, const std::vector<double>& d2,
                                         const GridSpec& spec, Normalization normalization) {
  spec.validate();
  const std::size_t n = spec.n;
  if (d1.size() != n || d2.size() != n * n) throw ContractViolation("drift/diffusion shapes must match the grid");
  if (spec.bc != Boundary::reflecting) throw Rejected("stationary solve needs reflecting walls");
  check_spd(d2, n);
  const CoefficientSet coeffs = second_order_coefficients(d1, d2, normalization);
  check_order(coeffs, spec);

  StationaryResult r;
  r.density = GridDensity(spec);
  if (n == 1) {
    // zero flux through every face: a1 (P_i + P_{i+1}) / 2 + a2 (P_{i+1} - P_i) / h = 0
    const double h = spec.spacing(0);
    const double a1 = order_sign(normalization, 1) * d1[0];
    const double a2 = order_sign(normalization, 2) * d2[0];
    const double lo = a2 / h - 0.5 * a1, hi = a2 / h + 0.5 * a1;
    if (!(lo > 0.0) || !(hi > 0.0)) {
      throw Rejected("cell Peclet number >= 2; refine the grid for a monotone stationary profile");
    }
    const double log_ratio = std::log(lo) - std::log(hi);
    const double shift = log_ratio > 0.0 ? log_ratio * static_cast<double>(spec.m - 1) : 0.0;
    for (std::size_t i = 0; i < spec.m; ++i) {
      r.density.values[i] = std::exp(log_ratio * static_cast<double>(i) - shift);
    }
    r.density.normalize();
  } else {
    const auto plan = kernels::make_generator_plan(coeffs, spec);
    Eigen::SparseMatrix<double> a = assemble(plan);
    const auto cells = static_cast<Eigen::Index>(spec.cells());
    // columns of L sum to zero, so one equation is redundant; swap it for the mass constraint
    const Eigen::Index pin = cells / 2;
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index k = 0; k < a.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it)
        if (it.row() != pin) trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (Eigen::Index c = 0; c < cells; ++c) trip.emplace_back(static_cast<int>(pin), static_cast<int>(c), spec.cell_volume());
    Eigen::SparseMatrix<double> sys(cells, cells);
    sys.setFromTriplets(trip.begin(), trip.end());
    sys.makeCompressed();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(cells);
    rhs(pin) = 1.0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(sys);
    lu.factorize(sys);
    if (lu.info() != Eigen::Success) throw Rejected("stationary system is singular");
    const Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw Rejected("stationary solve failed");
    for (Eigen::Index c = 0; c < cells; ++c) r.density.values[static_cast<std::size_t>(c)] = x(c);
  }
  r.residual = residual_of(coeffs, r.density);
  return r;
}

JetStack jet_prolong(const GridDensity& p, std::size_t order) {
  if (order > 4) throw UnsupportedOrder("jet order " + std::to_string(order) + " exceeds 4");
  if (p.spec.m < 4 * order) {
    throw Rejected("grid too coarse for jet order " + std::to_string(order) + ": need m >= " +
                   std::to_string(4 * order));
  }
  JetStack j;
  j.order = order;
  j.spec = p.spec;
  for (const auto& a : multi_indices_up_to(p.spec.n, 0, order)) {
    std::vector<double> out;
    if (a.empty()) {
      out = p.values;
    } else {
      kernels::derivative_parallel(p.spec, a, p.values, out);
    }
    j.derivatives.emplace(a, std::move(out));
  }
  return j;
}

std::vector<std::vector<double>> connection_flux(const BCoefficients& b, const JetStack& j) {
  if (b.n != j.spec.n) throw Rejected("B coefficients and jet stack disagree on dimension");
  if (b.order() > j.order) {
    throw Rejected("B has order " + std::to_string(b.order()) + " but the jet stack stops at " +
                   std::to_string(j.order));
  }
  if (!b.constant.empty() && b.constant.size() != b.n) throw Rejected("constant covector has wrong length");
  const std::size_t cells = j.spec.cells();
  std::vector<std::vector<double>> wp(b.n, std::vector<double>(cells, 0.0));
  for (std::size_t i = 0; i < b.n; ++i) {
    const double c = b.constant.empty() ? 0.0 : b.constant[i];
    for (std::size_t k = 0; k < cells; ++k) wp[i][k] = c;
  }
  for (const auto& [key, v] : b.entries) {
    const auto& grid = j.get(key.first);
    auto& dst = wp[key.second];
    for (std::size_t k = 0; k < cells; ++k) dst[k] += v * grid[k];
  }
  return wp;
}

}  // namespace contactdyn
