#include "contactdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "contactdyn/error.hpp"
#include "contactdyn/io.hpp"

namespace contactdyn {

double poisson_bracket(const Hamiltonian& f, const Hamiltonian& g, const PhasePoint& p) {
  const auto gf = gradient(f, p);
  const auto gg = gradient(g, p);
  const std::size_t n = p.n();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double fy = gf[1 + i], fw = gf[1 + n + i];
    const double gy = gg[1 + i], gw = gg[1 + n + i];
    // written as a difference of two products so {F,G} == -{G,F} bit for bit
    s += fy * gw - fw * gy;
  }
  return s;
}

forms::TangentVector contact_vector_field(const Hamiltonian& h, const PhasePoint& p) {
  const auto g = gradient(h, p);
  const std::size_t n = p.n();
  forms::TangentVector x;
  x.components.assign(p.dimension(), 0.0);
  x.components[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    x.components[1 + i] = g[1 + n + i];
    x.components[1 + n + i] = -g[1 + i];
  }
  return x;
}

namespace {

// Right-hand side in flattened coords; returns false on a non-finite value.
bool rhs(const Hamiltonian& h, const PhasePoint& p, std::vector<double>& out) {
  std::vector<double> g;
  try {
    g = gradient(h, p);
  } catch (const EvaluationError&) {
    return false;
  }
  const std::size_t n = p.n();
  out.assign(p.dimension(), 0.0);
  out[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[1 + i] = g[1 + n + i];
    out[1 + n + i] = -g[1 + i];
  }
  return std::all_of(out.begin(), out.end(), [](double v) { return std::isfinite(v); });
}

PhasePoint shifted(const std::vector<double>& base, const std::vector<double>& k, double a) {
  std::vector<double> c(base.size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = base[j] + a * k[j];
  return PhasePoint::from_coords(c);
}

}  // namespace

Trajectory integrate(const Hamiltonian& h, const PhasePoint& p0, double step, std::size_t steps,
                     std::string meta) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ContractViolation("integrate: step must be positive");
  if (steps < 1) throw ContractViolation("integrate: need at least one step");
  if (p0.n() < 1) throw ContractViolation("integrate: n must be >= 1");
  if (!p0.finite()) throw ContractViolation("integrate: initial point is not finite");
  if (h.has_analytic_gradient()) require_consistent_gradient(h, p0);

  Trajectory tr;
  tr.step = step;
  tr.meta = std::move(meta);
  tr.nodes.reserve(steps + 1);
  tr.nodes.push_back(p0);

  const double t0 = p0.t;
  std::vector<double> k1, k2, k3, k4;
  for (std::size_t s = 0; s < steps; ++s) {
    const PhasePoint& p = tr.nodes.back();
    const auto x = p.coords();
    bool ok = rhs(h, p, k1);
    ok = ok && rhs(h, shifted(x, k1, 0.5 * step), k2);
    ok = ok && rhs(h, shifted(x, k2, 0.5 * step), k3);
    ok = ok && rhs(h, shifted(x, k3, step), k4);
    std::vector<double> next(x.size());
    if (ok) {
      for (std::size_t j = 0; j < x.size(); ++j) {
        next[j] = x[j] + step / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      }
      // t from the step count, not accumulated, keeps the spacing uniform
      next[0] = t0 + static_cast<double>(s + 1) * step;
      ok = std::all_of(next.begin(), next.end(), [](double v) { return std::isfinite(v); });
    }
    if (!ok) {
      tr.diverged = true;
      tr.divergence_step = s;
      break;
    }
    tr.nodes.push_back(PhasePoint::from_coords(next));
  }
  return tr;
}

ConstraintSeries constraint_series(const Hamiltonian& h, const Trajectory& tr) {
  ConstraintSeries cs;
  cs.values.reserve(tr.nodes.size());
  const Hamiltonian eps = constraint_function(h);
  for (const auto& p : tr.nodes) cs.values.push_back(evaluate(eps, p));
  for (double v : cs.values) cs.drift = std::max(cs.drift, std::abs(v - cs.values.front()));
  return cs;
}

double conservation_check(const Hamiltonian& f, const Hamiltonian& h, const Trajectory& tr) {
  if (tr.nodes.size() < 3) throw ContractViolation("conservation_check: need at least 3 nodes");
  std::vector<double> fv(tr.nodes.size());
  for (std::size_t k = 0; k < tr.nodes.size(); ++k) fv[k] = evaluate(f, tr.nodes[k]);
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < tr.nodes.size(); ++k) {
    const double dt = tr.nodes[k + 1].t - tr.nodes[k - 1].t;
    const double lhs = (fv[k + 1] - fv[k - 1]) / dt;
    const double ft = gradient(f, tr.nodes[k])[0];
    const double r = lhs - (ft + poisson_bracket(f, h, tr.nodes[k]));
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const ConstraintSeries& eps) {
  const std::size_t n = tr.nodes.empty() ? 0 : tr.nodes.front().n();
  if (eps.values.size() != tr.nodes.size()) throw ContractViolation("constraint series length mismatch");
  std::vector<std::string> header{"t"};
  for (std::size_t i = 1; i <= n; ++i) header.push_back("y" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) header.push_back("wp" + std::to_string(i));
  header.push_back("eps");
  io::CsvWriter w(os, header);
  for (std::size_t k = 0; k < tr.nodes.size(); ++k) {
    auto row = tr.nodes[k].coords();
    row.push_back(eps.values[k]);
    w.row(row);
  }
}

}  // namespace contactdyn
