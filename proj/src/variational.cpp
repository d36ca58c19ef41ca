#include "contactdyn/variational.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>

#include "contactdyn/error.hpp"

namespace contactdyn {

DiscretePath DiscretePath::from_trajectory(const Trajectory& tr) {
  DiscretePath p;
  p.nodes = tr.nodes;
  return p;
}

std::size_t DiscretePath::dofs() const {
  if (nodes.size() < 2) return 0;
  const std::size_t movable = fixed_endpoints ? nodes.size() - 2 : nodes.size();
  return movable * dofs_per_node();
}

namespace {

std::size_t first_movable(const DiscretePath& p) { return p.fixed_endpoints ? 1 : 0; }

}  // namespace

std::vector<double> DiscretePath::unknowns() const {
  std::vector<double> x;
  x.reserve(dofs());
  const std::size_t lo = first_movable(*this);
  const std::size_t hi = fixed_endpoints ? nodes.size() - 1 : nodes.size();
  for (std::size_t k = lo; k < hi; ++k) {
    x.insert(x.end(), nodes[k].y.begin(), nodes[k].y.end());
    x.insert(x.end(), nodes[k].wp.begin(), nodes[k].wp.end());
    if (optimize_time) x.push_back(nodes[k].t);
  }
  return x;
}

void DiscretePath::set_unknowns(const std::vector<double>& x) {
  if (x.size() != dofs()) throw ContractViolation("set_unknowns: wrong number of unknowns");
  const std::size_t lo = first_movable(*this);
  const std::size_t hi = fixed_endpoints ? nodes.size() - 1 : nodes.size();
  const std::size_t nn = n();
  std::size_t c = 0;
  for (std::size_t k = lo; k < hi; ++k) {
    for (std::size_t i = 0; i < nn; ++i) nodes[k].y[i] = x[c++];
    for (std::size_t i = 0; i < nn; ++i) nodes[k].wp[i] = x[c++];
    if (optimize_time) nodes[k].t = x[c++];
  }
}

double DiscretePath::norm() const {
  double s = 0.0;
  for (const auto& p : nodes)
    for (double v : p.coords()) s += v * v;
  return std::sqrt(s);
}

void DiscretePath::validate() const {
  if (nodes.size() < 2) throw ContractViolation("path needs at least 2 nodes");
  const std::size_t nn = n();
  if (nn < 1) throw ContractViolation("path nodes need n >= 1");
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].n() != nn) throw ContractViolation("path nodes disagree on n");
    if (k > 0 && !(nodes[k].t > nodes[k - 1].t)) throw ContractViolation("path times must increase strictly");
  }
}

namespace {

PhasePoint midpoint(const PhasePoint& a, const PhasePoint& b) {
  PhasePoint m = a;
  m.t = 0.5 * (a.t + b.t);
  for (std::size_t i = 0; i < a.n(); ++i) {
    m.y[i] = 0.5 * (a.y[i] + b.y[i]);
    m.wp[i] = 0.5 * (a.wp[i] + b.wp[i]);
  }
  return m;
}

double eval_at(const Hamiltonian& h, const PhasePoint& p, std::size_t node) {
  try {
    return evaluate(h, p);
  } catch (const EvaluationError& e) {
    throw EvaluationError(std::string(e.what()) + " (segment " + std::to_string(node) + ")");
  }
}

std::vector<double> grad_at(const Hamiltonian& h, const PhasePoint& p, std::size_t node) {
  try {
    return gradient(h, p);
  } catch (const EvaluationError& e) {
    throw EvaluationError(std::string(e.what()) + " (segment " + std::to_string(node) + ")");
  }
}

}  // namespace

double action(const Hamiltonian& h, const DiscretePath& path) {
  path.validate();
  const std::size_t nn = path.n();
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < path.nodes.size(); ++k) {
    const auto& a = path.nodes[k];
    const auto& b = path.nodes[k + 1];
    double work = 0.0;
    for (std::size_t i = 0; i < nn; ++i) work += 0.5 * (a.wp[i] + b.wp[i]) * (b.y[i] - a.y[i]);
    s += work - eval_at(h, midpoint(a, b), k) * (b.t - a.t);
  }
  return s;
}

ActionReport first_variation(const Hamiltonian& h, const DiscretePath& path) {
  path.validate();
  if (path.nodes.size() < 3) throw ContractViolation("first_variation needs at least 3 nodes");
  const std::size_t nn = path.n();
  const std::size_t segs = path.nodes.size() - 1;

  // per-segment midpoint data
  std::vector<double> hval(segs), dt(segs);
  std::vector<std::vector<double>> hg(segs);
  for (std::size_t k = 0; k < segs; ++k) {
    const PhasePoint m = midpoint(path.nodes[k], path.nodes[k + 1]);
    hval[k] = eval_at(h, m, k);
    hg[k] = grad_at(h, m, k);
    dt[k] = path.nodes[k + 1].t - path.nodes[k].t;
  }
  auto wpbar = [&](std::size_t k, std::size_t i) { return 0.5 * (path.nodes[k].wp[i] + path.nodes[k + 1].wp[i]); };
  auto dy = [&](std::size_t k, std::size_t i) { return path.nodes[k + 1].y[i] - path.nodes[k].y[i]; };

  ActionReport r;
  r.action = action(h, path);
  const std::size_t lo = first_movable(path);
  const std::size_t hi = path.fixed_endpoints ? path.nodes.size() - 1 : path.nodes.size();
  for (std::size_t j = lo; j < hi; ++j) {
    const bool has_left = j > 0, has_right = j < segs;
    double node_sq = 0.0;
    auto push = [&](double v) {
      r.residuals.push_back(v);
      node_sq += v * v;
    };
    for (std::size_t i = 0; i < nn; ++i) {
      double g = 0.0;
      if (has_left) g += wpbar(j - 1, i) - 0.5 * hg[j - 1][1 + i] * dt[j - 1];
      if (has_right) g += -wpbar(j, i) - 0.5 * hg[j][1 + i] * dt[j];
      push(g);
    }
    for (std::size_t i = 0; i < nn; ++i) {
      double g = 0.0;
      if (has_left) g += 0.5 * dy(j - 1, i) - 0.5 * hg[j - 1][1 + nn + i] * dt[j - 1];
      if (has_right) g += 0.5 * dy(j, i) - 0.5 * hg[j][1 + nn + i] * dt[j];
      push(g);
    }
    if (path.optimize_time) {
      double g = 0.0;
      if (has_left) g += -0.5 * hg[j - 1][0] * dt[j - 1] - hval[j - 1];
      if (has_right) g += -0.5 * hg[j][0] * dt[j] + hval[j];
      push(g);
    }
    r.node_residuals.push_back(std::sqrt(node_sq));
  }
  double sq = 0.0;
  for (double v : r.residuals) sq += v * v;
  r.grad_norm = std::sqrt(sq);
  return r;
}

std::vector<double> finite_difference_gradient(const Hamiltonian& h, const DiscretePath& path, double step) {
  if (!(step > 0.0)) throw ContractViolation("finite-difference step must be positive");
  DiscretePath p = path;
  const auto x0 = path.unknowns();
  std::vector<double> g(x0.size());
  auto x = x0;
  for (std::size_t k = 0; k < x0.size(); ++k) {
    auto at = [&](double off) {
      x[k] = x0[k] + off;
      p.set_unknowns(x);
      return action(h, p);
    };
    const double f2 = at(2 * step), f1 = at(step), m1 = at(-step), m2 = at(-2 * step);
    x[k] = x0[k];
    g[k] = (-f2 + 8.0 * f1 - 8.0 * m1 + m2) / (12.0 * step);
  }
  return g;
}

namespace {

// Hessian of S by central differences of the analytic gradient; unknowns at
// nodes three apart never share a residual row, so they are probed together.
Eigen::SparseMatrix<double> action_hessian(const Hamiltonian& h, const DiscretePath& path, double step) {
  const std::size_t dpn = path.dofs_per_node();
  const std::size_t nodes = path.dofs() / dpn;
  const auto x0 = path.unknowns();
  const auto dim = static_cast<Eigen::Index>(x0.size());
  std::vector<Eigen::Triplet<double>> trip;
  DiscretePath p = path;
  for (std::size_t colour = 0; colour < 3; ++colour) {
    for (std::size_t d = 0; d < dpn; ++d) {
      auto x = x0;
      for (std::size_t q = colour; q < nodes; q += 3) x[q * dpn + d] += step;
      p.set_unknowns(x);
      const auto gp = first_variation(h, p).residuals;
      x = x0;
      for (std::size_t q = colour; q < nodes; q += 3) x[q * dpn + d] -= step;
      p.set_unknowns(x);
      const auto gm = first_variation(h, p).residuals;
      for (std::size_t row_node = 0; row_node < nodes; ++row_node) {
        // the probed node within reach of row_node
        std::size_t q = nodes;
        for (std::size_t cand = (row_node > 0 ? row_node - 1 : 0); cand <= row_node + 1 && cand < nodes; ++cand)
          if (cand % 3 == colour) q = cand;
        if (q == nodes) continue;
        for (std::size_t e = 0; e < dpn; ++e) {
          const std::size_t row = row_node * dpn + e;
          const double v = (gp[row] - gm[row]) / (2.0 * step);
          if (v != 0.0) trip.emplace_back(static_cast<int>(row), static_cast<int>(q * dpn + d), v);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> hess(dim, dim);
  hess.setFromTriplets(trip.begin(), trip.end());
  return hess;
}

bool times_increase(const DiscretePath& p) {
  for (std::size_t k = 1; k < p.nodes.size(); ++k)
    if (!(p.nodes[k].t > p.nodes[k - 1].t)) return false;
  return true;
}

double half_sq(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return 0.5 * s;
}

}  // namespace

DescendResult descend(const Hamiltonian& h, const DiscretePath& init, const DescendOptions& options) {
  if (!(options.rate > 0.0)) throw ContractViolation("descend: rate must be positive");
  if (!init.fixed_endpoints) throw ContractViolation("descend: endpoints must be fixed");
  DescendResult out;
  out.path = init;
  auto rep = first_variation(h, out.path);
  out.grad_norm = rep.grad_norm;
  out.objective.push_back(half_sq(rep.residuals));
  double damping = 0.0;

  while (out.iterations < options.max_iterations) {
    if (out.grad_norm <= options.tolerance) {
      out.converged = true;
      break;
    }
    ++out.iterations;
    const auto jac = action_hessian(h, out.path, options.hessian_step);
    const auto dim = static_cast<Eigen::Index>(rep.residuals.size());
    Eigen::VectorXd r(dim);
    for (Eigen::Index i = 0; i < dim; ++i) r(i) = rep.residuals[static_cast<std::size_t>(i)];
    const Eigen::VectorXd g = jac.transpose() * r;
    Eigen::SparseMatrix<double> normal = jac.transpose() * jac;
    double scale = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) scale = std::max(scale, normal.coeff(i, i));
    if (damping == 0.0) damping = 1e-12 * std::max(scale, 1e-300);

    bool accepted = false;
    for (int attempt = 0; attempt < 8 && !accepted; ++attempt) {
      Eigen::SparseMatrix<double> a = normal;
      for (Eigen::Index i = 0; i < dim; ++i) a.coeffRef(i, i) += damping;
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
      if (solver.info() != Eigen::Success) {
        damping *= 100.0;
        continue;
      }
      const Eigen::VectorXd delta = solver.solve(-g);
      const double slope = g.dot(delta);
      const double f0 = out.objective.back();
      const auto x0 = out.path.unknowns();
      double alpha = options.rate;
      for (std::size_t bt = 0; bt <= options.max_backtracks; ++bt, alpha *= 0.5) {
        DiscretePath trial = out.path;
        auto x = x0;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += alpha * delta(static_cast<Eigen::Index>(i));
        trial.set_unknowns(x);
        if (trial.optimize_time && !times_increase(trial)) continue;
        ActionReport trep;
        try {
          trep = first_variation(h, trial);
        } catch (const EvaluationError&) {
          continue;
        }
        const double f = half_sq(trep.residuals);
        if (std::isfinite(f) && f <= f0 + 1e-4 * alpha * slope && f <= f0) {
          out.path = std::move(trial);
          rep = std::move(trep);
          out.grad_norm = rep.grad_norm;
          out.objective.push_back(f);
          ++out.accepted_steps;
          accepted = true;
          break;
        }
      }
      if (accepted) {
        damping = std::max(damping * 0.1, 1e-16 * std::max(scale, 1e-300));
      } else {
        damping *= 100.0;
      }
    }
    if (!accepted) {
      out.stalled = true;
      break;
    }
  }
  if (out.grad_norm <= options.tolerance) out.converged = true;
  return out;
}

}  // namespace contactdyn
