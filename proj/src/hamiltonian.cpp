#include "contactdyn/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "contactdyn/error.hpp"

namespace contactdyn {

PhasePoint::PhasePoint(double t_, std::vector<double> y_, std::vector<double> wp_)
    : t(t_), y(std::move(y_)), wp(std::move(wp_)) {
  if (y.size() != wp.size()) {
    throw ContractViolation("PhasePoint: y and wp must have the same length");
  }
}

bool PhasePoint::finite() const noexcept {
  if (!std::isfinite(t)) return false;
  for (double v : y)
    if (!std::isfinite(v)) return false;
  for (double v : wp)
    if (!std::isfinite(v)) return false;
  return true;
}

std::vector<double> PhasePoint::coords() const {
  std::vector<double> c;
  c.reserve(dimension());
  c.push_back(t);
  c.insert(c.end(), y.begin(), y.end());
  c.insert(c.end(), wp.begin(), wp.end());
  return c;
}

double PhasePoint::coord(std::size_t index) const {
  if (index == 0) return t;
  if (index <= n()) return y[index - 1];
  if (index <= 2 * n()) return wp[index - 1 - n()];
  throw ContractViolation("PhasePoint::coord: index out of range");
}

void PhasePoint::set_coord(std::size_t index, double value) {
  if (index == 0) {
    t = value;
  } else if (index <= n()) {
    y[index - 1] = value;
  } else if (index <= 2 * n()) {
    wp[index - 1 - n()] = value;
  } else {
    throw ContractViolation("PhasePoint::set_coord: index out of range");
  }
}

PhasePoint PhasePoint::from_coords(std::span<const double> c) {
  if (c.empty() || c.size() % 2 == 0) {
    throw ContractViolation("PhasePoint::from_coords: need 2n+1 coordinates");
  }
  const std::size_t n = (c.size() - 1) / 2;
  PhasePoint p;
  p.t = c[0];
  p.y.assign(c.begin() + 1, c.begin() + 1 + static_cast<std::ptrdiff_t>(n));
  p.wp.assign(c.begin() + 1 + static_cast<std::ptrdiff_t>(n), c.end());
  return p;
}

double evaluate(const Hamiltonian& h, const PhasePoint& p) {
  if (!h.value) throw ContractViolation("Hamiltonian has no value function");
  const double v = h.value(p);
  if (!std::isfinite(v)) {
    throw EvaluationError("non-finite value of " + (h.name.empty() ? std::string("H") : h.name));
  }
  return v;
}

std::vector<double> fd_gradient(const Hamiltonian& h, const PhasePoint& p) {
  if (!(h.fd_step > 0.0)) throw ContractViolation("fd_step must be positive");
  const std::size_t dim = p.dimension();
  std::vector<double> g(dim);
  PhasePoint probe = p;
  for (std::size_t j = 0; j < dim; ++j) {
    const double x0 = p.coord(j);
    probe.set_coord(j, x0 + h.fd_step);
    const double fp = h.value(probe);
    probe.set_coord(j, x0 - h.fd_step);
    const double fm = h.value(probe);
    probe.set_coord(j, x0);
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw EvaluationError("gradient evaluation failed at coordinate " + std::to_string(j));
    }
    g[j] = (fp - fm) / (2.0 * h.fd_step);
  }
  return g;
}

std::vector<double> gradient(const Hamiltonian& h, const PhasePoint& p) {
  if (!h.grad) return fd_gradient(h, p);
  std::vector<double> g = h.grad(p);
  if (g.size() != p.dimension()) {
    throw ContractViolation("analytic gradient has wrong length");
  }
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (!std::isfinite(g[j])) {
      throw EvaluationError("gradient evaluation failed at coordinate " + std::to_string(j));
    }
  }
  return g;
}

GradientCheck check_gradient(const Hamiltonian& h, const PhasePoint& p, double rel_tol) {
  GradientCheck out;
  if (!h.grad) return out;
  const auto ga = gradient(h, p);
  const auto gf = fd_gradient(h, p);
  for (std::size_t j = 0; j < ga.size(); ++j) {
    const double scale = std::max({1.0, std::abs(ga[j]), std::abs(gf[j])});
    const double err = std::abs(ga[j] - gf[j]) / scale;
    if (err > out.max_relative_error) {
      out.max_relative_error = err;
      out.worst_coordinate = j;
    }
  }
  out.consistent = out.max_relative_error <= rel_tol;
  return out;
}

void require_consistent_gradient(const Hamiltonian& h, const PhasePoint& p, double rel_tol) {
  const auto c = check_gradient(h, p, rel_tol);
  if (!c.consistent) {
    throw ContractViolation("analytic gradient of " + h.name + " disagrees with finite differences at coordinate " +
                            std::to_string(c.worst_coordinate) + " (relative error " +
                            std::to_string(c.max_relative_error) + ")");
  }
}

Hamiltonian constraint_function(const Hamiltonian& h) {
  Hamiltonian eps;
  eps.name = "eps[" + h.name + "]";
  eps.fd_step = h.fd_step;
  eps.value = [h](const PhasePoint& p) {
    const auto g = gradient(h, p);
    const std::size_t n = p.n();
    double work = 0.0;
    for (std::size_t i = 0; i < n; ++i) work += p.wp[i] * g[1 + n + i];
    return work - evaluate(h, p);
  };
  return eps;
}

Hamiltonian make_function(Hamiltonian::ValueFn f, std::string name, double fd_step) {
  Hamiltonian h;
  h.value = std::move(f);
  h.name = std::move(name);
  h.fd_step = fd_step;
  return h;
}

Hamiltonian coordinate_function(std::size_t n, std::size_t index) {
  if (index > 2 * n) throw ContractViolation("coordinate_function: index out of range");
  Hamiltonian h;
  h.name = "x" + std::to_string(index);
  h.value = [index](const PhasePoint& p) { return p.coord(index); };
  h.grad = [index](const PhasePoint& p) {
    std::vector<double> g(p.dimension(), 0.0);
    g[index] = 1.0;
    return g;
  };
  return h;
}

}  // namespace contactdyn
