#include "contactdyn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "contactdyn/error.hpp"
#include "contactdyn/io.hpp"

namespace contactdyn {

std::string to_string(Boundary bc) { return bc == Boundary::periodic ? "periodic" : "reflecting"; }

Boundary parse_boundary(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "reflecting") return Boundary::reflecting;
  throw Rejected("bc must be 'periodic' or 'reflecting', got '" + s + "'");
}

double GridSpec::spacing(std::size_t axis) const { return (hi[axis] - lo[axis]) / static_cast<double>(m); }

double GridSpec::centre(std::size_t axis, std::size_t i) const {
  return lo[axis] + (static_cast<double>(i) + 0.5) * spacing(axis);
}

std::size_t GridSpec::cells() const { return n == 1 ? m : m * m; }

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (std::size_t a = 0; a < n; ++a) v *= spacing(a);
  return v;
}

void GridSpec::validate() const {
  if (n < 1 || n > 2) throw ContractViolation("grid dimension must be 1 or 2");
  if (lo.size() != n || hi.size() != n) throw ContractViolation("grid extents must have one entry per axis");
  for (std::size_t a = 0; a < n; ++a) {
    if (!(hi[a] > lo[a]) || !std::isfinite(lo[a]) || !std::isfinite(hi[a])) {
      throw ContractViolation("grid extent must satisfy min < max");
    }
  }
  if (m < 2) throw ContractViolation("grid needs at least 2 cells per axis");
}

GridSpec GridSpec::line(double lo, double hi, std::size_t m, Boundary bc) {
  GridSpec s;
  s.n = 1;
  s.lo = {lo};
  s.hi = {hi};
  s.m = m;
  s.bc = bc;
  return s;
}

GridSpec GridSpec::square(double lo0, double hi0, double lo1, double hi1, std::size_t m, Boundary bc) {
  GridSpec s;
  s.n = 2;
  s.lo = {lo0, lo1};
  s.hi = {hi0, hi1};
  s.m = m;
  s.bc = bc;
  return s;
}

GridDensity::GridDensity(GridSpec s) : spec(std::move(s)) {
  spec.validate();
  values.assign(spec.cells(), 0.0);
}

GridDensity GridDensity::from_function(GridSpec s, const std::function<double(const std::vector<double>&)>& f) {
  GridDensity g(std::move(s));
  std::vector<double> y(g.spec.n);
  if (g.spec.n == 1) {
    for (std::size_t i = 0; i < g.spec.m; ++i) {
      y[0] = g.spec.centre(0, i);
      g.values[i] = f(y);
    }
  } else {
    for (std::size_t i = 0; i < g.spec.m; ++i) {
      for (std::size_t j = 0; j < g.spec.m; ++j) {
        y[0] = g.spec.centre(0, i);
        y[1] = g.spec.centre(1, j);
        g.values[i * g.spec.m + j] = f(y);
      }
    }
  }
  return g;
}

double GridDensity::mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * spec.cell_volume();
}

void GridDensity::normalize() {
  const double m = mass();
  if (!(m > 0.0) || !std::isfinite(m)) throw Rejected("density has non-positive mass");
  for (double& v : values) v /= m;
}

namespace {

double axis_coord(const GridSpec& s, std::size_t flat, std::size_t axis) {
  if (s.n == 1) return s.centre(0, flat);
  return axis == 0 ? s.centre(0, flat / s.m) : s.centre(1, flat % s.m);
}

}  // namespace

double GridDensity::mean(std::size_t axis) const {
  double s = 0.0, w = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    s += values[k] * axis_coord(spec, k, axis);
    w += values[k];
  }
  return s / w;
}

double GridDensity::variance(std::size_t axis) const {
  const double mu = mean(axis);
  double s = 0.0, w = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double d = axis_coord(spec, k, axis) - mu;
    s += values[k] * d * d;
    w += values[k];
  }
  return s / w;
}

double GridDensity::sup_norm() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

const std::vector<double>& JetStack::get(const MultiIndex& a) const {
  auto it = derivatives.find(canonical(a));
  if (it == derivatives.end()) throw ContractViolation("jet stack has no entry " + to_label(a));
  return it->second;
}

void write_density_csv(std::ostream& os, const GridDensity& p) {
  std::vector<std::string> header;
  for (std::size_t a = 0; a < p.spec.n; ++a) header.push_back("y" + std::to_string(a + 1));
  header.push_back("p");
  io::CsvWriter w(os, header);
  for (std::size_t k = 0; k < p.values.size(); ++k) {
    std::vector<double> row;
    for (std::size_t a = 0; a < p.spec.n; ++a) row.push_back(axis_coord(p.spec, k, a));
    row.push_back(p.values[k]);
    w.row(row);
  }
}

}  // namespace contactdyn
