#include "contactdyn/transport.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "contactdyn/error.hpp"
#include "contactdyn/io.hpp"

namespace contactdyn {

bool BasePath::closed(double tol) const {
  if (nodes.size() < 2) return false;
  const auto& a = nodes.front();
  const auto& b = nodes.back();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol) return false;
  return true;
}

void BasePath::validate() const {
  if (nodes.size() < 2) throw ContractViolation("path needs at least 2 nodes");
  if (s.size() != nodes.size()) throw ContractViolation("path needs one label time per node");
  const std::size_t dim = nodes.front().size();
  if (dim == 0) throw ContractViolation("path nodes must have at least one coordinate");
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].size() != dim) throw ContractViolation("path nodes disagree on dimension");
    for (double v : nodes[k])
      if (!std::isfinite(v)) throw ContractViolation("path node " + std::to_string(k) + " is not finite");
    if (k > 0) {
      if (!(s[k] > s[k - 1])) throw ContractViolation("label times must increase");
      if (nodes[k] == nodes[k - 1]) throw ContractViolation("consecutive path nodes coincide at " + std::to_string(k));
    }
  }
}

BasePath segment_path(const Point& a, const Point& b, std::size_t segments, double s0) {
  if (segments < 1) throw ContractViolation("segment_path: need at least one segment");
  if (a.size() != b.size()) throw ContractViolation("segment_path: endpoint dimensions differ");
  BasePath p;
  for (std::size_t k = 0; k <= segments; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(segments);
    Point y(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = k == segments ? b[i] : a[i] + u * (b[i] - a[i]);
    p.nodes.push_back(std::move(y));
    p.s.push_back(s0 + u);
  }
  return p;
}

BasePath polyline(const std::vector<Point>& corners, std::size_t segments) {
  if (corners.size() < 2) throw ContractViolation("polyline needs at least 2 corners");
  BasePath p = segment_path(corners[0], corners[1], segments, 0.0);
  for (std::size_t c = 2; c < corners.size(); ++c) {
    p = concatenate(p, segment_path(corners[c - 1], corners[c], segments, 0.0));
  }
  return p;
}

BasePath concatenate(const BasePath& a, const BasePath& b) {
  if (a.nodes.empty()) return b;
  if (b.nodes.empty()) return a;
  if (a.nodes.back() != b.nodes.front()) throw ContractViolation("concatenate: paths do not meet");
  BasePath out = a;
  const double shift = a.s.back() - b.s.front();
  for (std::size_t k = 1; k < b.nodes.size(); ++k) {
    out.nodes.push_back(b.nodes[k]);
    out.s.push_back(b.s[k] + shift);
  }
  return out;
}

BasePath reversed(const BasePath& p) {
  BasePath out;
  const std::size_t m = p.nodes.size();
  for (std::size_t k = 0; k < m; ++k) {
    out.nodes.push_back(p.nodes[m - 1 - k]);
    out.s.push_back(p.s.front() + (p.s.back() - p.s[m - 1 - k]));
  }
  return out;
}

namespace {

Point eval_wp(const FluxField& f, const Point& y, std::size_t segment) {
  if (!f.wp) throw ContractViolation("flux field has no evaluator");
  Point w;
  try {
    w = f.wp(y);
  } catch (const std::exception& e) {
    throw EvaluationError("flux evaluation failed on segment " + std::to_string(segment) + ": " + e.what());
  }
  if (w.size() != y.size()) throw ContractViolation("flux field returned the wrong number of components");
  for (double v : w)
    if (!std::isfinite(v)) throw EvaluationError("non-finite flux on segment " + std::to_string(segment));
  return w;
}

double segment_increment(const FluxField& f, const Point& a, const Point& b, std::size_t segment) {
  Point mid(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
  const Point w = eval_wp(f, mid, segment);
  double inc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) inc += w[i] * (b[i] - a[i]);
  return inc;
}

}  // namespace

TransportResult transport(const FluxField& f, const BasePath& path) {
  path.validate();
  if (path.n() != f.n) throw ContractViolation("path and flux field disagree on dimension");
  TransportResult r;
  r.increments.resize(path.nodes.size() - 1);
  for (std::size_t k = 0; k + 1 < path.nodes.size(); ++k) {
    r.increments[k] = segment_increment(f, path.nodes[k], path.nodes[k + 1], k);
  }
  for (double v : r.increments) r.delta_p += v;
  return r;
}

double loop_holonomy(const FluxField& f, const BasePath& loop) {
  if (!loop.closed()) throw ContractViolation("loop_holonomy: path is not closed");
  return transport(f, loop).delta_p;
}

PathDependence path_dependence_experiment(const FluxField& f, const Point& a, const Point& b, const Point& b_prime,
                                          const Point& c, std::size_t segments) {
  const BasePath p1 = polyline({a, b, c}, segments);
  const BasePath p2 = polyline({a, b_prime, c}, segments);
  PathDependence r;
  r.via_b = transport(f, p1).delta_p;
  r.via_b_prime = transport(f, p2).delta_p;
  r.difference = r.via_b - r.via_b_prime;
  r.loop = loop_holonomy(f, concatenate(p1, reversed(p2)));
  return r;
}

double horizontal_residual(const FluxField& f, const BasePath& path, const std::vector<double>& p_series) {
  path.validate();
  if (p_series.size() != path.nodes.size()) throw ContractViolation("P series length does not match the path");
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < path.nodes.size(); ++k) {
    const double inc = segment_increment(f, path.nodes[k], path.nodes[k + 1], k);
    worst = std::max(worst, std::abs((p_series[k + 1] - p_series[k]) - inc));
  }
  return worst;
}

double curl_surface_integral(const FluxField& f, const std::vector<Point>& polygon, std::size_t refine,
                             double fd_step) {
  if (f.n != 2) throw ContractViolation("surface integrals are planar (n = 2)");
  if (polygon.size() < 3) throw ContractViolation("polygon needs at least 3 corners");
  if (refine < 1) throw ContractViolation("refine must be >= 1");
  std::vector<Point> poly = polygon;
  if (poly.size() > 3 && poly.front() == poly.back()) poly.pop_back();

  auto curl = [&](double x, double y) {
    const double h = fd_step;
    const Point px = eval_wp(f, {x + h, y}, 0), mx = eval_wp(f, {x - h, y}, 0);
    const Point py = eval_wp(f, {x, y + h}, 0), my = eval_wp(f, {x, y - h}, 0);
    return (px[1] - mx[1]) / (2.0 * h) - (py[0] - my[0]) / (2.0 * h);
  };

  double total = 0.0;
  const auto r = static_cast<double>(refine);
  for (std::size_t t = 1; t + 1 < poly.size(); ++t) {
    const Point& a = poly[0];
    const Point& b = poly[t];
    const Point& c = poly[t + 1];
    const double ux = (b[0] - a[0]) / r, uy = (b[1] - a[1]) / r;
    const double vx = (c[0] - a[0]) / r, vy = (c[1] - a[1]) / r;
    const double area = 0.5 * (ux * vy - uy * vx);  // signed, so orientation carries through
    for (std::size_t i = 0; i < refine; ++i) {
      for (std::size_t j = 0; i + j < refine; ++j) {
        const auto di = static_cast<double>(i), dj = static_cast<double>(j);
        // upright sub-triangle
        total += area * curl(a[0] + (di + 1.0 / 3.0) * ux + (dj + 1.0 / 3.0) * vx,
                             a[1] + (di + 1.0 / 3.0) * uy + (dj + 1.0 / 3.0) * vy);
        if (i + j + 1 < refine) {
          total += area * curl(a[0] + (di + 2.0 / 3.0) * ux + (dj + 2.0 / 3.0) * vx,
                               a[1] + (di + 2.0 / 3.0) * uy + (dj + 2.0 / 3.0) * vy);
        }
      }
    }
  }
  return total;
}

void write_transport_csv(std::ostream& os, const BasePath& path, const TransportResult& r) {
  std::vector<std::string> header{"s"};
  for (std::size_t i = 1; i <= path.n(); ++i) header.push_back("y" + std::to_string(i));
  header.push_back("dP_cum");
  io::CsvWriter w(os, header);
  double cum = 0.0;
  for (std::size_t k = 0; k < path.nodes.size(); ++k) {
    if (k > 0) cum += r.increments[k - 1];
    std::vector<double> row{path.s[k]};
    row.insert(row.end(), path.nodes[k].begin(), path.nodes[k].end());
    row.push_back(cum);
    w.row(row);
  }
}

}  // namespace contactdyn
