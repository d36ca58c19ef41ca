#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace contactdyn {

using Point = std::vector<double>;

/// Piecewise-linear path y(s) through nodes at increasing label times s.
struct BasePath {
  std::vector<Point> nodes;
  std::vector<double> s;

  [[nodiscard]] std::size_t n() const { return nodes.empty() ? 0 : nodes.front().size(); }
  [[nodiscard]] bool closed(double tol = 0.0) const;
  /// Finite nodes, consistent dimension, increasing s, no repeated consecutive nodes.
  void validate() const;
};

/// Straight line a -> b split into `segments` equal pieces, s in [s0, s0 + 1].
BasePath segment_path(const Point& a, const Point& b, std::size_t segments, double s0 = 0.0);
/// Polyline through the corners, each leg split into `segments` pieces.
BasePath polyline(const std::vector<Point>& corners, std::size_t segments);
/// b appended after a; a's last node must equal b's first.
BasePath concatenate(const BasePath& a, const BasePath& b);
BasePath reversed(const BasePath& p);

/// Covector field wp_i(y).
struct FluxField {
  std::size_t n = 1;
  std::function<Point(const Point&)> wp;
  bool exact_hint = false;
};

struct TransportResult {
  double delta_p = 0.0;
  std::vector<double> increments;
  std::string quadrature = "midpoint";
};

/// Delta P = integral of wp_i dy^i, midpoint rule per segment.
TransportResult transport(const FluxField& f, const BasePath& path);

/// Closed-loop integral; throws ContractViolation when the path is open.
double loop_holonomy(const FluxField& f, const BasePath& loop);

struct PathDependence {
  double via_b = 0.0;
  double via_b_prime = 0.0;
  double difference = 0.0;  ///< via_b - via_b_prime
  double loop = 0.0;        ///< A -> B -> C -> B' -> A
};

PathDependence path_dependence_experiment(const FluxField& f, const Point& a, const Point& b, const Point& b_prime,
                                          const Point& c, std::size_t segments);

/// max_k |Delta P_k - wp(mid_k) . Delta y_k| over segments.
double horizontal_residual(const FluxField& f, const BasePath& path, const std::vector<double>& p_series);

/// Integral of d(wp) = (d wp_2/dy1 - d wp_1/dy2) dy1 ^ dy2 over a planar
/// polygon (fan-triangulated from the first corner, each triangle refined
/// `refine`^2 times, centroid rule; curl by central differences).
double curl_surface_integral(const FluxField& f, const std::vector<Point>& polygon, std::size_t refine = 64,
                             double fd_step = 1e-5);

/// Columns s,y1..yn,dP_cum.
void write_transport_csv(std::ostream& os, const BasePath& path, const TransportResult& r);

}  // namespace contactdyn
