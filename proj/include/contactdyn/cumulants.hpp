#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "contactdyn/coefficients.hpp"
#include "contactdyn/multi_index.hpp"

namespace contactdyn {

/// Increment law for S(t). Components are independent.
///   gaussian: dS = mu dt + sqrt(sigma2 dt) Z
///   poisson:  dS = jump * Poisson(lambda dt)
///   table:    samples are read from `table_path` (sample_id,t,S1..Sn)
struct IncrementModel {
  enum class Kind { gaussian, poisson, table };
  Kind kind = Kind::gaussian;
  std::size_t n = 1;
  std::vector<double> mu{0.0};
  std::vector<double> sigma2{1.0};
  double lambda = 1.0;
  std::vector<double> jump{1.0};
  std::string table_path;

  /// Throws Rejected on invalid parameters.
  void validate() const;
  [[nodiscard]] std::string label() const;
};

/// N realisations of S(t_j) on a shared grid, stored [sample][time][component].
struct PathEnsemble {
  std::size_t n = 1;
  std::vector<double> times;
  std::size_t samples = 0;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string model;

  [[nodiscard]] double at(std::size_t s, std::size_t j, std::size_t mu) const {
    return values[(s * times.size() + j) * n + mu];
  }
  double& at(std::size_t s, std::size_t j, std::size_t mu) { return values[(s * times.size() + j) * n + mu]; }
};

/// Uniform grid t_j = j * t_end / intervals, j = 0..intervals.
std::vector<double> uniform_times(double t_end, std::size_t intervals);

/// Sample s draws from its own stream keyed by (seed, s), so the ensemble
/// does not depend on the number of workers.
PathEnsemble sample_paths(const IncrementModel& model, std::size_t samples, const std::vector<double>& times,
                          std::uint64_t seed);

/// Ensemble from rows (sample_id, t, S1..Sn); every sample must share one grid.
PathEnsemble ensemble_from_csv(std::istream& is);
void write_ensemble_csv(std::ostream& os, const PathEnsemble& e);

/// Joint cumulants for every sorted multi-index of order 1..order at every
/// time, with jackknife errors, plus their least-squares time slopes.
struct CumulantTable {
  std::size_t n = 1;
  std::size_t order = 0;
  std::size_t samples = 0;
  std::vector<double> times;
  std::vector<MultiIndex> index;
  std::vector<std::vector<double>> value;  ///< [time][index]
  std::vector<std::vector<double>> error;  ///< [time][index]
  std::vector<double> slope;               ///< d/dt by least squares, per index
  std::vector<double> slope_error;         ///< jackknife, per index
  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t position(const MultiIndex& a) const;
  [[nodiscard]] double at(std::size_t j, const MultiIndex& a) const { return value[j][position(a)]; }
  [[nodiscard]] double error_at(std::size_t j, const MultiIndex& a) const { return error[j][position(a)]; }
};

/// Joint cumulant from raw moments: kappa = sum_pi (|pi|-1)! (-1)^(|pi|-1) prod_B m_B,
/// where `moment` returns the moment of a sorted sub-index.
double cumulant_from_moments(const MultiIndex& a, const std::map<MultiIndex, double>& moments);

CumulantTable moments_to_cumulants(const PathEnsemble& e, std::size_t max_order);

/// D^alpha = slope(kappa_alpha) / |alpha|!, tagged with `normalization`.
CoefficientSet estimate_D(const CumulantTable& t, Normalization normalization);

/// A^i_{mu nu}, flat [i][mu][nu]; empty means the flat bundle.
struct ConnectionCoefficients {
  std::size_t n = 1;
  std::vector<double> a;

  [[nodiscard]] bool flat() const;
  [[nodiscard]] double get(std::size_t i, std::size_t mu, std::size_t nu) const;
};

/// L^i(t) = integral of (delta^i_j + A^i_{mu j} Y^mu) dY^j by the trapezoid rule.
PathEnsemble connection_paths(const PathEnsemble& e, const ConnectionCoefficients& conn);

/// B_i^alpha = (count_i(alpha)/|alpha|) (-1)^|alpha| / |alpha|! slope(kappa_alpha[L]).
BCoefficients estimate_B(const PathEnsemble& e, const ConnectionCoefficients& conn, std::size_t max_order,
                         const std::vector<double>& constant = {});

}  // namespace contactdyn
