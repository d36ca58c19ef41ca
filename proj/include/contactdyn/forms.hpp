#pragma once

// Numeric exterior algebra on extended phase space (t, y1..yn, wp1..wpn) and
// pointwise certification of the contact structure of Theta = H dt - wp_i dy^i.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "contactdyn/hamiltonian.hpp"
#include "contactdyn/phase_point.hpp"

namespace contactdyn::forms {

enum class CoordKind { time, base, flux };

/// One coordinate of extended phase space: t <-> 0, y^i <-> 1..n, wp_i <-> n+1..2n.
struct Coordinate {
  std::size_t index = 0;
  CoordKind kind = CoordKind::time;

  static Coordinate of(std::size_t n, std::size_t index);
  static Coordinate time() { return {0, CoordKind::time}; }
  /// i is zero-based.
  static Coordinate base(std::size_t i) { return {1 + i, CoordKind::base}; }
  static Coordinate flux(std::size_t n, std::size_t i) { return {1 + n + i, CoordKind::flux}; }
};

using IndexTuple = std::vector<std::size_t>;

/// A k-form at a point, stored sparsely on strictly increasing index tuples.
class KForm {
 public:
  KForm(std::size_t dimension, std::size_t degree);

  static KForm scalar(std::size_t dimension, double value);
  /// dx^{i1} ^ ... ^ dx^{ik} scaled by `value`; indices need not be sorted.
  static KForm basis(std::size_t dimension, IndexTuple indices, double value = 1.0);
  static KForm one_form(const std::vector<double>& coeffs);

  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] std::size_t degree() const noexcept { return degree_; }

  /// Coefficient on an arbitrary ordering of indices (sign from permutation parity).
  [[nodiscard]] double get(IndexTuple indices) const;
  /// Adds `value` on the given ordering; repeated indices contribute nothing.
  void add(IndexTuple indices, double value);

  [[nodiscard]] const std::map<IndexTuple, double>& terms() const noexcept { return terms_; }
  [[nodiscard]] double sup_norm() const noexcept;
  [[nodiscard]] bool finite() const noexcept;

  KForm& operator+=(const KForm& other);
  KForm& operator-=(const KForm& other);
  KForm& operator*=(double s);

 private:
  std::size_t dimension_;
  std::size_t degree_;
  std::map<IndexTuple, double> terms_;
};

KForm operator+(KForm a, const KForm& b);
KForm operator-(KForm a, const KForm& b);
KForm operator*(double s, KForm a);

/// Vector X = X^0 d/dt + X^i d/dy^i + X_{n+i} d/dwp_i.
struct TangentVector {
  std::vector<double> components;

  [[nodiscard]] std::size_t dimension() const noexcept { return components.size(); }
  [[nodiscard]] bool finite() const noexcept;
};

KForm wedge(const KForm& a, const KForm& b);
KForm interior_product(const TangentVector& x, const KForm& w);

/// A form-valued function of phase points, differentiated by central differences.
struct FormField {
  std::size_t degree = 0;
  std::size_t dimension = 0;
  std::function<KForm(const PhasePoint&)> evaluator;
  double fd_step = 1e-5;
};

/// Evaluates F at p, enforcing the declared degree/dimension and finiteness.
KForm evaluate(const FormField& f, const PhasePoint& p);

/// dF at p from central differences of the coefficients; exact for
/// coefficients linear in the coordinates, O(fd_step^2) otherwise.
KForm exterior_derivative(const FormField& f, const PhasePoint& p);

/// Theta = H dt - wp_i dy^i at p.
KForm contact_form_at(const Hamiltonian& h, const PhasePoint& p);
FormField contact_form_field(const Hamiltonian& h, std::size_t n, double fd_step = 1e-5);

/// Single coefficient of Theta ^ (dTheta)^n divided by n!, so the Darboux
/// normal form dt - wp_i dy^i gives exactly +1 in every dimension.
double volume_coefficient(const KForm& theta, const KForm& dtheta);

struct CertifyOptions {
  double tau_vol = 1e-3;
  double tau_ker = 1e-6;
  int kernel_probes = 64;
  int probe_iterations = 48;
  std::uint64_t seed = 0x5eed;
  double fd_step = 1e-5;
};

struct ContactReport {
  std::vector<double> volume;            ///< normalized volume coefficient per sample
  std::vector<double> kernel_gap;        ///< min |(iota_X Theta, iota_X dTheta)| over unit probes
  std::vector<std::string> failures;     ///< per-sample evaluation failures (empty string if none)
  double min_abs_volume = 0.0;
  double min_kernel_gap = 0.0;
  bool volume_pass = false;
  bool kernel_pass = false;
  bool pass = false;
  double tau_vol = 0.0;
  double tau_ker = 0.0;
};

/// Certifies Theta ^ (dTheta)^n != 0 and ker(Theta) /\ ker(dTheta) = {0} at
/// every sample. Evaluation failures are recorded per sample, never thrown.
ContactReport certify_contact(const Hamiltonian& h, const std::vector<PhasePoint>& samples,
                              const CertifyOptions& options = {});

}  // namespace contactdyn::forms
