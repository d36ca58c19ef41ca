#include "contactdyn/forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "contactdyn/error.hpp"
#include "contactdyn/random.hpp"

namespace contactdyn::forms {

namespace {

// Sorts in place; returns the permutation sign, or 0 when an index repeats.
int sort_with_parity(IndexTuple& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    for (std::size_t j = i; j > 0 && idx[j - 1] > idx[j]; --j) {
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  }
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (idx[i] == idx[i - 1]) return 0;
  }
  return sign;
}

double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
  return f;
}

// Dense antisymmetric matrix of a 2-form: A(i,j) = coefficient of dx^i ^ dx^j.
std::vector<double> two_form_matrix(const KForm& w) {
  const std::size_t d = w.dimension();
  std::vector<double> a(d * d, 0.0);
  for (const auto& [idx, c] : w.terms()) {
    a[idx[0] * d + idx[1]] = c;
    a[idx[1] * d + idx[0]] = -c;
  }
  return a;
}

}  // namespace

Coordinate Coordinate::of(std::size_t n, std::size_t index) {
  if (n == 0 || index > 2 * n) throw ContractViolation("Coordinate: index out of range");
  if (index == 0) return time();
  if (index <= n) return {index, CoordKind::base};
  return {index, CoordKind::flux};
}

KForm::KForm(std::size_t dimension, std::size_t degree) : dimension_(dimension), degree_(degree) {
  if (degree_ == 0) terms_[{}] = 0.0;
}

KForm KForm::scalar(std::size_t dimension, double value) {
  KForm f(dimension, 0);
  f.terms_[{}] = value;
  return f;
}

KForm KForm::basis(std::size_t dimension, IndexTuple indices, double value) {
  KForm f(dimension, indices.size());
  f.add(std::move(indices), value);
  return f;
}

KForm KForm::one_form(const std::vector<double>& coeffs) {
  KForm f(coeffs.size(), 1);
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] != 0.0) f.terms_[{i}] = coeffs[i];
  }
  return f;
}

double KForm::get(IndexTuple indices) const {
  if (indices.size() != degree_) throw ContractViolation("KForm::get: wrong number of indices");
  const int sign = sort_with_parity(indices);
  if (sign == 0) return 0.0;
  const auto it = terms_.find(indices);
  return it == terms_.end() ? 0.0 : sign * it->second;
}

void KForm::add(IndexTuple indices, double value) {
  if (indices.size() != degree_) throw ContractViolation("KForm::add: wrong number of indices");
  for (std::size_t i : indices) {
    if (i >= dimension_) throw ContractViolation("KForm::add: index exceeds dimension");
  }
  const int sign = sort_with_parity(indices);
  if (sign == 0) return;
  terms_[indices] += sign * value;
}

double KForm::sup_norm() const noexcept {
  double m = 0.0;
  for (const auto& [idx, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

bool KForm::finite() const noexcept {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& kv) { return std::isfinite(kv.second); });
}

KForm& KForm::operator+=(const KForm& other) {
  if (other.dimension_ != dimension_ || other.degree_ != degree_) {
    throw ContractViolation("KForm: adding forms of different shape");
  }
  for (const auto& [idx, c] : other.terms_) terms_[idx] += c;
  return *this;
}

KForm& KForm::operator-=(const KForm& other) {
  if (other.dimension_ != dimension_ || other.degree_ != degree_) {
    throw ContractViolation("KForm: subtracting forms of different shape");
  }
  for (const auto& [idx, c] : other.terms_) terms_[idx] -= c;
  return *this;
}

KForm& KForm::operator*=(double s) {
  for (auto& [idx, c] : terms_) c *= s;
  return *this;
}

KForm operator+(KForm a, const KForm& b) { return a += b; }
KForm operator-(KForm a, const KForm& b) { return a -= b; }
KForm operator*(double s, KForm a) { return a *= s; }

bool TangentVector::finite() const noexcept {
  return std::all_of(components.begin(), components.end(), [](double v) { return std::isfinite(v); });
}

KForm wedge(const KForm& a, const KForm& b) {
  if (a.dimension() != b.dimension()) throw ContractViolation("wedge: dimension mismatch");
  KForm out(a.dimension(), a.degree() + b.degree());
  if (out.degree() > out.dimension()) return out;
  for (const auto& [ia, ca] : a.terms()) {
    for (const auto& [ib, cb] : b.terms()) {
      IndexTuple idx = ia;
      idx.insert(idx.end(), ib.begin(), ib.end());
      out.add(std::move(idx), ca * cb);
    }
  }
  return out;
}

KForm interior_product(const TangentVector& x, const KForm& w) {
  if (w.degree() == 0) throw ContractViolation("interior_product: degree-0 form");
  if (x.dimension() != w.dimension()) throw ContractViolation("interior_product: dimension mismatch");
  KForm out(w.dimension(), w.degree() - 1);
  for (const auto& [idx, c] : w.terms()) {
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const double xr = x.components[idx[r]];
      if (xr == 0.0) continue;
      IndexTuple rest;
      rest.reserve(idx.size() - 1);
      for (std::size_t s = 0; s < idx.size(); ++s)
        if (s != r) rest.push_back(idx[s]);
      out.add(std::move(rest), (r % 2 == 0 ? 1.0 : -1.0) * xr * c);
    }
  }
  return out;
}

KForm evaluate(const FormField& f, const PhasePoint& p) {
  if (!f.evaluator) throw ContractViolation("FormField has no evaluator");
  KForm w = f.evaluator(p);
  if (w.degree() != f.degree || w.dimension() != f.dimension) {
    throw ContractViolation("FormField evaluator returned a form of the wrong degree or dimension");
  }
  if (!w.finite()) throw EvaluationError("FormField evaluator returned non-finite coefficients");
  return w;
}

KForm exterior_derivative(const FormField& f, const PhasePoint& p) {
  if (!(f.fd_step > 0.0)) throw ContractViolation("exterior_derivative: fd_step must be positive");
  if (p.dimension() != f.dimension) throw ContractViolation("exterior_derivative: point has wrong dimension");
  KForm out(f.dimension, f.degree + 1);
  if (out.degree() > out.dimension()) return out;
  PhasePoint probe = p;
  const double inv = 1.0 / (2.0 * f.fd_step);
  for (std::size_t j = 0; j < f.dimension; ++j) {
    const double x0 = p.coord(j);
    probe.set_coord(j, x0 + f.fd_step);
    const KForm plus = evaluate(f, probe);
    probe.set_coord(j, x0 - f.fd_step);
    const KForm minus = evaluate(f, probe);
    probe.set_coord(j, x0);
    KForm partial = plus - minus;
    partial *= inv;
    out += wedge(KForm::basis(f.dimension, {j}), partial);
  }
  return out;
}

KForm contact_form_at(const Hamiltonian& h, const PhasePoint& p) {
  const std::size_t n = p.n();
  std::vector<double> c(p.dimension(), 0.0);
  c[0] = evaluate(h, p);
  for (std::size_t i = 0; i < n; ++i) c[1 + i] = -p.wp[i];
  KForm theta(p.dimension(), 1);
  for (std::size_t i = 0; i < c.size(); ++i) theta.add({i}, c[i]);
  return theta;
}

FormField contact_form_field(const Hamiltonian& h, std::size_t n, double fd_step) {
  FormField f;
  f.degree = 1;
  f.dimension = 2 * n + 1;
  f.fd_step = fd_step;
  f.evaluator = [h](const PhasePoint& p) { return contact_form_at(h, p); };
  return f;
}

double volume_coefficient(const KForm& theta, const KForm& dtheta) {
  if (theta.degree() != 1 || dtheta.degree() != 2 || theta.dimension() != dtheta.dimension()) {
    throw ContractViolation("volume_coefficient: expects a 1-form and a 2-form of equal dimension");
  }
  const std::size_t dim = theta.dimension();
  if (dim % 2 == 0) throw ContractViolation("volume_coefficient: dimension must be odd");
  const std::size_t n = (dim - 1) / 2;
  KForm vol = theta;
  for (std::size_t k = 0; k < n; ++k) vol = wedge(vol, dtheta);
  // read on (t, y1, wp1, y2, wp2, ...): dTheta^n / n! of the Darboux form is
  // dy1^dwp1^..., so this ordering carries no (-1)^(n(n-1)/2) parity sign
  IndexTuple pairs{0};
  for (std::size_t i = 0; i < n; ++i) {
    pairs.push_back(1 + i);
    pairs.push_back(1 + n + i);
  }
  return vol.get(pairs) / factorial(n);
}

ContactReport certify_contact(const Hamiltonian& h, const std::vector<PhasePoint>& samples,
                              const CertifyOptions& options) {
  if (samples.empty()) throw ContractViolation("certify_contact: no samples");
  const std::size_t n = samples.front().n();
  if (n == 0) throw ContractViolation("certify_contact: n must be at least 1");

  ContactReport report;
  report.tau_vol = options.tau_vol;
  report.tau_ker = options.tau_ker;
  report.volume.assign(samples.size(), 0.0);
  report.kernel_gap.assign(samples.size(), 0.0);
  report.failures.assign(samples.size(), {});

  const FormField theta_field = contact_form_field(h, n, options.fd_step);
  const std::size_t dim = 2 * n + 1;
  bool any_failure = false;

  for (std::size_t s = 0; s < samples.size(); ++s) {
    const PhasePoint& p = samples[s];
    if (p.n() != n) throw ContractViolation("certify_contact: samples have mixed dimension");
    KForm theta(dim, 1), dtheta(dim, 2);
    try {
      theta = evaluate(theta_field, p);
      dtheta = exterior_derivative(theta_field, p);
    } catch (const EvaluationError& e) {
      report.failures[s] = e.what();
      any_failure = true;
      continue;
    }
    report.volume[s] = volume_coefficient(theta, dtheta);

    // M = theta theta^T + A A^T is PSD; its smallest eigenvalue is zero exactly
    // when some X lies in both kernels. Random probes refined by power
    // iteration on (c I - M) estimate that eigenvalue from above.
    const auto a = two_form_matrix(dtheta);
    std::vector<double> th(dim);
    for (std::size_t i = 0; i < dim; ++i) th[i] = theta.get({i});
    std::vector<double> m(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        double acc = th[i] * th[j];
        for (std::size_t k = 0; k < dim; ++k) acc += a[i * dim + k] * a[j * dim + k];
        m[i * dim + j] = acc;
      }
    }
    double trace = 0.0;
    for (std::size_t i = 0; i < dim; ++i) trace += m[i * dim + i];
    const double shift = trace + 1e-300;

    SplitMix64 rng(options.seed, s);
    double gap = std::numeric_limits<double>::infinity();
    std::vector<double> x(dim), mx(dim);
    for (int probe = 0; probe < options.kernel_probes; ++probe) {
      for (auto& v : x) v = 2.0 * rng.uniform() - 1.0;
      for (int it = 0; it <= options.probe_iterations; ++it) {
        double norm = 0.0;
        for (double v : x) norm += v * v;
        norm = std::sqrt(norm);
        if (norm == 0.0) break;
        for (auto& v : x) v /= norm;
        for (std::size_t i = 0; i < dim; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < dim; ++j) acc += m[i * dim + j] * x[j];
          mx[i] = acc;
        }
        if (it == options.probe_iterations) {
          double rayleigh = 0.0;
          for (std::size_t i = 0; i < dim; ++i) rayleigh += x[i] * mx[i];
          gap = std::min(gap, std::sqrt(std::max(rayleigh, 0.0)));
          break;
        }
        for (std::size_t i = 0; i < dim; ++i) x[i] = shift * x[i] - mx[i];
      }
    }
    report.kernel_gap[s] = gap;
  }

  double min_vol = std::numeric_limits<double>::infinity();
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples.size(); ++s) {
    if (!report.failures[s].empty()) continue;
    min_vol = std::min(min_vol, std::abs(report.volume[s]));
    min_gap = std::min(min_gap, report.kernel_gap[s]);
  }
  report.min_abs_volume = std::isfinite(min_vol) ? min_vol : 0.0;
  report.min_kernel_gap = std::isfinite(min_gap) ? min_gap : 0.0;
  report.volume_pass = !any_failure && report.min_abs_volume >= options.tau_vol;
  report.kernel_pass = !any_failure && report.min_kernel_gap > options.tau_ker;
  report.pass = report.volume_pass && report.kernel_pass;
  return report;
}

}  // namespace contactdyn::forms
