#include "contactdyn/cumulants.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "contactdyn/error.hpp"
#include "contactdyn/io.hpp"
#include "contactdyn/kernels.hpp"
#include "contactdyn/random.hpp"

namespace contactdyn {

void IncrementModel::validate() const {
  if (n < 1) throw Rejected("model dimension must be >= 1");
  auto finite_all = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  switch (kind) {
    case Kind::gaussian:
      if (mu.size() != n || sigma2.size() != n) throw Rejected("gaussian model needs mu and sigma2 of length n");
      if (!finite_all(mu) || !finite_all(sigma2)) throw Rejected("gaussian model parameters must be finite");
      for (double s : sigma2)
        if (s < 0.0) throw Rejected("gaussian model needs sigma2 >= 0");
      break;
    case Kind::poisson:
      if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Rejected("poisson model needs lambda > 0");
      if (jump.size() != n || !finite_all(jump)) throw Rejected("poisson model needs a finite jump of length n");
      break;
    case Kind::table:
      if (table_path.empty()) throw Rejected("table model needs a file");
      break;
  }
}

std::string IncrementModel::label() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::gaussian:
      os << "gaussian(mu=";
      for (std::size_t i = 0; i < mu.size(); ++i) os << (i ? ";" : "") << io::format_double(mu[i]);
      os << ",sigma2=";
      for (std::size_t i = 0; i < sigma2.size(); ++i) os << (i ? ";" : "") << io::format_double(sigma2[i]);
      os << ")";
      break;
    case Kind::poisson:
      os << "poisson(lambda=" << io::format_double(lambda) << ",jump=";
      for (std::size_t i = 0; i < jump.size(); ++i) os << (i ? ";" : "") << io::format_double(jump[i]);
      os << ")";
      break;
    case Kind::table:
      os << "table(" << table_path << ")";
      break;
  }
  return os.str();
}

std::vector<double> uniform_times(double t_end, std::size_t intervals) {
  if (intervals < 1 || !(t_end > 0.0)) throw Rejected("time grid needs t_end > 0 and at least one interval");
  std::vector<double> t(intervals + 1);
  for (std::size_t j = 0; j <= intervals; ++j) t[j] = t_end * static_cast<double>(j) / static_cast<double>(intervals);
  return t;
}

namespace {

void check_times(const std::vector<double>& times) {
  if (times.size() < 2) throw Rejected("time grid needs at least 2 points");
  for (std::size_t j = 1; j < times.size(); ++j)
    if (!(times[j] > times[j - 1])) throw Rejected("time grid must be strictly increasing");
}

}  // namespace

PathEnsemble sample_paths(const IncrementModel& model, std::size_t samples, const std::vector<double>& times,
                          std::uint64_t seed) {
  model.validate();
  if (model.kind == IncrementModel::Kind::table) {
    std::ifstream f(model.table_path);
    if (!f) throw Rejected("cannot open ensemble table " + model.table_path);
    PathEnsemble e = ensemble_from_csv(f);
    if (e.n != model.n) throw Rejected("ensemble table has the wrong number of components");
    if (samples > 0 && samples < e.samples) {
      e.samples = samples;
      e.values.resize(samples * e.times.size() * e.n);
    }
    e.seed = seed;
    e.model = model.label();
    return e;
  }
  if (samples < 2) throw Rejected("an ensemble needs N >= 2");
  check_times(times);

  PathEnsemble e;
  e.n = model.n;
  e.times = times;
  e.samples = samples;
  e.seed = seed;
  e.model = model.label();
  e.values.assign(samples * times.size() * model.n, 0.0);

  const auto ns = static_cast<std::ptrdiff_t>(samples);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t si = 0; si < ns; ++si) {
    const auto s = static_cast<std::size_t>(si);
    SplitMix64 rng(seed, s);
    std::vector<double> state(model.n, 0.0);
    for (std::size_t mu = 0; mu < model.n; ++mu) e.at(s, 0, mu) = 0.0;
    for (std::size_t j = 1; j < times.size(); ++j) {
      const double dt = times[j] - times[j - 1];
      for (std::size_t mu = 0; mu < model.n; ++mu) {
        if (model.kind == IncrementModel::Kind::gaussian) {
          std::normal_distribution<double> z(0.0, 1.0);
          state[mu] += model.mu[mu] * dt + std::sqrt(model.sigma2[mu] * dt) * z(rng);
        } else {
          std::poisson_distribution<long long> k(model.lambda * dt);
          state[mu] += model.jump[mu] * static_cast<double>(k(rng));
        }
        e.at(s, j, mu) = state[mu];
      }
    }
  }
  return e;
}

PathEnsemble ensemble_from_csv(std::istream& is) {
  const auto t = io::read_csv(is);
  if (t.header.size() < 3 || t.header[0] != "sample_id" || t.header[1] != "t") {
    throw Rejected("ensemble csv must start with columns sample_id,t");
  }
  PathEnsemble e;
  e.n = t.header.size() - 2;
  // rows grouped by sample, times in the same order for every sample
  std::vector<double> first_times;
  double current = std::nan("");
  std::size_t k = 0;
  for (const auto& row : t.rows) {
    if (row[0] != current) {
      if (!e.times.empty() || !first_times.empty()) {
        if (e.times.empty()) e.times = first_times;
        if (k != e.times.size()) throw Rejected("ensemble samples have different time grids");
      }
      current = row[0];
      ++e.samples;
      k = 0;
    }
    if (e.samples == 1) {
      first_times.push_back(row[1]);
    } else if (k >= e.times.size() || e.times[k] != row[1]) {
      throw Rejected("ensemble samples have different time grids");
    }
    ++k;
    for (std::size_t mu = 0; mu < e.n; ++mu) e.values.push_back(row[2 + mu]);
  }
  if (e.times.empty()) e.times = first_times;
  if (e.samples >= 1 && k != e.times.size()) throw Rejected("ensemble samples have different time grids");
  if (e.samples < 2) throw Rejected("an ensemble needs N >= 2");
  check_times(e.times);
  e.model = "table";
  return e;
}

void write_ensemble_csv(std::ostream& os, const PathEnsemble& e) {
  std::vector<std::string> header{"sample_id", "t"};
  for (std::size_t mu = 1; mu <= e.n; ++mu) header.push_back("S" + std::to_string(mu));
  io::CsvWriter w(os, header);
  for (std::size_t s = 0; s < e.samples; ++s) {
    for (std::size_t j = 0; j < e.times.size(); ++j) {
      std::vector<double> row{static_cast<double>(s), e.times[j]};
      for (std::size_t mu = 0; mu < e.n; ++mu) row.push_back(e.at(s, j, mu));
      w.row(row);
    }
  }
}

std::size_t CumulantTable::position(const MultiIndex& a) const {
  const MultiIndex c = canonical(a);
  auto it = std::find(index.begin(), index.end(), c);
  if (it == index.end()) throw ContractViolation("cumulant table has no entry " + to_label(c));
  return static_cast<std::size_t>(it - index.begin());
}

namespace {

// One term of the partition sum: coef * prod_b m[block[b]].
struct PartitionTerm {
  double coef = 0.0;
  std::vector<std::size_t> blocks;
};

// Restricted growth strings enumerate set partitions of {0..k-1}.
template <class Visit>
void for_each_partition(std::size_t k, Visit visit) {
  std::vector<std::size_t> a(k, 0), b(k, 0);
  while (true) {
    visit(a);
    std::size_t i = k;
    while (i-- > 1) {
      if (a[i] <= b[i - 1]) break;
    }
    if (i == 0 || k <= 1) return;
    ++a[i];
    b[i] = std::max(b[i - 1], a[i]);
    for (std::size_t j = i + 1; j < k; ++j) {
      a[j] = 0;
      b[j] = b[i];
    }
  }
}

std::vector<PartitionTerm> partition_terms(const MultiIndex& alpha, const std::vector<MultiIndex>& index) {
  std::vector<PartitionTerm> terms;
  const std::size_t k = alpha.size();
  for_each_partition(k, [&](const std::vector<std::size_t>& label) {
    const std::size_t blocks = k == 0 ? 0 : *std::max_element(label.begin(), label.end()) + 1;
    PartitionTerm t;
    t.coef = ((blocks - 1) % 2 == 0 ? 1.0 : -1.0) * factorial(blocks - 1);
    for (std::size_t b = 0; b < blocks; ++b) {
      MultiIndex sub;
      for (std::size_t p = 0; p < k; ++p)
        if (label[p] == b) sub.push_back(alpha[p]);
      sub = canonical(sub);
      auto it = std::find(index.begin(), index.end(), sub);
      t.blocks.push_back(static_cast<std::size_t>(it - index.begin()));
    }
    terms.push_back(std::move(t));
  });
  return terms;
}

double eval_terms(const std::vector<PartitionTerm>& terms, const double* m) {
  double k = 0.0;
  for (const auto& t : terms) {
    double p = t.coef;
    for (auto b : t.blocks) p *= m[b];
    k += p;
  }
  return k;
}

}  // namespace

double cumulant_from_moments(const MultiIndex& a, const std::map<MultiIndex, double>& moments) {
  const MultiIndex alpha = canonical(a);
  if (alpha.empty()) throw ContractViolation("cumulant of the empty index");
  std::vector<MultiIndex> index;
  std::vector<double> m;
  for (const auto& [key, v] : moments) {
    index.push_back(key);
    m.push_back(v);
  }
  const auto terms = partition_terms(alpha, index);
  for (const auto& t : terms)
    for (auto b : t.blocks)
      if (b >= index.size()) throw ContractViolation("cumulant_from_moments: missing moment");
  return eval_terms(terms, m.data());
}

CumulantTable moments_to_cumulants(const PathEnsemble& e, std::size_t max_order) {
  if (max_order < 1 || max_order > 4) throw UnsupportedOrder("cumulant order must be 1..4");
  if (e.samples < 2) throw Rejected("an ensemble needs N >= 2");
  check_times(e.times);
  const std::size_t n = e.n, N = e.samples, J = e.times.size();

  CumulantTable t;
  t.n = n;
  t.order = max_order;
  t.samples = N;
  t.times = e.times;
  t.index = multi_indices_up_to(n, 1, max_order);
  const std::size_t width = t.index.size();
  if (static_cast<double>(N) < 10.0 * std::pow(2.0, static_cast<double>(max_order))) {
    t.warnings.push_back("N = " + std::to_string(N) + " is small for order " + std::to_string(max_order) +
                         " error bars");
  }
  std::vector<std::vector<PartitionTerm>> plan(width);
  for (std::size_t k = 0; k < width; ++k) plan[k] = partition_terms(t.index[k], t.index);

  // least-squares slope weights (with intercept)
  double tbar = 0.0;
  for (double v : e.times) tbar += v;
  tbar /= static_cast<double>(J);
  double sxx = 0.0;
  for (double v : e.times) sxx += (v - tbar) * (v - tbar);
  std::vector<double> w(J);
  for (std::size_t j = 0; j < J; ++j) w[j] = (e.times[j] - tbar) / sxx;

  t.value.assign(J, std::vector<double>(width, 0.0));
  t.error.assign(J, std::vector<double>(width, 0.0));
  t.slope.assign(width, 0.0);
  t.slope_error.assign(width, 0.0);
  std::vector<double> slope_loo(N * width, 0.0);
  std::vector<double> loo(N * width);
  std::vector<double> x(N * n);
  const double dN = static_cast<double>(N);

  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t s = 0; s < N; ++s)
      for (std::size_t mu = 0; mu < n; ++mu) x[s * n + mu] = e.at(s, j, mu);
    const auto first = kernels::power_sums_parallel(x, N, n, std::vector<double>(n, 0.0), 1);
    std::vector<double> centre(n);
    for (std::size_t mu = 0; mu < n; ++mu) centre[mu] = first.sums[mu] / dN;
    const auto ps = kernels::power_sums_parallel(x, N, n, centre, max_order);

    std::vector<double> m(width);
    for (std::size_t k = 0; k < width; ++k) m[k] = ps.sums[k] / dN;
    for (std::size_t k = 0; k < width; ++k) {
      double v = eval_terms(plan[k], m.data());
      if (t.index[k].size() == 1) v += centre[t.index[k][0]];
      t.value[j][k] = v;
      t.slope[k] += w[j] * v;
    }

    // leave-one-out moments follow from the totals
    const auto ns = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t si = 0; si < ns; ++si) {
      const auto s = static_cast<std::size_t>(si);
      std::vector<double> dev(n), ml(width);
      for (std::size_t mu = 0; mu < n; ++mu) dev[mu] = x[s * n + mu] - centre[mu];
      for (std::size_t k = 0; k < width; ++k) {
        double p = 1.0;
        for (auto mu : t.index[k]) p *= dev[mu];
        ml[k] = (ps.sums[k] - p) / (dN - 1.0);
      }
      for (std::size_t k = 0; k < width; ++k) {
        double v = eval_terms(plan[k], ml.data());
        if (t.index[k].size() == 1) v += centre[t.index[k][0]];
        loo[s * width + k] = v;
        slope_loo[s * width + k] += w[j] * v;
      }
    }
    for (std::size_t k = 0; k < width; ++k) {
      double mean = 0.0;
      for (std::size_t s = 0; s < N; ++s) mean += loo[s * width + k];
      mean /= dN;
      double ss = 0.0;
      for (std::size_t s = 0; s < N; ++s) {
        const double d = loo[s * width + k] - mean;
        ss += d * d;
      }
      t.error[j][k] = std::sqrt((dN - 1.0) / dN * ss);
    }
  }
  for (std::size_t k = 0; k < width; ++k) {
    double mean = 0.0;
    for (std::size_t s = 0; s < N; ++s) mean += slope_loo[s * width + k];
    mean /= dN;
    double ss = 0.0;
    for (std::size_t s = 0; s < N; ++s) {
      const double d = slope_loo[s * width + k] - mean;
      ss += d * d;
    }
    t.slope_error[k] = std::sqrt((dN - 1.0) / dN * ss);
  }
  return t;
}

CoefficientSet estimate_D(const CumulantTable& t, Normalization normalization) {
  if (t.times.size() < 3) throw Rejected("estimate_D needs at least 3 time points");
  check_times(t.times);
  CoefficientSet c;
  c.n = t.n;
  c.normalization = normalization;
  for (std::size_t k = 0; k < t.index.size(); ++k) {
    const double w = 1.0 / factorial(t.index[k].size());
    c.set(t.index[k], w * t.slope[k]);
    c.standard_error[t.index[k]] = w * t.slope_error[k];
  }
  return c;
}

bool ConnectionCoefficients::flat() const {
  return std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; });
}

double ConnectionCoefficients::get(std::size_t i, std::size_t mu, std::size_t nu) const {
  if (a.empty()) return 0.0;
  return a[(i * n + mu) * n + nu];
}

PathEnsemble connection_paths(const PathEnsemble& e, const ConnectionCoefficients& conn) {
  if (!conn.a.empty() && (conn.n != e.n || conn.a.size() != e.n * e.n * e.n)) {
    throw Rejected("connection coefficients must have shape n x n x n");
  }
  for (double v : conn.a)
    if (!std::isfinite(v)) throw Rejected("connection coefficients must be finite");
  if (conn.flat()) return e;
  PathEnsemble out = e;
  const std::size_t n = e.n, J = e.times.size();
  const auto ns = static_cast<std::ptrdiff_t>(e.samples);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t si = 0; si < ns; ++si) {
    const auto s = static_cast<std::size_t>(si);
    std::vector<double> acc(n, 0.0);
    for (std::size_t mu = 0; mu < n; ++mu) out.at(s, 0, mu) = 0.0;
    for (std::size_t j = 1; j < J; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        double inc = 0.0;
        for (std::size_t jj = 0; jj < n; ++jj) {
          auto lij = [&](std::size_t node) {
            double v = i == jj ? 1.0 : 0.0;
            for (std::size_t mu = 0; mu < n; ++mu) v += conn.get(i, mu, jj) * e.at(s, node, mu);
            return v;
          };
          const double dy = e.at(s, j, jj) - e.at(s, j - 1, jj);
          inc += 0.5 * (lij(j - 1) + lij(j)) * dy;
        }
        acc[i] += inc;
        out.at(s, j, i) = acc[i];
      }
    }
  }
  return out;
}

BCoefficients estimate_B(const PathEnsemble& e, const ConnectionCoefficients& conn, std::size_t max_order,
                         const std::vector<double>& constant) {
  if (!constant.empty() && constant.size() != e.n) throw Rejected("constant covector has wrong length");
  const PathEnsemble l = connection_paths(e, conn);
  const CumulantTable t = moments_to_cumulants(l, max_order);
  if (t.times.size() < 3) throw Rejected("estimate_B needs at least 3 time points");
  BCoefficients b;
  b.n = e.n;
  b.constant = constant;
  for (std::size_t k = 0; k < t.index.size(); ++k) {
    const MultiIndex& a = t.index[k];
    const double order = static_cast<double>(a.size());
    const double pref = (a.size() % 2 == 0 ? 1.0 : -1.0) / factorial(a.size());
    for (std::size_t i = 0; i < e.n; ++i) {
      const std::size_t ci = count_axis(a, i);
      if (ci == 0) continue;
      const double w = static_cast<double>(ci) / order * pref;
      b.set(a, i, w * t.slope[k]);
      b.standard_error[{a, i}] = std::abs(w) * t.slope_error[k];
    }
  }
  return b;
}

}  // namespace contactdyn
