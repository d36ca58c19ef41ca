#include <gtest/gtest.h>
#include <omp.h>

#include <sstream>

#include "contactdyn/cumulants.hpp"
#include "contactdyn/error.hpp"
#include "oracles.hpp"

using namespace contactdyn;

namespace {

IncrementModel gaussian(double mu, double s2, std::size_t n = 1) {
  IncrementModel m;
  m.kind = IncrementModel::Kind::gaussian;
  m.n = n;
  m.mu.assign(n, mu);
  m.sigma2.assign(n, s2);
  return m;
}

IncrementModel poisson(double lambda) {
  IncrementModel m;
  m.kind = IncrementModel::Kind::poisson;
  m.lambda = lambda;
  return m;
}

double z(double got, double want, double se) { return std::abs(got - want) / se; }

}  // namespace

TEST(Cumulants, FromMomentsMatchesTextbookFormulas) {
  const double m1 = 0.7, m2 = 1.9, m3 = -0.4, m4 = 5.3;
  std::map<MultiIndex, double> mom{{{0}, m1}, {{0, 0}, m2}, {{0, 0, 0}, m3}, {{0, 0, 0, 0}, m4}};
  EXPECT_NEAR(cumulant_from_moments({0}, mom), m1, 1e-15);
  EXPECT_NEAR(cumulant_from_moments({0, 0}, mom), m2 - m1 * m1, 1e-14);
  EXPECT_NEAR(cumulant_from_moments({0, 0, 0}, mom), m3 - 3 * m2 * m1 + 2 * m1 * m1 * m1, 1e-13);
  EXPECT_NEAR(cumulant_from_moments({0, 0, 0, 0}, mom),
              m4 - 4 * m3 * m1 - 3 * m2 * m2 + 12 * m2 * m1 * m1 - 6 * m1 * m1 * m1 * m1, 1e-12);
  // joint: k(1,2) = E[XY] - E[X]E[Y]
  std::map<MultiIndex, double> j{{{0}, 0.5}, {{1}, -1.5}, {{0, 1}, 2.0}, {{0, 0}, 1.0}, {{1, 1}, 3.0}};
  EXPECT_NEAR(cumulant_from_moments({0, 1}, j), 2.0 + 0.75, 1e-15);
}

TEST(Cumulants, GaussianOrderOneTwoThree) {
  const auto e = sample_paths(gaussian(0.3, 0.04), 100000, uniform_times(1.0, 10), 123);
  const auto t = moments_to_cumulants(e, 3);
  const std::size_t last = t.times.size() - 1;
  EXPECT_LE(z(t.at(last, {0}), 0.3, t.error_at(last, {0})), 4.0);
  EXPECT_LE(z(t.at(last, {0, 0}), 0.04, t.error_at(last, {0, 0})), 4.0);
  EXPECT_LE(z(t.at(last, {0, 0, 0}), 0.0, t.error_at(last, {0, 0, 0})), 4.0);
  // order-1 entry is the sample mean
  double mean = 0.0;
  for (std::size_t s = 0; s < e.samples; ++s) mean += e.at(s, last, 0);
  EXPECT_NEAR(t.at(last, {0}), mean / static_cast<double>(e.samples), 1e-12);

  const auto d = estimate_D(t, Normalization::standard);
  EXPECT_LE(z(d.get({0}), 0.3, d.standard_error.at({0})), 4.0);
  EXPECT_LE(z(d.get({0, 0}), 0.02, d.standard_error.at({0, 0})), 4.0);
  EXPECT_EQ(d.normalization, Normalization::standard);
}

TEST(Cumulants, BrownianNetDiffusion) {
  const auto e = sample_paths(gaussian(0.0, 2.0), 100000, uniform_times(1.0, 10), 99);
  const auto d = estimate_D(moments_to_cumulants(e, 2), Normalization::standard);
  EXPECT_LE(z(d.get({0, 0}), 1.0, d.standard_error.at({0, 0})), 4.0);
}

TEST(Cumulants, PoissonAllOrdersEqualLambda) {
  const auto e = sample_paths(poisson(2.0), 100000, uniform_times(1.0, 10), 5);
  const auto t = moments_to_cumulants(e, 4);
  const std::size_t last = t.times.size() - 1;
  for (const MultiIndex& a : {MultiIndex{0}, MultiIndex{0, 0}, MultiIndex{0, 0, 0}, MultiIndex{0, 0, 0, 0}})
    EXPECT_LE(z(t.at(last, a), 2.0, t.error_at(last, a)), 5.0) << to_label(a);
}

TEST(Cumulants, StandardErrorHalvesWhenNQuadruples) {
  const auto times = uniform_times(1.0, 10);
  const auto t1 = moments_to_cumulants(sample_paths(gaussian(0.0, 2.0), 25000, times, 7), 2);
  const auto t4 = moments_to_cumulants(sample_paths(gaussian(0.0, 2.0), 100000, times, 8), 2);
  const std::size_t k = t1.position({0, 0});
  const double ratio = t1.slope_error[k] / t4.slope_error[k];
  EXPECT_NEAR(ratio, 2.0, 0.5);
}

TEST(Cumulants, JackknifeMatchesBruteForce) {
  const auto e = sample_paths(poisson(1.5), 40, uniform_times(1.0, 2), 17);
  const auto t = moments_to_cumulants(e, 3);
  const std::size_t j = 2, n = e.samples;
  auto k3 = [&](std::size_t skip) {
    std::vector<double> x;
    for (std::size_t s = 0; s < n; ++s)
      if (s != skip) x.push_back(e.at(s, j, 0));
    double m1 = 0, m2 = 0, m3 = 0;
    for (double v : x) m1 += v;
    m1 /= static_cast<double>(x.size());
    for (double v : x) {
      m2 += (v - m1) * (v - m1);
      m3 += (v - m1) * (v - m1) * (v - m1);
    }
    return m3 / static_cast<double>(x.size());
  };
  const double full = k3(n);
  EXPECT_NEAR(t.at(j, {0, 0, 0}), full, 1e-10);
  std::vector<double> loo;
  double mean = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    loo.push_back(k3(s));
    mean += loo.back();
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : loo) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var * static_cast<double>(n - 1) / static_cast<double>(n));
  EXPECT_NEAR(t.error_at(j, {0, 0, 0}), se, 1e-9);
}

TEST(Cumulants, DeterministicDriftFromTable) {
  std::ostringstream os;
  os << "sample_id,t,S1\n";
  for (int s = 0; s < 5; ++s)
    for (int j = 0; j <= 4; ++j) os << s << "," << 0.25 * j << "," << 0.7 * 0.25 * j << "\n";
  std::istringstream is(os.str());
  const auto e = ensemble_from_csv(is);
  EXPECT_EQ(e.samples, 5u);
  const auto d = estimate_D(moments_to_cumulants(e, 4), Normalization::standard);
  EXPECT_NEAR(d.get({0}), 0.7, 1e-12);
  for (const MultiIndex& a : {MultiIndex{0, 0}, MultiIndex{0, 0, 0}, MultiIndex{0, 0, 0, 0}})
    EXPECT_NEAR(d.get(a), 0.0, 1e-12);
  const auto b = estimate_B(e, {}, 3);
  EXPECT_NEAR(b.get({0}, 0), -0.7, 1e-12);
  EXPECT_NEAR(b.get({0, 0}, 0), 0.0, 1e-12);
}

TEST(Cumulants, EnsembleCsvRoundTrip) {
  const auto e = sample_paths(gaussian(0.1, 0.5, 2), 6, uniform_times(1.0, 3), 3);
  std::ostringstream os;
  write_ensemble_csv(os, e);
  std::istringstream is(os.str());
  const auto f = ensemble_from_csv(is);
  EXPECT_EQ(f.n, 2u);
  EXPECT_EQ(f.values, e.values);
  EXPECT_EQ(f.times, e.times);
}

TEST(Cumulants, AdditivityOfIndependentSums) {
  const auto times = uniform_times(1.0, 4);
  const auto a = sample_paths(poisson(1.0), 50000, times, 1);
  const auto b = sample_paths(gaussian(0.2, 0.5), 50000, times, 2);
  PathEnsemble s = a;
  for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] += b.values[i];
  const auto ta = moments_to_cumulants(a, 3), tb = moments_to_cumulants(b, 3), ts = moments_to_cumulants(s, 3);
  const std::size_t j = times.size() - 1;
  for (const MultiIndex& k : {MultiIndex{0}, MultiIndex{0, 0}, MultiIndex{0, 0, 0}}) {
    const double se = std::sqrt(ta.error_at(j, k) * ta.error_at(j, k) + tb.error_at(j, k) * tb.error_at(j, k) +
                                ts.error_at(j, k) * ts.error_at(j, k));
    EXPECT_LE(std::abs(ts.at(j, k) - ta.at(j, k) - tb.at(j, k)), 4.0 * se) << to_label(k);
  }
}

TEST(Cumulants, JointIndicesAreSymmetric) {
  const auto e = sample_paths(gaussian(0.0, 1.0, 2), 2000, uniform_times(1.0, 3), 4);
  const auto t = moments_to_cumulants(e, 3);
  EXPECT_EQ(t.position({1, 0}), t.position({0, 1}));
  EXPECT_EQ(t.position({1, 0, 1}), t.position({0, 1, 1}));
  EXPECT_EQ(t.index.size(), 2u + 3u + 4u);
}

TEST(Cumulants, ThreadCountDoesNotChangeResults) {
  const int saved = omp_get_max_threads();
  const auto times = uniform_times(1.0, 5);
  omp_set_num_threads(1);
  const auto e1 = sample_paths(poisson(1.3), 20000, times, 77);
  const auto t1 = moments_to_cumulants(e1, 4);
  omp_set_num_threads(4);
  const auto e4 = sample_paths(poisson(1.3), 20000, times, 77);
  const auto t4 = moments_to_cumulants(e4, 4);
  omp_set_num_threads(saved);
  EXPECT_EQ(e1.values, e4.values);
  EXPECT_EQ(t1.value, t4.value);
  EXPECT_EQ(t1.error, t4.error);
  EXPECT_EQ(t1.slope, t4.slope);
}

TEST(Cumulants, BrownianBMatchesMinusD) {
  const auto e = sample_paths(gaussian(0.25, 2.0), 50000, uniform_times(1.0, 10), 31);
  const auto d = estimate_D(moments_to_cumulants(e, 2), Normalization::standard);
  const auto b = estimate_B(e, {}, 2);
  EXPECT_LE(std::abs(b.get({0}, 0) + d.get({0})), 4.0 * b.standard_error.at({{0}, 0}) + 1e-15);
  // second order: (1/1)(+1)/2! * slope(kappa_2) = D(1,1)
  EXPECT_NEAR(b.get({0, 0}, 0), d.get({0, 0}), 1e-12);
}

TEST(Cumulants, ZeroEnsembleHasZeroB) {
  PathEnsemble e;
  e.n = 2;
  e.times = uniform_times(1.0, 4);
  e.samples = 10;
  e.values.assign(e.samples * e.times.size() * e.n, 0.0);
  ConnectionCoefficients conn;
  conn.n = 2;
  conn.a.assign(8, 0.5);
  const auto b = estimate_B(e, conn, 3);
  for (const auto& [k, v] : b.entries) EXPECT_EQ(v, 0.0);
}

TEST(Cumulants, ConnectionPathsTrapezoid) {
  // one sample, n = 1, A = a: L = S + a * int Y dY = S + a S^2 / 2 for linear S
  PathEnsemble e;
  e.n = 1;
  e.times = uniform_times(1.0, 4);
  e.samples = 2;
  for (std::size_t s = 0; s < 2; ++s)
    for (double t : e.times) e.values.push_back((s + 1.0) * t);
  ConnectionCoefficients conn;
  conn.n = 1;
  conn.a = {0.4};
  const auto l = connection_paths(e, conn);
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t j = 0; j < e.times.size(); ++j) {
      const double x = e.at(s, j, 0);
      EXPECT_NEAR(l.at(s, j, 0), x + 0.4 * x * x / 2.0, 1e-14);
    }
}

TEST(Cumulants, Rejections) {
  const auto e = sample_paths(gaussian(0.0, 1.0), 10, uniform_times(1.0, 3), 1);
  EXPECT_THROW(moments_to_cumulants(e, 5), UnsupportedOrder);
  EXPECT_THROW(sample_paths(gaussian(0.0, -1.0), 10, uniform_times(1.0, 3), 1), Rejected);
  EXPECT_THROW(sample_paths(poisson(0.0), 10, uniform_times(1.0, 3), 1), Rejected);
  EXPECT_THROW(sample_paths(gaussian(0.0, 1.0), 1, uniform_times(1.0, 3), 1), Rejected);
  ConnectionCoefficients bad;
  bad.n = 1;
  bad.a = {1.0, 2.0};
  EXPECT_THROW(estimate_B(e, bad, 2), Rejected);
  EXPECT_THROW(sample_paths(gaussian(0.0, 1.0), 10, {0.0, 0.5, 0.4}, 1), Rejected);
}

TEST(Cumulants, SamplingIsReproducible) {
  const auto a = sample_paths(gaussian(0.0, 1.0), 4, uniform_times(1.0, 3), 42);
  const auto b = sample_paths(gaussian(0.0, 1.0), 4, uniform_times(1.0, 3), 42);
  const auto c = sample_paths(gaussian(0.0, 1.0), 4, uniform_times(1.0, 3), 43);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  const auto big = sample_paths(gaussian(0.5, 1.0), 20000, uniform_times(1.0, 2), 42);
  double mean = 0.0;
  for (std::size_t s = 0; s < big.samples; ++s) mean += big.at(s, 2, 0);
  EXPECT_NEAR(mean / 20000.0, 0.5, 4.0 / std::sqrt(20000.0));
}
