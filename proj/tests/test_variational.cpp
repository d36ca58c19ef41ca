#include <gtest/gtest.h>

#include "contactdyn/error.hpp"
#include "contactdyn/models.hpp"
#include "contactdyn/variational.hpp"
#include "oracles.hpp"

using namespace contactdyn;

namespace {

DiscretePath reeb_solution(double step, std::size_t steps, double k = 0.5) {
  const auto h = models::make("reeb", 1, {{"k", k}});
  return DiscretePath::from_trajectory(integrate(h, PhasePoint(0.0, {1.0}, {1.0}), step, steps));
}

DiscretePath bump(DiscretePath p, double eta) {
  const double t0 = p.nodes.front().t, t1 = p.nodes.back().t;
  for (std::size_t k = 1; k + 1 < p.nodes.size(); ++k) {
    const double s = std::sin(M_PI * (p.nodes[k].t - t0) / (t1 - t0));
    for (auto& v : p.nodes[k].y) v += eta * s;
    for (auto& v : p.nodes[k].wp) v += eta * s;
  }
  return p;
}

}  // namespace

TEST(Variational, TrivialActions) {
  DiscretePath p;
  for (int k = 0; k <= 4; ++k) p.nodes.emplace_back(0.25 * k, std::vector<double>{0.25 * k}, std::vector<double>{0.0});
  EXPECT_EQ(action(models::make("zero", 1), p), 0.0);
  for (auto& n : p.nodes) n.wp[0] = 2.0;
  EXPECT_NEAR(action(models::make("zero", 1), p), 2.0, 1e-9);
}

TEST(Variational, ActionAlongReebSolutionIsIntegratedEps) {
  const auto h = models::make("reeb", 1, {{"k", 0.5}});
  EXPECT_NEAR(action(h, reeb_solution(1e-3, 1000)), 1.0, 1e-6);
}

TEST(Variational, ActionIsMinusLineIntegralOfTheta) {
  // -Theta = wp dy - H dt summed with coordinate midpoints
  const auto h = models::make("harmonic", 1);
  const auto path = bump(reeb_solution(1e-2, 100), 0.05);
  // direct sum with midpoints
  double direct = 0.0;
  for (std::size_t k = 0; k + 1 < path.nodes.size(); ++k) {
    const auto& a = path.nodes[k];
    const auto& b = path.nodes[k + 1];
    const PhasePoint m(0.5 * (a.t + b.t), {0.5 * (a.y[0] + b.y[0])}, {0.5 * (a.wp[0] + b.wp[0])});
    direct += m.wp[0] * (b.y[0] - a.y[0]) - evaluate(h, m) * (b.t - a.t);
  }
  EXPECT_NEAR(action(h, path), direct, 1e-10);
}

TEST(Variational, ActionIsAdditive) {
  const auto h = models::make("quadratic_field", 1);
  const auto p = bump(reeb_solution(1e-2, 100), 0.1);
  DiscretePath a, b;
  a.nodes.assign(p.nodes.begin(), p.nodes.begin() + 41);
  b.nodes.assign(p.nodes.begin() + 40, p.nodes.end());
  EXPECT_NEAR(action(h, p), action(h, a) + action(h, b), 1e-12);
}

TEST(Variational, SolutionIsNearlyStationary) {
  const auto h = models::make("reeb", 1, {{"k", 0.5}});
  const auto sol = reeb_solution(1e-3, 1000);
  const auto r = first_variation(h, sol);
  EXPECT_LE(r.grad_norm, 1e-4 * sol.norm());
}

TEST(Variational, RandomPathIsNotStationary) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto h = models::make("reeb", 1, {{"k", 0.5}});
  for (int trial = 0; trial < 5; ++trial) {
    auto p = reeb_solution(1e-2, 100);
    for (std::size_t k = 1; k + 1 < p.nodes.size(); ++k) {
      p.nodes[k].y[0] += 0.1 * u(rng);
      p.nodes[k].wp[0] += 0.1 * u(rng);
    }
    EXPECT_GE(first_variation(h, p).grad_norm, 1e-2);
  }
}

TEST(Variational, AnalyticGradientMatchesDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (const char* name : {"reeb", "harmonic", "quadratic_field"}) {
    for (std::size_t n : {1u, 2u}) {
      const auto h = models::make(name, n);
      DiscretePath p;
      for (int k = 0; k <= 12; ++k) {
        PhasePoint x;
        x.t = 0.1 * k;
        for (std::size_t i = 0; i < n; ++i) {
          x.y.push_back(std::sin(0.1 * k + i) + u(rng));
          x.wp.push_back(std::cos(0.2 * k) + u(rng));
        }
        p.nodes.push_back(x);
      }
      for (bool with_time : {false, true}) {
        p.optimize_time = with_time;
        const auto ga = first_variation(h, p).residuals;
        const auto gf = finite_difference_gradient(h, p);
        ASSERT_EQ(ga.size(), gf.size());
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < ga.size(); ++i) {
          num += (ga[i] - gf[i]) * (ga[i] - gf[i]);
          den += gf[i] * gf[i];
        }
        EXPECT_LE(std::sqrt(num / den), 1e-6) << name << " n=" << n << " t=" << with_time;
      }
    }
  }
}

TEST(Variational, GradNormIsResidualNorm) {
  const auto h = models::make("harmonic", 2);
  auto p = bump(DiscretePath::from_trajectory(integrate(h, PhasePoint(0.0, {1.0, 0.0}, {0.0, 1.0}), 0.05, 40)), 0.1);
  const auto r = first_variation(h, p);
  double s = 0.0;
  for (double v : r.residuals) s += v * v;
  EXPECT_NEAR(r.grad_norm, std::sqrt(s), 1e-12);
  EXPECT_EQ(r.node_residuals.size(), p.nodes.size() - 2);
}

TEST(Variational, QuadraticStationarity) {
  const auto h = models::make("reeb", 1, {{"k", 0.5}});
  const auto sol = reeb_solution(1e-3, 1000);
  const double s0 = action(h, sol);
  std::vector<double> x, y;
  for (double eta : {1e-1, 1e-2, 1e-3, 1e-4}) {
    x.push_back(std::log(eta));
    y.push_back(std::log(std::abs(action(h, bump(sol, eta)) - s0)));
  }
  const double slope = (y.back() - y.front()) / (x.back() - x.front());
  EXPECT_NEAR(slope, 2.0, 0.1);
}

TEST(Variational, DescendFromSolutionTakesNoSteps) {
  const auto h = models::make("reeb", 1, {{"k", 0.5}});
  DescendOptions opt;
  opt.tolerance = 1e-3;
  const auto r = descend(h, reeb_solution(1e-2, 100), opt);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.accepted_steps, 0u);
}

TEST(Variational, DescendConvergesMonotonically) {
  const auto h = models::make("reeb", 1, {{"k", 0.5}});
  const auto sol = reeb_solution(1e-3, 1000);
  const auto r = descend(h, bump(sol, 1e-2));
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.grad_norm, 1e-5);
  EXPECT_LE(r.iterations, 500u);
  for (std::size_t i = 1; i < r.objective.size(); ++i) EXPECT_LE(r.objective[i], r.objective[i - 1]);
  // endpoints untouched
  EXPECT_EQ(r.path.nodes.front().y, sol.nodes.front().y);
  EXPECT_EQ(r.path.nodes.back().wp, sol.nodes.back().wp);
}

TEST(Variational, DescendWithTwoDimensionsAndTime) {
  const auto h = models::make("harmonic", 2);
  auto sol = DiscretePath::from_trajectory(integrate(h, PhasePoint(0.0, {1.0, 0.0}, {0.0, 1.0}), 0.02, 50));
  const double g0 = first_variation(h, sol).grad_norm;
  auto start = bump(sol, 1e-2);
  start.optimize_time = true;
  const auto r = descend(h, start);
  EXPECT_LE(r.grad_norm, std::max(1e-5, g0));
  for (std::size_t i = 1; i < r.objective.size(); ++i) EXPECT_LE(r.objective[i], r.objective[i - 1]);
}

TEST(Variational, Contracts) {
  DiscretePath two;
  two.nodes = {PhasePoint(0.0, {0.0}, {0.0}), PhasePoint(1.0, {1.0}, {0.0})};
  EXPECT_THROW(first_variation(models::make("zero", 1), two), ContractViolation);
  DiscretePath back = two;
  back.nodes[1].t = 0.0;
  EXPECT_THROW(action(models::make("zero", 1), back), ContractViolation);
  DescendOptions bad;
  bad.rate = 0.0;
  EXPECT_THROW(descend(models::make("zero", 1), reeb_solution(0.1, 5), bad), ContractViolation);
  auto h = make_function([](const PhasePoint& p) { return p.t > 0.5 ? std::nan("") : 0.0; });
  try {
    action(h, reeb_solution(0.1, 10));
    FAIL();
  } catch (const EvaluationError& e) {
    EXPECT_NE(std::string(e.what()).find("segment"), std::string::npos);
  }
}
