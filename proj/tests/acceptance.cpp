// Acceptance run: one PASS/FAIL line per criterion with its measured values
// and wall time. Exit status is nonzero when any criterion fails.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "contactdyn/cumulants.hpp"
#include "contactdyn/dynamics.hpp"
#include "contactdyn/forms.hpp"
#include "contactdyn/io.hpp"
#include "contactdyn/kinetic.hpp"
#include "contactdyn/models.hpp"
#include "contactdyn/scenario.hpp"
#include "contactdyn/transport.hpp"
#include "contactdyn/variational.hpp"

using namespace contactdyn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "!") + what;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

PhasePoint random_point(std::mt19937_64& rng, std::size_t n, double w) {
  std::uniform_real_distribution<double> u(-w, w);
  PhasePoint p;
  p.t = u(rng);
  for (std::size_t i = 0; i < n; ++i) p.y.push_back(u(rng));
  for (std::size_t i = 0; i < n; ++i) p.wp.push_back(u(rng));
  return p;
}

// 1
Outcome reeb_benchmark() {
  Outcome o;
  double worst_wp = 0.0, worst_drift = 0.0;
  for (double k : {0.25, 0.5, 1.0}) {
    const auto h = models::make("reeb", 1, {{"k", k}});
    const auto tr = integrate(h, PhasePoint(0.0, {1.0}, {1.0}), 1e-3, 1000);
    // dv/dy = k, so wp(1) = wp(0) exp(-k)
    worst_wp = std::max(worst_wp, std::abs(tr.nodes.back().wp[0] / std::exp(-k) - 1.0));
    const auto cs = constraint_series(h, tr);
    worst_drift = std::max(worst_drift, cs.drift);
    o.require(std::abs(cs.values.front() - 1.0) < 1e-12, "eps=1 (k=" + num(k) + ")");
  }
  o.require(worst_wp <= 1e-8, "wp rel err " + num(worst_wp) + " <= 1e-8");
  o.require(worst_drift <= 1e-8, "eps drift " + num(worst_drift) + " <= 1e-8");
  return o;
}

// 2
Outcome canonical_relations() {
  Outcome o;
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (std::size_t n = 1; n <= 3; ++n) {
    for (int s = 0; s < 1000; ++s) {
      const auto p = random_point(rng, n, 10.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const auto yi = coordinate_function(n, 1 + i), yj = coordinate_function(n, 1 + j);
          const auto wi = coordinate_function(n, 1 + n + i), wj = coordinate_function(n, 1 + n + j);
          worst = std::max({worst, std::abs(poisson_bracket(yi, wj, p) - (i == j ? 1.0 : 0.0)),
                            std::abs(poisson_bracket(yi, yj, p)), std::abs(poisson_bracket(wi, wj, p))});
        }
    }
  }
  o.require(worst <= 1e-8, "max residual " + num(worst) + " <= 1e-8");
  return o;
}

// 3
Outcome contact_certification() {
  Outcome o;
  std::mt19937_64 rng(3);
  double worst = 0.0;
  bool darboux_pass = true, zero_fails = true;
  for (std::size_t n = 1; n <= 3; ++n) {
    std::vector<PhasePoint> pts;
    for (int s = 0; s < 100; ++s) pts.push_back(random_point(rng, n, 5.0));
    const auto d = forms::certify_contact(models::make("darboux", n), pts);
    for (double v : d.volume) worst = std::max(worst, std::abs(std::abs(v) - 1.0));
    darboux_pass = darboux_pass && d.pass;
    zero_fails = zero_fails && !forms::certify_contact(models::make("zero", n), pts).pass;
  }
  o.require(darboux_pass, "darboux certified");
  o.require(worst <= 1e-6, "||vol| - 1| " + num(worst) + " <= 1e-6");
  o.require(zero_fails, "zero form rejected");
  return o;
}

// 4
Outcome conservation_order() {
  Outcome o;
  const auto h = models::make("reeb", 1, {{"k", 0.5}});
  std::vector<double> drift;
  for (double step : {4e-3, 2e-3, 1e-3}) {
    const auto tr = integrate(h, PhasePoint(0.0, {1.0}, {1.0}), step, static_cast<std::size_t>(std::llround(1.0 / step)));
    drift.push_back(constraint_series(h, tr).drift);
  }
  for (std::size_t i = 0; i + 1 < drift.size(); ++i) {
    const double ratio = drift[i + 1] > 0.0 ? drift[i] / drift[i + 1] : (drift[i] > 0.0 ? INFINITY : NAN);
    o.require(ratio >= 12.0, "drift " + num(drift[i]) + " -> " + num(drift[i + 1]) + " ratio " + num(ratio) + " >= 12");
  }
  return o;
}

// 5
double heat_sup_error(std::size_t m, double* variance, double* mass_rate) {
  const auto g = GridSpec::line(-10.0, 10.0, m, Boundary::periodic);
  auto p0 = GridDensity::from_function(g, [](const std::vector<double>& y) { return std::exp(-0.5 * y[0] * y[0] / 0.01); });
  p0.normalize();
  CoefficientSet d;
  d.set({0}, 0.0);
  d.set({0, 0}, 1.0);
  const auto steps = static_cast<std::size_t>(std::ceil(1.0 / max_stable_dt(d, g)));
  const auto r = evolve(d, p0, 1.0 / static_cast<double>(steps), steps);
  if (variance) *variance = r.density.variance(0);
  if (mass_rate) *mass_rate = r.max_mass_drift;
  double err = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double y = g.centre(0, i);
    err = std::max(err, std::abs(r.density.values[i] - std::exp(-0.5 * y * y / 2.01) / std::sqrt(2 * M_PI * 2.01)));
  }
  return err;
}

Outcome heat_kernel() {
  Outcome o;
  double var = 0.0, mass = 0.0;
  const double e401 = heat_sup_error(401, &var, &mass);
  const double e201 = heat_sup_error(201, nullptr, nullptr);
  o.require(std::abs(var / 2.01 - 1.0) <= 0.01, "variance " + num(var) + " = 2.01 +- 1%");
  o.require(e201 / e401 >= 3.5, "refinement ratio " + num(e201 / e401) + " >= 3.5");
  o.require(mass <= 1e-9, "mass drift/unit time " + num(mass) + " <= 1e-9");
  return o;
}

// 6
Outcome stationary() {
  Outcome o;
  const auto g = GridSpec::line(0.0, 1.0, 200, Boundary::reflecting);
  double err = 0.0;
  for (auto [a, dd] : {std::pair{1.0, 1.0}, std::pair{-2.0, 1.0}, std::pair{0.5, 0.25}}) {
    const auto r = stationary_second_order({a}, {dd}, g);
    const double rate = a / dd;
    const double z = (std::exp(rate) - 1.0) / rate;
    for (std::size_t i = 0; i < g.m; ++i)
      err = std::max(err, std::abs(r.density.values[i] - std::exp(rate * g.centre(0, i)) / z));
  }
  o.require(err <= 1e-4, "n=1 sup err " + num(err) + " <= 1e-4");
  const auto g2 = GridSpec::square(0.0, 1.0, 0.0, 1.0, 64, Boundary::reflecting);
  const auto r2 = stationary_second_order({0.5, -0.25}, {1.0, 0.2, 0.2, 0.6}, g2);
  o.require(r2.residual <= 1e-6, "n=2 residual " + num(r2.residual) + " <= 1e-6");
  return o;
}

// 7
Outcome cumulant_calibration() {
  Outcome o;
  const auto times = uniform_times(1.0, 10);
  IncrementModel brown;
  brown.sigma2 = {2.0};
  const auto tb = moments_to_cumulants(sample_paths(brown, 100000, times, 1001), 3);
  const auto d = estimate_D(tb, Normalization::standard);
  const double zd = std::abs(d.get({0, 0}) - 1.0) / d.standard_error.at({0, 0});
  o.require(zd <= 4.0, "D(1,1) z " + num(zd) + " <= 4");
  const std::size_t last = times.size() - 1;
  const double z3 = std::abs(tb.at(last, {0, 0, 0})) / tb.error_at(last, {0, 0, 0});
  o.require(z3 <= 4.0, "k3 z " + num(z3) + " <= 4");

  IncrementModel pois;
  pois.kind = IncrementModel::Kind::poisson;
  pois.lambda = 2.0;
  const auto tp = moments_to_cumulants(sample_paths(pois, 100000, times, 1002), 4);
  double zp = 0.0;
  for (const MultiIndex& a : {MultiIndex{0}, MultiIndex{0, 0}, MultiIndex{0, 0, 0}, MultiIndex{0, 0, 0, 0}})
    zp = std::max(zp, std::abs(tp.at(last, a) - 2.0) / tp.error_at(last, a));
  o.require(zp <= 5.0, "poisson max z " + num(zp) + " <= 5");

  const auto small = moments_to_cumulants(sample_paths(brown, 25000, times, 1003), 2);
  const std::size_t k = small.position({0, 0});
  const double ratio = small.slope_error[k] / tb.slope_error[tb.position({0, 0})];
  o.require(std::abs(ratio - 2.0) <= 0.5, "SE ratio N/4N " + num(ratio) + " = 2 +- 25%");
  return o;
}

// 8
Outcome holonomy() {
  Outcome o;
  const Point a{0, 0}, b{1, 0}, c{1, 1}, bp{0, 1};
  FluxField f;
  f.n = 2;
  f.wp = [](const Point& y) { return Point{0.0, y[0]}; };
  const auto pd = path_dependence_experiment(f, a, b, bp, c, 1000);
  o.require(std::abs(pd.loop - 1.0) <= 1e-6, "loop " + num(pd.loop) + " = 1 +- 1e-6");
  o.require(std::abs(pd.difference - pd.loop) <= 1e-10, "difference-loop " + num(std::abs(pd.difference - pd.loop)) + " <= 1e-10");
  FluxField ex;
  ex.n = 2;
  ex.wp = [](const Point& y) { return Point{y[1] * std::cos(y[0]), std::sin(y[0]) + 2 * y[1]}; };
  const double loop = std::abs(path_dependence_experiment(ex, a, b, bp, c, 1000).loop);
  o.require(loop <= 1e-6, "exact-form loop " + num(loop) + " <= 1e-6");
  return o;
}

// 9
Outcome least_constraint() {
  Outcome o;
  const auto h = models::make("reeb", 1, {{"k", 0.5}});
  const auto sol = DiscretePath::from_trajectory(integrate(h, PhasePoint(0.0, {1.0}, {1.0}), 1e-3, 1000));
  auto bump = [&](double eta) {
    DiscretePath p = sol;
    for (std::size_t k = 1; k + 1 < p.nodes.size(); ++k) {
      const double s = std::sin(M_PI * p.nodes[k].t);
      p.nodes[k].y[0] += eta * s;
      p.nodes[k].wp[0] += eta * s;
    }
    return p;
  };
  const double s0 = action(h, sol);
  std::vector<double> lx, ly;
  for (double eta : {1e-1, 1e-2, 1e-3, 1e-4}) {
    lx.push_back(std::log(eta));
    ly.push_back(std::log(std::abs(action(h, bump(eta)) - s0)));
  }
  double mx = 0, my = 0, sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / 4.0;
    my += ly[i] / 4.0;
  }
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  o.require(std::abs(slope - 2.0) <= 0.1, "slope " + num(slope) + " = 2 +- 0.1");

  const auto start = bump(1e-2);
  const auto ga = first_variation(h, start).residuals;
  const auto gf = finite_difference_gradient(h, start);
  double num2 = 0, den = 0;
  for (std::size_t i = 0; i < ga.size(); ++i) {
    num2 += (ga[i] - gf[i]) * (ga[i] - gf[i]);
    den += gf[i] * gf[i];
  }
  const double rel = std::sqrt(num2 / den);
  o.require(rel <= 1e-6, "gradient rel err " + num(rel) + " <= 1e-6");
  const auto r = descend(h, start);
  o.require(r.grad_norm <= 1e-5 && r.iterations <= 500,
            "descent gradNorm " + num(r.grad_norm) + " in " + std::to_string(r.iterations) + " iterations");
  return o;
}

// 10
std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string without_wall_time(const std::string& text) {
  std::istringstream is(text);
  std::string out;
  for (std::string line; std::getline(is, line);)
    if (line.find("\"wall_time_s\"") == std::string::npos) out += line + "\n";
  return out;
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "contactdyn_acceptance";
  fs::remove_all(root);
  const int saved = omp_get_max_threads();
  std::size_t compared = 0;
  for (const auto& s : scenario::list_scenarios(CONTACTDYN_SCENARIO_DIR)) {
    std::vector<fs::path> dirs;
    int run_no = 0;
    for (int threads : {1, 1, 4}) {
      omp_set_num_threads(threads);
      scenario::RunOptions opt;
      opt.config_path = s.path;
      opt.out_dir = (root / s.name / std::to_string(run_no++)).string();
      opt.quiet = true;
      const auto r = scenario::run(opt);
      if (r.exit_code != 0) o.require(false, s.name + " exit " + std::to_string(r.exit_code));
      dirs.push_back(opt.out_dir);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const auto name = entry.path().filename();
      const std::string ref = without_wall_time(slurp(dirs[0] / name));
      for (std::size_t k = 1; k < dirs.size(); ++k) {
        if (without_wall_time(slurp(dirs[k] / name)) != ref) {
          o.require(false, s.name + "/" + name.string() + " differs in run " + std::to_string(k));
        }
      }
      ++compared;
    }
  }
  omp_set_num_threads(saved);
  o.require(compared > 0, std::to_string(compared) + " files identical across runs and 1/4 workers");
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> all{
      {1, "reeb benchmark", 1.0, reeb_benchmark},
      {2, "canonical relations", 1.0, canonical_relations},
      {3, "contact certification", 1.0, contact_certification},
      {4, "conservation order", 5.0, conservation_order},
      {5, "heat kernel", 30.0, heat_kernel},
      {6, "stationary second order", 10.0, stationary},
      {7, "cumulant calibration", 60.0, cumulant_calibration},
      {8, "holonomy", 1.0, holonomy},
      {9, "least constraint", 30.0, least_constraint},
      {10, "determinism", 120.0, determinism},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < c.budget_s, "time " + num(secs) + " s < " + num(c.budget_s) + " s");
    if (!o.pass) ++failed;
    std::printf("criterion %2d %s  %-24s %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
