#include "contactdyn/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "contactdyn/config.hpp"
#include "contactdyn/cumulants.hpp"
#include "contactdyn/dynamics.hpp"
#include "contactdyn/error.hpp"
#include "contactdyn/forms.hpp"
#include "contactdyn/io.hpp"
#include "contactdyn/kinetic.hpp"
#include "contactdyn/models.hpp"
#include "contactdyn/random.hpp"
#include "contactdyn/transport.hpp"
#include "contactdyn/variational.hpp"

namespace contactdyn::scenario {

using json = nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& kind_names() {
  static const std::vector<std::string> k{"flow", "kinetic", "stationary", "estimate", "holonomy", "action",
                                          "invariants"};
  return k;
}

std::string to_string(Kind k) { return kind_names()[static_cast<std::size_t>(k)]; }

std::optional<Kind> parse_kind(const std::string& s) {
  const auto& k = kind_names();
  auto it = std::find(k.begin(), k.end(), s);
  if (it == k.end()) return std::nullopt;
  return static_cast<Kind>(it - k.begin());
}

json RunReport::to_json() const {
  json a = json::array();
  for (const auto& x : assertions) {
    a.push_back({{"name", x.name}, {"pass", x.pass}, {"value", x.value}, {"threshold", x.threshold}});
  }
  return {{"scenario", scenario},   {"kind", kind},       {"tool_version", version}, {"config_hash", config_hash},
          {"seed", seed},           {"wall_time_s", wall_time}, {"files", files},    {"assertions", a},
          {"metrics", metrics},     {"status", status},   {"exit_code", exit_code},  {"message", message}};
}

namespace {

using config::ValidationError;

// Typed view of one config table that remembers which keys were read, so
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_->is_object()) throw ValidationError("field '" + path_ + "': expected a table");
  }

  bool has(const std::string& key) const { return node_ && node_->contains(key); }

  Section sub(const std::string& key, bool required = true) {
    used_.insert(key);
    if (!has(key)) {
      if (required) throw ValidationError("missing table '" + field(key) + "'");
      return Section(nullptr, field(key));
    }
    return Section(&node_->at(key), field(key));
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const json* v = get(key, fallback.has_value());
    if (!v) return *fallback;
    if (!v->is_number()) throw ValidationError("field '" + field(key) + "': expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) throw ValidationError("field '" + field(key) + "': must be finite");
    return d;
  }

  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const double d = number(key, fallback);
    if (!(d > 0.0)) throw ValidationError("field '" + field(key) + "': must be positive");
    return d;
  }

  std::uint64_t count(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt) {
    const json* v = get(key, fallback.has_value());
    if (!v) return *fallback;
    if (!v->is_number_integer() || v->get<long long>() < 0) {
      throw ValidationError("field '" + field(key) + "': expected a non-negative integer");
    }
    return v->get<std::uint64_t>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const json* v = get(key, fallback.has_value());
    if (!v) return *fallback;
    if (!v->is_string()) throw ValidationError("field '" + field(key) + "': expected a string");
    return v->get<std::string>();
  }

  bool flag(const std::string& key, std::optional<bool> fallback = std::nullopt) {
    const json* v = get(key, fallback.has_value());
    if (!v) return *fallback;
    if (!v->is_boolean()) throw ValidationError("field '" + field(key) + "': expected true or false");
    return v->get<bool>();
  }

  std::vector<double> vec(const std::string& key, std::optional<std::size_t> len = std::nullopt,
                          std::optional<std::vector<double>> fallback = std::nullopt) {
    const json* v = get(key, fallback.has_value());
    if (!v) return *fallback;
    auto out = to_vec(*v, field(key));
    if (len && out.size() != *len) {
      throw ValidationError("field '" + field(key) + "': expected " + std::to_string(*len) + " entries, got " +
                            std::to_string(out.size()));
    }
    return out;
  }

  std::vector<std::vector<double>> matrix(const std::string& key) {
    const json* v = get(key, false);
    if (!v->is_array()) throw ValidationError("field '" + field(key) + "': expected an array of arrays");
    std::vector<std::vector<double>> out;
    for (const auto& row : *v) out.push_back(to_vec(row, field(key)));
    return out;
  }

  /// Numeric entries not yet consumed (model parameters, coefficient tables).
  std::map<std::string, double> remaining_numbers() {
    std::map<std::string, double> out;
    if (!node_) return out;
    for (const auto& [k, v] : node_->items()) {
      if (used_.count(k)) continue;
      if (!v.is_number()) throw ValidationError("field '" + field(k) + "': expected a number");
      out[k] = v.get<double>();
      used_.insert(k);
    }
    return out;
  }

  void finish() const {
    if (!node_) return;
    for (const auto& [k, v] : node_->items()) {
      if (!used_.count(k)) throw ValidationError("unknown key '" + field(k) + "'");
    }
  }

  const std::string& path() const { return path_; }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json* node_;
  std::string path_;
  std::set<std::string> used_;

  const json* get(const std::string& key, bool optional) {
    used_.insert(key);
    if (!has(key)) {
      if (optional) return nullptr;
      throw ValidationError("missing field '" + field(key) + "'");
    }
    return &node_->at(key);
  }

  static std::vector<double> to_vec(const json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ValidationError("field '" + where + "': expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ValidationError("field '" + where + "': expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
};

// Output sink for one run: tracks produced files.
struct Output {
  fs::path dir;
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& content) {
    io::write_text_file((dir / name).string(), content);
    files.push_back(name);
  }
};

struct Context {
  Section& root;
  Output& out;
  RunReport& report;
  std::uint64_t seed;
  fs::path config_dir;
};

void check(RunReport& r, const std::string& name, bool pass, double value, double threshold) {
  r.assertions.push_back({name, pass, value, threshold});
}

// Marker for a run that produced non-finite state.
struct Divergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelSpec {
  Hamiltonian h;
  std::string name;
  std::size_t n = 1;
  std::map<std::string, double> params;
};

ModelSpec read_model(Section& root) {
  Section m = root.sub("model");
  ModelSpec spec;
  spec.name = m.text("name");
  spec.n = m.count("n", 1);
  spec.params = m.remaining_numbers();
  m.finish();
  try {
    spec.h = models::make(spec.name, spec.n, spec.params);
  } catch (const Rejected& e) {
    throw ValidationError("field 'model': " + std::string(e.what()));
  }
  return spec;
}

struct FlowSpec {
  PhasePoint p0;
  double step = 0.0;
  std::size_t steps = 0;
};

FlowSpec read_flow(Section& root, std::size_t n) {
  Section f = root.sub("flow");
  FlowSpec s;
  s.p0.t = f.number("t0", 0.0);
  s.p0.y = f.vec("y0", n);
  s.p0.wp = f.vec("wp0", n);
  s.step = f.positive("step");
  s.steps = f.count("steps");
  if (s.steps < 1) throw ValidationError("field 'flow.steps': must be >= 1");
  f.finish();
  return s;
}

std::string trajectory_csv(const Trajectory& tr, const ConstraintSeries& cs) {
  std::ostringstream os;
  write_trajectory_csv(os, tr, cs);
  return os.str();
}

json vec_json(const std::vector<double>& v) { return json(v); }

// ---------------------------------------------------------------- flow
void run_flow(Context& c) {
  ModelSpec model = read_model(c.root);
  FlowSpec fl = read_flow(c.root, model.n);
  Section chk = c.root.sub("checks", false);
  const std::optional<double> max_drift = chk.has("max_eps_drift") ? std::optional(chk.positive("max_eps_drift")) : std::nullopt;
  const bool closed = chk.flag("closed_form", false);
  const double closed_tol = chk.positive("closed_form_rel_tol", 1e-8);
  chk.finish();
  if (closed && model.name != "reeb") throw ValidationError("field 'checks.closed_form': only the reeb model has one");

  const Trajectory tr = integrate(model.h, fl.p0, fl.step, fl.steps, model.name);
  const ConstraintSeries cs = constraint_series(model.h, tr);
  c.out.write("trajectory.csv", trajectory_csv(tr, cs));
  const auto& last = tr.nodes.back();
  c.report.metrics["eps_drift"] = cs.drift;
  c.report.metrics["eps_initial"] = cs.values.front();
  c.report.metrics["nodes"] = tr.nodes.size();
  c.report.metrics["t_final"] = last.t;
  c.report.metrics["y_final"] = vec_json(last.y);
  c.report.metrics["wp_final"] = vec_json(last.wp);
  c.report.metrics["diverged"] = tr.diverged;
  if (tr.diverged) throw Divergence("trajectory diverged at step " + std::to_string(tr.divergence_step));

  if (max_drift) check(c.report, "eps_drift", cs.drift <= *max_drift, cs.drift, *max_drift);
  if (closed) {
    // v(y) = c + k y: wp(t) = wp0 exp(-k t), y(t) = (y0 + c/k) exp(k t) - c/k
    const double k = model.params.count("k") ? model.params.at("k") : models::defaults("reeb").at("k");
    const double cc = model.params.count("c") ? model.params.at("c") : models::defaults("reeb").at("c");
    const double t = last.t - fl.p0.t;
    double wp_err = 0.0, y_err = 0.0;
    for (std::size_t i = 0; i < model.n; ++i) {
      const double wp_exact = fl.p0.wp[i] * std::exp(-k * t);
      const double y_exact = k != 0.0 ? (fl.p0.y[i] + cc / k) * std::exp(k * t) - cc / k : fl.p0.y[i] + cc * t;
      wp_err = std::max(wp_err, std::abs(last.wp[i] - wp_exact) / std::abs(wp_exact));
      y_err = std::max(y_err, std::abs(last.y[i] - y_exact) / std::max(1.0, std::abs(y_exact)));
    }
    check(c.report, "wp_closed_form_rel_error", wp_err <= closed_tol, wp_err, closed_tol);
    check(c.report, "y_closed_form_rel_error", y_err <= closed_tol, y_err, closed_tol);
  }
  c.out.write("plot.py",
              "import pandas as pd\nimport matplotlib.pyplot as plt\n\n"
              "d = pd.read_csv('trajectory.csv')\n"
              "fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))\n"
              "for col in d.columns[1:-1]:\n    ax[0].plot(d['t'], d[col], label=col)\n"
              "ax[0].legend()\nax[1].plot(d['t'], d['eps'] - d['eps'][0])\nax[1].set_title('eps drift')\n"
              "fig.tight_layout()\nfig.savefig('trajectory.png', dpi=120)\n");
}

// ---------------------------------------------------------------- grids
GridSpec read_grid(Section& root) {
  Section g = root.sub("grid");
  GridSpec s;
  s.n = g.count("n", 1);
  if (s.n < 1 || s.n > 2) throw ValidationError("field 'grid.n': must be 1 or 2");
  s.lo = g.vec("min", s.n);
  s.hi = g.vec("max", s.n);
  s.m = g.count("m");
  try {
    s.bc = parse_boundary(g.text("bc", "periodic"));
  } catch (const Rejected& e) {
    throw ValidationError("field 'grid.bc': " + std::string(e.what()));
  }
  g.finish();
  try {
    s.validate();
  } catch (const ContractViolation& e) {
    throw ValidationError("table 'grid': " + std::string(e.what()));
  }
  return s;
}

Normalization read_normalization(Section& s) {
  try {
    return parse_normalization(s.text("normalization", "standard"));
  } catch (const Rejected& e) {
    throw ValidationError("field '" + s.field("normalization") + "': " + e.what());
  }
}

std::string density_csv(const GridDensity& p) {
  std::ostringstream os;
  write_density_csv(os, p);
  return os.str();
}

const char* kDensityPlot =
    "import pandas as pd\nimport matplotlib.pyplot as plt\nimport sys\n\n"
    "names = sys.argv[1:] or ['density_final.csv']\n"
    "fig, ax = plt.subplots()\n"
    "for name in names:\n"
    "    d = pd.read_csv(name)\n"
    "    if 'y2' in d.columns:\n"
    "        piv = d.pivot(index='y2', columns='y1', values='p')\n"
    "        ax.imshow(piv.values, origin='lower', extent=[d.y1.min(), d.y1.max(), d.y2.min(), d.y2.max()])\n"
    "    else:\n"
    "        ax.plot(d['y1'], d['p'], label=name)\n"
    "ax.legend() if ax.get_legend_handles_labels()[0] else None\n"
    "fig.savefig('density.png', dpi=120)\n";

// ---------------------------------------------------------------- kinetic
void run_kinetic(Context& c) {
  const GridSpec grid = read_grid(c.root);
  Section co = c.root.sub("coefficients");
  CoefficientSet d;
  d.n = grid.n;
  d.normalization = read_normalization(co);
  Section dt = co.sub("D");
  for (const auto& [label, v] : dt.remaining_numbers()) {
    MultiIndex a;
    try {
      a = parse_label(label);
    } catch (const std::exception& e) {
      throw ValidationError("field '" + dt.field(label) + "': " + e.what());
    }
    if (a.empty() || a.size() > 4) throw ValidationError("field '" + dt.field(label) + "': order must be 1..4");
    for (auto ax : a)
      if (ax >= grid.n) throw ValidationError("field '" + dt.field(label) + "': axis out of range");
    d.set(a, v);
  }
  dt.finish();
  co.finish();

  Section ini = c.root.sub("initial");
  const std::string shape = ini.text("kind", "gaussian");
  GridDensity p0;
  if (shape == "gaussian") {
    const auto mean = ini.vec("mean", grid.n);
    const double var = ini.positive("variance");
    p0 = GridDensity::from_function(grid, [&](const std::vector<double>& y) {
      double q = 0.0;
      for (std::size_t a = 0; a < y.size(); ++a) q += (y[a] - mean[a]) * (y[a] - mean[a]);
      return std::exp(-0.5 * q / var);
    });
  } else if (shape == "uniform") {
    p0 = GridDensity::from_function(grid, [](const std::vector<double>&) { return 1.0; });
  } else {
    throw ValidationError("field 'initial.kind': expected 'gaussian' or 'uniform'");
  }
  ini.finish();
  p0.normalize();

  Section ev = c.root.sub("evolve");
  const double t_end = ev.positive("t_end");
  const double cfl = ev.positive("cfl", 0.25);
  EvolveOptions opt;
  opt.cfl = cfl;
  opt.clip_negative = ev.flag("clip", true);
  double step = 0.0;
  std::size_t steps = 0;
  if (ev.has("dt")) {
    step = ev.positive("dt");
    steps = static_cast<std::size_t>(std::llround(t_end / step));
    if (steps < 1 || std::abs(static_cast<double>(steps) * step - t_end) > 1e-9 * t_end) {
      throw ValidationError("field 'evolve.dt': t_end must be a whole number of steps");
    }
  } else {
    const double limit = max_stable_dt(d, grid) * cfl / 0.25;
    steps = std::isfinite(limit) ? static_cast<std::size_t>(std::ceil(t_end / limit - 1e-12)) : 1;
    steps = std::max<std::size_t>(steps, 1);
    step = t_end / static_cast<double>(steps);
  }
  ev.finish();

  Section chk = c.root.sub("checks", false);
  std::optional<double> want_var, want_mean;
  double var_tol = 0.01, mean_tol = 0.01;
  if (chk.has("final_variance")) {
    want_var = chk.number("final_variance");
    var_tol = chk.positive("variance_rel_tol", 0.01);
  }
  if (chk.has("mean_shift")) {
    want_mean = chk.number("mean_shift");
    mean_tol = chk.positive("mean_abs_tol", 0.01);
  }
  const double mass_tol = chk.positive("mass_tol_per_unit_time", 1e-9);
  chk.finish();

  EvolveResult r;
  try {
    r = evolve(d, p0, step, steps, opt);
  } catch (const Rejected& e) {
    throw ValidationError(std::string("table 'evolve': ") + e.what());
  } catch (const UnsupportedOrder& e) {
    throw ValidationError(std::string("table 'coefficients': ") + e.what());
  }
  c.out.write("density_initial.csv", density_csv(p0));
  c.out.write("density_final.csv", density_csv(r.density));
  c.out.write("plot.py", kDensityPlot);

  const double mean0 = p0.mean(0), mean1 = r.density.mean(0);
  const double var1 = r.density.variance(0);
  const double mass_rate = r.max_mass_drift / t_end;
  c.report.metrics["dt"] = step;
  c.report.metrics["steps"] = steps;
  c.report.metrics["final_variance"] = var1;
  c.report.metrics["initial_variance"] = p0.variance(0);
  c.report.metrics["mean_shift"] = mean1 - mean0;
  c.report.metrics["mass_drift"] = r.max_mass_drift;
  c.report.metrics["clip_events"] = r.clip_events;
  c.report.metrics["clipped_mass"] = r.clipped_mass;
  if (want_var) {
    const double rel = std::abs(var1 - *want_var) / std::abs(*want_var);
    check(c.report, "final_variance_rel_error", rel <= var_tol, rel, var_tol);
  }
  if (want_mean) {
    const double err = std::abs((mean1 - mean0) - *want_mean);
    check(c.report, "mean_shift_abs_error", err <= mean_tol, err, mean_tol);
  }
  check(c.report, "mass_drift_per_unit_time", mass_rate <= mass_tol, mass_rate, mass_tol);
}

// ---------------------------------------------------------------- stationary
void run_stationary(Context& c) {
  const GridSpec grid = read_grid(c.root);
  Section co = c.root.sub("coefficients");
  const Normalization norm = read_normalization(co);
  const auto drift = co.vec("drift", grid.n);
  const auto rows = co.matrix("diffusion");
  co.finish();
  if (rows.size() != grid.n) throw ValidationError("field 'coefficients.diffusion': expected n rows");
  std::vector<double> diff;
  for (const auto& r : rows) {
    if (r.size() != grid.n) throw ValidationError("field 'coefficients.diffusion': expected n columns");
    diff.insert(diff.end(), r.begin(), r.end());
  }
  Section chk = c.root.sub("checks", false);
  const double res_tol = chk.positive("residual_tol", 1e-6);
  const std::optional<double> an_tol = chk.has("analytic_tol") ? std::optional(chk.positive("analytic_tol")) : std::nullopt;
  chk.finish();

  StationaryResult r;
  try {
    r = stationary_second_order(drift, diff, grid, norm);
  } catch (const Rejected& e) {
    throw ValidationError(std::string("table 'coefficients': ") + e.what());
  }
  c.out.write("density.csv", density_csv(r.density));
  c.out.write("plot.py", std::string(kDensityPlot).replace(std::string(kDensityPlot).find("density_final.csv"), 17, "density.csv"));
  c.report.metrics["residual"] = r.residual;
  c.report.metrics["mass"] = r.density.mass();
  check(c.report, "generator_residual", r.residual <= res_tol, r.residual, res_tol);
  if (an_tol) {
    if (grid.n != 1) throw ValidationError("field 'checks.analytic_tol': closed form is one-dimensional");
    // zero flux: a1 P + a2 P' = 0 with a_k = s_k D_k
    const double rate = -order_sign(norm, 1) * drift[0] / (order_sign(norm, 2) * diff[0]);
    const double lo = grid.lo[0], hi = grid.hi[0];
    const double z = std::abs(rate) > 0.0 ? (std::exp(rate * (hi - lo)) - 1.0) / rate : hi - lo;
    double err = 0.0;
    for (std::size_t i = 0; i < grid.m; ++i) {
      const double y = grid.centre(0, i);
      err = std::max(err, std::abs(r.density.values[i] - std::exp(rate * (y - lo)) / z));
    }
    c.report.metrics["analytic_sup_error"] = err;
    check(c.report, "analytic_sup_error", err <= *an_tol, err, *an_tol);
  }
}

// ---------------------------------------------------------------- estimate
void run_estimate(Context& c) {
  Section m = c.root.sub("model");
  IncrementModel model;
  const std::string kind = m.text("kind");
  model.n = m.count("n", 1);
  if (kind == "gaussian") {
    model.kind = IncrementModel::Kind::gaussian;
    model.mu = m.vec("mu", model.n);
    model.sigma2 = m.vec("sigma2", model.n);
  } else if (kind == "poisson") {
    model.kind = IncrementModel::Kind::poisson;
    model.lambda = m.positive("lambda");
    model.jump = m.vec("jump", model.n, std::vector<double>(model.n, 1.0));
  } else if (kind == "table") {
    model.kind = IncrementModel::Kind::table;
    fs::path p = m.text("path");
    if (p.is_relative()) p = c.config_dir / p;
    if (!fs::exists(p)) throw ValidationError("field 'model.path': file not found: " + p.string());
    model.table_path = p.string();
  } else {
    throw ValidationError("field 'model.kind': expected gaussian, poisson or table");
  }
  m.finish();
  try {
    model.validate();
  } catch (const Rejected& e) {
    throw ValidationError(std::string("table 'model': ") + e.what());
  }

  Section en = c.root.sub("ensemble");
  const std::size_t samples = en.count("samples", 0);
  const double t_end = en.positive("t_end", 1.0);
  const std::size_t intervals = en.count("intervals", 10);
  const std::size_t order = en.count("order", 2);
  const bool export_ensemble = en.flag("export", false);
  en.finish();
  if (order < 1 || order > 4) throw ValidationError("field 'ensemble.order': must be 1..4");
  if (model.kind != IncrementModel::Kind::table && samples < 2) {
    throw ValidationError("field 'ensemble.samples': need at least 2");
  }
  if (intervals < 2) throw ValidationError("field 'ensemble.intervals': need at least 2");

  Section es = c.root.sub("estimate", false);
  const Normalization norm = read_normalization(es);
  ConnectionCoefficients conn;
  conn.n = model.n;
  if (es.has("connection")) {
    conn.a = es.vec("connection");
    if (conn.a.size() != model.n * model.n * model.n) {
      throw ValidationError("field 'estimate.connection': expected n^3 entries");
    }
  }
  const auto constant = es.vec("constant", model.n, std::vector<double>{});
  es.finish();

  Section chk = c.root.sub("checks", false);
  const double sigma_tol = chk.positive("sigma_tol", 4.0);
  std::map<MultiIndex, double> expect_d;
  if (chk.has("D")) {
    Section cd = chk.sub("D");
    for (const auto& [label, v] : cd.remaining_numbers()) expect_d[parse_label(label)] = v;
    cd.finish();
  }
  std::map<MultiIndex, double> expect_k;
  if (chk.has("cumulant_at_end")) {
    Section ck = chk.sub("cumulant_at_end");
    for (const auto& [label, v] : ck.remaining_numbers()) expect_k[parse_label(label)] = v;
    ck.finish();
  }
  const bool b_vs_d = chk.flag("b_matches_minus_drift", false);
  chk.finish();

  const PathEnsemble e = sample_paths(model, samples, uniform_times(t_end, intervals), c.seed);
  const CumulantTable table = moments_to_cumulants(e, order);
  const CoefficientSet dset = estimate_D(table, norm);
  const BCoefficients b = estimate_B(e, conn, order, constant);

  {
    std::ostringstream os;
    io::CsvWriter w(os, {"t", "index", "value", "error"});
    for (std::size_t j = 0; j < table.times.size(); ++j)
      for (std::size_t k = 0; k < table.index.size(); ++k)
        w.row(std::vector<std::string>{io::format_double(table.times[j]), "\"" + to_label(table.index[k]) + "\"",
                                       io::format_double(table.value[j][k]), io::format_double(table.error[j][k])});
    c.out.write("cumulants.csv", os.str());
  }
  {
    std::ostringstream os;
    io::CsvWriter w(os, {"coefficient", "index", "lower", "value", "error"});
    for (const auto& [a, v] : dset.entries)
      w.row(std::vector<std::string>{"D", "\"" + to_label(a) + "\"", "0", io::format_double(v),
                                     io::format_double(dset.standard_error.at(a))});
    for (const auto& [key, v] : b.entries)
      w.row(std::vector<std::string>{"B", "\"" + to_label(key.first) + "\"", std::to_string(key.second + 1),
                                     io::format_double(v), io::format_double(b.standard_error.at(key))});
    c.out.write("coefficients.csv", os.str());
  }
  if (export_ensemble) {
    std::ostringstream os;
    write_ensemble_csv(os, e);
    c.out.write("ensemble.csv", os.str());
  }
  c.out.write("plot.py",
              "import pandas as pd\nimport matplotlib.pyplot as plt\n\n"
              "d = pd.read_csv('cumulants.csv')\nfig, ax = plt.subplots()\n"
              "for idx, g in d.groupby('index'):\n    ax.errorbar(g['t'], g['value'], yerr=g['error'], label=idx)\n"
              "ax.legend()\nfig.savefig('cumulants.png', dpi=120)\n");

  c.report.metrics["samples"] = e.samples;
  c.report.metrics["model"] = e.model;
  json dj = json::object();
  for (const auto& [a, v] : dset.entries) dj[to_label(a)] = {{"value", v}, {"error", dset.standard_error.at(a)}};
  c.report.metrics["D"] = dj;
  if (!table.warnings.empty()) c.report.metrics["warnings"] = table.warnings;

  for (const auto& [a, want] : expect_d) {
    const double got = dset.get(a);
    const double se = dset.standard_error.count(a) ? dset.standard_error.at(a) : 0.0;
    const double z = se > 0.0 ? std::abs(got - want) / se : (got == want ? 0.0 : INFINITY);
    check(c.report, "D" + to_label(a) + "_sigmas", z <= sigma_tol, z, sigma_tol);
  }
  for (const auto& [a, want] : expect_k) {
    const std::size_t j = table.times.size() - 1;
    const double got = table.at(j, a), se = table.error_at(j, a);
    const double z = se > 0.0 ? std::abs(got - want) / se : (got == want ? 0.0 : INFINITY);
    check(c.report, "cumulant" + to_label(a) + "_sigmas", z <= sigma_tol, z, sigma_tol);
  }
  if (b_vs_d) {
    for (std::size_t i = 0; i < model.n; ++i) {
      const double bi = b.get({i}, i), di = dset.get({i});
      const double se = b.standard_error.count({{i}, i}) ? b.standard_error.at({{i}, i}) : 0.0;
      const double z = se > 0.0 ? std::abs(bi + di) / se : (bi == -di ? 0.0 : INFINITY);
      check(c.report, "B" + std::to_string(i + 1) + "(" + std::to_string(i + 1) + ")_plus_D_sigmas",
            z <= sigma_tol, z, sigma_tol);
    }
  }
}

// ---------------------------------------------------------------- holonomy
// wp_i(y) = sum_{a,b} coeff_i[a][b] y1^a y2^b
FluxField polynomial_flux(const std::vector<std::vector<double>>& c1, const std::vector<std::vector<double>>& c2) {
  FluxField f;
  f.n = 2;
  f.wp = [c1, c2](const Point& y) {
    auto poly = [&](const std::vector<std::vector<double>>& c) {
      double s = 0.0;
      for (std::size_t a = 0; a < c.size(); ++a)
        for (std::size_t b = 0; b < c[a].size(); ++b)
          s += c[a][b] * std::pow(y[0], static_cast<double>(a)) * std::pow(y[1], static_cast<double>(b));
      return s;
    };
    return Point{poly(c1), poly(c2)};
  };
  return f;
}

void run_holonomy(Context& c) {
  Section fx = c.root.sub("flux");
  const auto c1 = fx.matrix("wp1");
  const auto c2 = fx.matrix("wp2");
  fx.finish();
  Section pa = c.root.sub("paths");
  const Point a = pa.vec("a", 2), b = pa.vec("b", 2), bp = pa.vec("b_prime", 2), cc = pa.vec("c", 2);
  const std::size_t segments = pa.count("segments", 1000);
  pa.finish();
  if (segments < 1) throw ValidationError("field 'paths.segments': must be >= 1");
  Section chk = c.root.sub("checks", false);
  const std::optional<double> expected = chk.has("expected_loop") ? std::optional(chk.number("expected_loop")) : std::nullopt;
  const double loop_tol = chk.positive("loop_tol", 1e-6);
  const double id_tol = chk.positive("identity_tol", 1e-10);
  const double stokes_tol = chk.positive("stokes_tol", 1e-5);
  chk.finish();

  const FluxField f = polynomial_flux(c1, c2);
  PathDependence pd;
  BasePath p1, p2;
  try {
    pd = path_dependence_experiment(f, a, b, bp, cc, segments);
    p1 = polyline({a, b, cc}, segments);
    p2 = polyline({a, bp, cc}, segments);
  } catch (const ContractViolation& e) {
    throw ValidationError(std::string("table 'paths': ") + e.what());
  }
  {
    std::ostringstream os;
    write_transport_csv(os, p1, transport(f, p1));
    c.out.write("path_b.csv", os.str());
  }
  {
    std::ostringstream os;
    write_transport_csv(os, p2, transport(f, p2));
    c.out.write("path_b_prime.csv", os.str());
  }
  c.out.write("plot.py",
              "import pandas as pd\nimport matplotlib.pyplot as plt\n\n"
              "fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))\n"
              "for name in ['path_b.csv', 'path_b_prime.csv']:\n"
              "    d = pd.read_csv(name)\n    ax[0].plot(d['y1'], d['y2'], label=name)\n"
              "    ax[1].plot(d['s'], d['dP_cum'], label=name)\n"
              "ax[0].legend()\nfig.tight_layout()\nfig.savefig('holonomy.png', dpi=120)\n");
  // enclosed region A -> B -> C -> B'
  const double surface = curl_surface_integral(f, {a, b, cc, bp});
  c.report.metrics["delta_p_via_b"] = pd.via_b;
  c.report.metrics["delta_p_via_b_prime"] = pd.via_b_prime;
  c.report.metrics["difference"] = pd.difference;
  c.report.metrics["loop"] = pd.loop;
  c.report.metrics["curl_surface_integral"] = surface;
  const double id_err = std::abs(pd.difference - pd.loop);
  check(c.report, "difference_equals_loop", id_err <= id_tol, id_err, id_tol);
  const double st_err = std::abs(pd.loop - surface);
  check(c.report, "stokes", st_err <= stokes_tol, st_err, stokes_tol);
  if (expected) {
    const double err = std::abs(pd.loop - *expected);
    check(c.report, "loop_value", err <= loop_tol, err, loop_tol);
  }
}

// ---------------------------------------------------------------- action
DiscretePath perturbed(const DiscretePath& base, double eta) {
  DiscretePath p = base;
  const double t0 = base.nodes.front().t, t1 = base.nodes.back().t;
  for (std::size_t k = 1; k + 1 < p.nodes.size(); ++k) {
    const double s = std::sin(M_PI * (p.nodes[k].t - t0) / (t1 - t0));
    for (auto& v : p.nodes[k].y) v += eta * s;
    for (auto& v : p.nodes[k].wp) v += eta * s;
  }
  return p;
}

void run_action(Context& c) {
  ModelSpec model = read_model(c.root);
  FlowSpec fl = read_flow(c.root, model.n);
  Section pe = c.root.sub("perturbation", false);
  const auto etas = pe.vec("etas", std::nullopt, std::vector<double>{1e-1, 1e-2, 1e-3, 1e-4});
  pe.finish();
  if (etas.size() < 2) throw ValidationError("field 'perturbation.etas': need at least 2 values");
  for (double e : etas)
    if (!(e > 0.0)) throw ValidationError("field 'perturbation.etas': values must be positive");
  Section de = c.root.sub("descend", false);
  const double eta0 = de.positive("eta", 1e-2);
  DescendOptions dopt;
  dopt.max_iterations = de.count("max_iterations", 500);
  dopt.tolerance = de.positive("tolerance", 1e-5);
  dopt.rate = de.positive("rate", 1.0);
  de.finish();
  Section chk = c.root.sub("checks", false);
  const double want_slope = chk.number("slope", 2.0);
  const double slope_tol = chk.positive("slope_tol", 0.1);
  const double grad_tol = chk.positive("gradient_rel_tol", 1e-6);
  const double fd_step = chk.positive("fd_step", 1e-3);
  chk.finish();

  const Trajectory tr = integrate(model.h, fl.p0, fl.step, fl.steps, model.name);
  if (tr.diverged) throw Divergence("reference trajectory diverged");
  if (tr.nodes.size() < 3) throw ValidationError("field 'flow.steps': need at least 2 steps");
  const DiscretePath sol = DiscretePath::from_trajectory(tr);
  const double s0 = action(model.h, sol);
  const ActionReport at_sol = first_variation(model.h, sol);

  std::vector<double> lx, ly;
  {
    std::ostringstream os;
    io::CsvWriter w(os, {"eta", "action", "delta_action"});
    for (double eta : etas) {
      const double s = action(model.h, perturbed(sol, eta));
      w.row({eta, s, std::abs(s - s0)});
      lx.push_back(std::log(eta));
      ly.push_back(std::log(std::abs(s - s0)));
    }
    c.out.write("action_sweep.csv", os.str());
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(ly.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;

  const DiscretePath start = perturbed(sol, eta0);
  const auto ga = first_variation(model.h, start).residuals;
  const auto gf = finite_difference_gradient(model.h, start, fd_step);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ga.size(); ++i) {
    num += (ga[i] - gf[i]) * (ga[i] - gf[i]);
    den += gf[i] * gf[i];
  }
  const double grad_rel = std::sqrt(num / den);

  const DescendResult dr = descend(model.h, start, dopt);
  {
    Trajectory out;
    out.nodes = dr.path.nodes;
    out.step = fl.step;
    std::ostringstream os;
    write_trajectory_csv(os, out, constraint_series(model.h, out));
    c.out.write("descended_path.csv", os.str());
  }
  {
    std::ostringstream os;
    io::CsvWriter w(os, {"step", "objective"});
    for (std::size_t i = 0; i < dr.objective.size(); ++i) w.row({static_cast<double>(i), dr.objective[i]});
    c.out.write("descent.csv", os.str());
  }
  c.out.write("plot.py",
              "import numpy as np\nimport pandas as pd\nimport matplotlib.pyplot as plt\n\n"
              "d = pd.read_csv('action_sweep.csv')\nfig, ax = plt.subplots(1, 2, figsize=(9, 3.5))\n"
              "ax[0].loglog(d['eta'], d['delta_action'], 'o-')\nax[0].set_xlabel('eta')\n"
              "g = pd.read_csv('descent.csv')\nax[1].semilogy(g['step'], g['objective'])\n"
              "fig.tight_layout()\nfig.savefig('action.png', dpi=120)\n");

  c.report.metrics["action_solution"] = s0;
  c.report.metrics["grad_norm_solution"] = at_sol.grad_norm;
  c.report.metrics["path_norm"] = sol.norm();
  c.report.metrics["sweep_slope"] = slope;
  c.report.metrics["gradient_rel_error"] = grad_rel;
  c.report.metrics["descend_iterations"] = dr.iterations;
  c.report.metrics["descend_accepted_steps"] = dr.accepted_steps;
  c.report.metrics["descend_grad_norm"] = dr.grad_norm;
  c.report.metrics["descend_stalled"] = dr.stalled;
  check(c.report, "sweep_slope_error", std::abs(slope - want_slope) <= slope_tol, std::abs(slope - want_slope),
        slope_tol);
  check(c.report, "gradient_rel_error", grad_rel <= grad_tol, grad_rel, grad_tol);
  check(c.report, "descend_grad_norm", dr.converged, dr.grad_norm, dopt.tolerance);
}

// ---------------------------------------------------------------- invariants
void run_invariants(Context& c) {
  ModelSpec model = read_model(c.root);
  Section sa = c.root.sub("samples");
  const std::size_t count = sa.count("count", 1000);
  const auto lo = sa.vec("lo", std::nullopt, std::vector<double>{-1.0});
  const auto hi = sa.vec("hi", std::nullopt, std::vector<double>{1.0});
  sa.finish();
  const std::size_t dim = 2 * model.n + 1;
  auto widen = [&](std::vector<double> v, const char* key) {
    if (v.size() == 1) v.assign(dim, v[0]);
    if (v.size() != dim) throw ValidationError(std::string("field 'samples.") + key + "': expected 1 or 2n+1 entries");
    return v;
  };
  const auto blo = widen(lo, "lo"), bhi = widen(hi, "hi");
  if (count < 1) throw ValidationError("field 'samples.count': must be >= 1");
  Section chk = c.root.sub("checks", false);
  const double can_tol = chk.positive("canonical_tol", 1e-8);
  const double iota_tol = chk.positive("reeb_identity_tol", 1e-8);
  const double flow_tol = chk.positive("flow_kernel_tol", 1e-6);
  const std::optional<bool> expect_contact = chk.has("contact") ? std::optional(chk.flag("contact")) : std::nullopt;
  forms::CertifyOptions copt;
  copt.tau_vol = chk.positive("tau_vol", copt.tau_vol);
  copt.tau_ker = chk.positive("tau_ker", copt.tau_ker);
  chk.finish();

  std::vector<PhasePoint> pts;
  for (std::size_t s = 0; s < count; ++s) {
    SplitMix64 rng(c.seed, s);
    std::vector<double> x(dim);
    for (std::size_t j = 0; j < dim; ++j) x[j] = blo[j] + (bhi[j] - blo[j]) * rng.uniform();
    pts.push_back(PhasePoint::from_coords(x));
  }
  copt.seed = c.seed;
  const auto rep = forms::certify_contact(model.h, pts, copt);

  double can = 0.0, iota = 0.0, flow_kernel = 0.0;
  const auto eps = constraint_function(model.h);
  std::ostringstream os;
  io::CsvWriter w(os, {"sample", "volume", "kernel_gap", "canonical_residual", "iota_theta_plus_eps"});
  for (std::size_t s = 0; s < count; ++s) {
    const auto& p = pts[s];
    double cr = 0.0;
    for (std::size_t i = 0; i < model.n; ++i) {
      for (std::size_t j = 0; j < model.n; ++j) {
        const auto yi = coordinate_function(model.n, 1 + i), yj = coordinate_function(model.n, 1 + j);
        const auto wi = coordinate_function(model.n, 1 + model.n + i);
        const auto wj = coordinate_function(model.n, 1 + model.n + j);
        cr = std::max({cr, std::abs(poisson_bracket(yi, wj, p) - (i == j ? 1.0 : 0.0)),
                       std::abs(poisson_bracket(yi, yj, p)), std::abs(poisson_bracket(wi, wj, p))});
      }
    }
    const auto x = contact_vector_field(model.h, p);
    const auto theta = forms::contact_form_at(model.h, p);
    const double it = forms::interior_product(x, theta).get({}) + evaluate(eps, p);
    const auto dtheta = forms::exterior_derivative(forms::contact_form_field(model.h, model.n), p);
    flow_kernel = std::max(flow_kernel, forms::interior_product(x, dtheta).sup_norm());
    can = std::max(can, cr);
    iota = std::max(iota, std::abs(it));
    w.row({static_cast<double>(s), rep.volume[s], rep.kernel_gap[s], cr, it});
  }
  c.out.write("invariants.csv", os.str());
  c.out.write("plot.py",
              "import pandas as pd\nimport matplotlib.pyplot as plt\n\n"
              "d = pd.read_csv('invariants.csv')\nfig, ax = plt.subplots(1, 2, figsize=(9, 3.5))\n"
              "ax[0].hist(d['volume'], bins=40)\nax[0].set_title('volume coefficient')\n"
              "ax[1].hist(d['kernel_gap'], bins=40)\nax[1].set_title('kernel gap')\n"
              "fig.tight_layout()\nfig.savefig('invariants.png', dpi=120)\n");
  c.report.metrics["min_abs_volume"] = rep.min_abs_volume;
  c.report.metrics["min_kernel_gap"] = rep.min_kernel_gap;
  c.report.metrics["contact"] = rep.pass;
  c.report.metrics["canonical_residual"] = can;
  c.report.metrics["iota_theta_plus_eps"] = iota;
  c.report.metrics["iota_x_dtheta"] = flow_kernel;
  check(c.report, "canonical_relations", can <= can_tol, can, can_tol);
  check(c.report, "iota_theta_equals_minus_eps", iota <= iota_tol, iota, iota_tol);
  check(c.report, "iota_x_dtheta", flow_kernel <= flow_tol, flow_kernel, flow_tol);
  if (expect_contact) {
    check(c.report, *expect_contact ? "contact_certified" : "contact_rejected", rep.pass == *expect_contact,
          rep.min_abs_volume, copt.tau_vol);
  }
}

std::string resolve_out_dir(const RunOptions& opt, Section& root, const std::string& name) {
  const std::string from_config = root.text("out", "");
  if (!opt.out_dir.empty()) return opt.out_dir;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return (fs::path(env) / name).string();
  if (!from_config.empty()) return from_config;
  return (fs::path("out") / name).string();
}

}  // namespace

RunReport run(const RunOptions& options) {
  const auto t_start = std::chrono::steady_clock::now();
  RunReport report;
  report.version = CONTACTDYN_VERSION;
  Output out;
  auto finish = [&](const std::string& status, int code, const std::string& message) {
    report.status = status;
    report.exit_code = code;
    report.message = message;
  };

  json tree;
  try {
    tree = config::parse_file(options.config_path);
  } catch (const config::ParseError& e) {
    finish("validation_error", kValidation, std::string("parse error: ") + e.what());
    return report;
  } catch (const std::exception& e) {
    finish("validation_error", kValidation, e.what());
    return report;
  }
  report.config_hash = io::hex64(config::hash(tree));

  bool have_dir = false;
  try {
    Section root(&tree, "");
    report.scenario = root.text("name");
    const std::string kind_text = root.text("kind");
    const auto kind = parse_kind(kind_text);
    if (!kind) throw ValidationError("field 'kind': unknown kind '" + kind_text + "'");
    report.kind = kind_text;
    if (!options.expected_kind.empty() && options.expected_kind != kind_text) {
      throw ValidationError("field 'kind': scenario is '" + kind_text + "' but the '" + options.expected_kind +
                            "' subcommand was used");
    }
    root.text("description", "");
    report.seed = options.seed ? *options.seed : root.count("seed", 0);
    out.dir = resolve_out_dir(options, root, report.scenario);
    report.out_dir = out.dir.string();
    have_dir = true;

    Context ctx{root, out, report, report.seed, fs::absolute(options.config_path).parent_path()};
    switch (*kind) {
      case Kind::flow: run_flow(ctx); break;
      case Kind::kinetic: run_kinetic(ctx); break;
      case Kind::stationary: run_stationary(ctx); break;
      case Kind::estimate: run_estimate(ctx); break;
      case Kind::holonomy: run_holonomy(ctx); break;
      case Kind::action: run_action(ctx); break;
      case Kind::invariants: run_invariants(ctx); break;
    }
    root.finish();
    const bool ok = std::all_of(report.assertions.begin(), report.assertions.end(), [](const Assertion& a) { return a.pass; });
    if (ok) {
      finish("ok", kOk, "");
    } else {
      std::string failed;
      for (const auto& a : report.assertions)
        if (!a.pass) failed += (failed.empty() ? "" : ", ") + a.name;
      finish("assertion_failed", kAssertion, "failed: " + failed);
    }
  } catch (const ValidationError& e) {
    finish("validation_error", kValidation, e.what());
  } catch (const Divergence& e) {
    finish("diverged", kDivergence, e.what());
  } catch (const EvaluationError& e) {
    finish("diverged", kDivergence, e.what());
  } catch (const Rejected& e) {
    finish("validation_error", kValidation, e.what());
  } catch (const UnsupportedOrder& e) {
    finish("validation_error", kValidation, e.what());
  } catch (const std::exception& e) {
    finish("error", kInternal, e.what());
  }

  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (have_dir) {
    std::sort(out.files.begin(), out.files.end());
    out.files.push_back("report.json");
    report.files = out.files;
    try {
      out.write("report.json", report.to_json().dump(2) + "\n");
    } catch (const std::exception& e) {
      finish("error", kInternal, std::string("could not write report: ") + e.what());
    }
  }
  if (!options.quiet) {
    std::cout << report.scenario << " [" << report.kind << "] " << report.status;
    if (!report.message.empty()) std::cout << ": " << report.message;
    std::cout << "\n";
    for (const auto& a : report.assertions) {
      std::cout << "  " << (a.pass ? "pass " : "FAIL ") << a.name << " = " << io::format_double(a.value)
                << " (threshold " << io::format_double(a.threshold) << ")\n";
    }
    if (have_dir) std::cout << "  output: " << report.out_dir << "\n";
  }
  return report;
}

std::vector<Summary> list_scenarios(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw std::runtime_error("cannot read scenario directory " + dir);
  std::vector<Summary> out;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".toml") continue;
    Summary s;
    s.path = entry.path().string();
    try {
      const json t = config::parse_file(s.path);
      s.name = t.value("name", entry.path().stem().string());
      s.kind = t.value("kind", std::string("invalid"));
      s.description = t.value("description", std::string());
    } catch (const std::exception&) {
      s.name = entry.path().stem().string();
      s.kind = "invalid";
    }
    out.push_back(std::move(s));
  }
  if (ec) throw std::runtime_error("cannot read scenario directory " + dir + ": " + ec.message());
  std::sort(out.begin(), out.end(),
            [](const Summary& a, const Summary& b) { return std::tie(a.name, a.path) < std::tie(b.name, b.path); });
  for (std::size_t i = 0; i < out.size(); ++i) {
    const bool dup = (i > 0 && out[i - 1].name == out[i].name) || (i + 1 < out.size() && out[i + 1].name == out[i].name);
    out[i].label = dup ? out[i].name + " [" + out[i].path + "]" : out[i].name;
  }
  return out;
}

}  // namespace contactdyn::scenario
