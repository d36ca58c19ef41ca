#include "contactdyn/models.hpp"

#include "contactdyn/error.hpp"

namespace contactdyn::models {

namespace {

const std::map<std::string, std::map<std::string, double>>& catalogue() {
  static const std::map<std::string, std::map<std::string, double>> c{
      {"constant_velocity", {{"c", 1.0}}},
      {"darboux", {}},
      {"harmonic", {{"omega", 1.0}}},
      {"quadratic", {}},
      {"quadratic_field", {{"a", 0.5}}},
      {"reeb", {{"c", 0.0}, {"k", 0.5}}},
      {"zero", {}},
  };
  return c;
}

}  // namespace

std::vector<std::string> names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : catalogue()) out.push_back(k);
  return out;
}

std::map<std::string, double> defaults(const std::string& name) {
  auto it = catalogue().find(name);
  if (it == catalogue().end()) throw Rejected("unknown model '" + name + "'");
  return it->second;
}

Hamiltonian make(const std::string& name, std::size_t n, const std::map<std::string, double>& params) {
  if (n < 1) throw Rejected("model dimension n must be >= 1");
  auto p = defaults(name);
  for (const auto& [k, v] : params) {
    if (!p.count(k)) throw Rejected("model '" + name + "' has no parameter '" + k + "'");
    p[k] = v;
  }
  Hamiltonian h;
  h.name = name;
  if (name == "reeb") {
    const double c = p["c"], k = p["k"];
    h.value = [c, k](const PhasePoint& x) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.n(); ++i) s += x.wp[i] * (c + k * x.y[i]);
      return s - 1.0;
    };
    h.grad = [c, k](const PhasePoint& x) {
      const std::size_t m = x.n();
      std::vector<double> g(x.dimension(), 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        g[1 + i] = k * x.wp[i];
        g[1 + m + i] = c + k * x.y[i];
      }
      return g;
    };
  } else if (name == "constant_velocity") {
    const double c = p["c"];
    h.value = [c](const PhasePoint& x) {
      double s = 0.0;
      for (double w : x.wp) s += c * w;
      return s;
    };
    h.grad = [c](const PhasePoint& x) {
      std::vector<double> g(x.dimension(), 0.0);
      for (std::size_t i = 0; i < x.n(); ++i) g[1 + x.n() + i] = c;
      return g;
    };
  } else if (name == "quadratic") {
    h.value = [](const PhasePoint& x) {
      double s = 0.0;
      for (double w : x.wp) s += 0.5 * w * w;
      return s;
    };
    h.grad = [](const PhasePoint& x) {
      std::vector<double> g(x.dimension(), 0.0);
      for (std::size_t i = 0; i < x.n(); ++i) g[1 + x.n() + i] = x.wp[i];
      return g;
    };
  } else if (name == "quadratic_field") {
    const double a = p["a"];
    h.value = [a](const PhasePoint& x) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.n(); ++i) s += 0.5 * x.wp[i] * x.wp[i] * (1.0 + a * x.y[i] * x.y[i]);
      return s;
    };
    h.grad = [a](const PhasePoint& x) {
      const std::size_t m = x.n();
      std::vector<double> g(x.dimension(), 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        g[1 + i] = a * x.wp[i] * x.wp[i] * x.y[i];
        g[1 + m + i] = x.wp[i] * (1.0 + a * x.y[i] * x.y[i]);
      }
      return g;
    };
  } else if (name == "harmonic") {
    const double w2 = p["omega"] * p["omega"];
    h.value = [w2](const PhasePoint& x) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.n(); ++i) s += 0.5 * (x.wp[i] * x.wp[i] + w2 * x.y[i] * x.y[i]);
      return s;
    };
    h.grad = [w2](const PhasePoint& x) {
      const std::size_t m = x.n();
      std::vector<double> g(x.dimension(), 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        g[1 + i] = w2 * x.y[i];
        g[1 + m + i] = x.wp[i];
      }
      return g;
    };
  } else if (name == "darboux" || name == "zero") {
    const double v = name == "darboux" ? 1.0 : 0.0;
    h.value = [v](const PhasePoint&) { return v; };
    h.grad = [](const PhasePoint& x) { return std::vector<double>(x.dimension(), 0.0); };
  }
  return h;
}

}  // namespace contactdyn::models
