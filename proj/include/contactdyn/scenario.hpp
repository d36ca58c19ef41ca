#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace contactdyn::scenario {

enum class Kind { flow, kinetic, stationary, estimate, holonomy, action, invariants };

std::string to_string(Kind k);
std::optional<Kind> parse_kind(const std::string& s);
const std::vector<std::string>& kind_names();

/// Environment variable that redirects output when --out is not given.
inline constexpr const char* kOutDirEnv = "CONTACTDYN_OUT_DIR";

enum ExitCode : int { kOk = 0, kInternal = 1, kValidation = 2, kAssertion = 3, kDivergence = 4 };

struct Assertion {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct RunReport {
  std::string scenario;
  std::string kind;
  std::string version;
  std::string config_hash;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
  std::string out_dir;
  std::vector<std::string> files;
  std::vector<Assertion> assertions;
  nlohmann::json metrics = nlohmann::json::object();
  std::string status = "ok";
  std::string message;
  int exit_code = kOk;

  [[nodiscard]] nlohmann::json to_json() const;
};

struct RunOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;        ///< empty: environment, then config `out`, then out/<name>
  std::string expected_kind;  ///< empty: accept any kind
  bool quiet = false;
};

/// Loads, validates and runs one scenario, writing its CSV/JSON artefacts and
/// report.json into the output directory. Never throws for bad input: the
/// outcome is in the returned report (and its exit_code).
RunReport run(const RunOptions& options);

struct Summary {
  std::string name;
  std::string kind;
  std::string path;
  std::string description;
  std::string label;  ///< name, or "name [path]" when names collide
};

/// Every *.toml directly inside dir, ordered by (name, path). Files that do
/// not parse are listed with kind "invalid".
std::vector<Summary> list_scenarios(const std::string& dir);

}  // namespace contactdyn::scenario
