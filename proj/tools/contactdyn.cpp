// Command-line front end: one subcommand per scenario kind, plus `list`.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "contactdyn/scenario.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
};

void add_run_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "scenario TOML file")->required();
  sub->add_option("--seed", f.seed, "override the scenario seed");
  sub->add_option("--out", f.out, "output directory (overrides " + std::string(contactdyn::scenario::kOutDirEnv) + ")");
  sub->add_flag("--quiet", f.quiet, "print nothing on success");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contactdyn: contact-geometric dynamics, kinetic equations and cumulant estimation"};
  app.set_version_flag("--version", std::string(CONTACTDYN_VERSION));
  app.require_subcommand(1);

  Flags flags;
  const std::pair<const char*, const char*> kinds[] = {
      {"flow", "integrate a contact Hamiltonian flow and track eps"},
      {"kinetic", "evolve a density under a truncated generator"},
      {"stationary", "solve for the stationary density of a second-order generator"},
      {"estimate", "estimate D and B coefficients from a path ensemble"},
      {"holonomy", "transport along base paths and measure loop holonomy"},
      {"action", "discrete action sweep, gradient check and descent"},
      {"invariants", "canonical relations and contact certification"},
  };
  for (const auto& [name, help] : kinds) add_run_flags(app.add_subcommand(name, help), flags);

  std::string list_dir = "scenarios";
  auto* list = app.add_subcommand("list", "list scenario files in a directory");
  list->add_option("dir", list_dir, "directory to scan");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : contactdyn::scenario::kValidation;
  }

  if (list->parsed()) {
    try {
      for (const auto& s : contactdyn::scenario::list_scenarios(list_dir)) {
        std::cout << s.label << "\t" << s.kind << "\t" << s.path;
        if (!s.description.empty()) std::cout << "\t" << s.description;
        std::cout << "\n";
      }
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return contactdyn::scenario::kValidation;
    }
    return 0;
  }

  contactdyn::scenario::RunOptions opt;
  opt.config_path = flags.config;
  opt.seed = flags.seed;
  opt.out_dir = flags.out;
  opt.quiet = true;
  for (const auto* sub : app.get_subcommands()) opt.expected_kind = sub->get_name();

  const auto report = contactdyn::scenario::run(opt);
  if (!flags.quiet || report.exit_code != 0) {
    auto& os = report.exit_code == 0 ? std::cout : std::cerr;
    os << (report.scenario.empty() ? flags.config : report.scenario) << ": " << report.status;
    if (!report.message.empty()) os << ": " << report.message;
    os << "\n";
    if (!flags.quiet) {
      for (const auto& a : report.assertions) {
        os << "  " << (a.pass ? "pass " : "FAIL ") << a.name << " = " << a.value << " (threshold " << a.threshold
           << ")\n";
      }
      if (!report.out_dir.empty()) os << "  output: " << report.out_dir << "\n";
    }
  }
  return report.exit_code;
}
