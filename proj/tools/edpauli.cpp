// Command-line front end: run and validate scenario configurations, and run
// the maximum-entropy oracle suite.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "edpauli/edpauli.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 2;
constexpr int exit_numerical = 3;
constexpr int exit_tolerance = 4;

std::string read_file(const std::string& path, bool& ok) {
  std::ifstream is(path);
  if (!is) {
    ok = false;
    return {};
  }
  std::ostringstream os;
  os << is.rdbuf();
  ok = true;
  return os.str();
}

int run_command(const std::string& config_path, const std::string& out_dir, long long seed,
                bool quiet) {
  bool ok = false;
  const std::string text = read_file(config_path, ok);
  if (!ok) {
    std::fprintf(stderr, "error: cannot read %s\n", config_path.c_str());
    return exit_validation;
  }
  edpauli::ConfigResult res = edpauli::load_scenario_config(text);
  for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (!res.ok()) {
    for (const auto& e : res.errors) std::fprintf(stderr, "error: %s\n", e.c_str());
    return exit_validation;
  }
  edpauli::ScenarioConfig cfg = *res.config;
  if (!out_dir.empty()) cfg.output.directory = out_dir;
  if (seed >= 0) cfg.sampler.seed = static_cast<std::uint64_t>(seed);

  const edpauli::RunReport rep = edpauli::run_scenario(cfg, quiet);
  edpauli::emit_outputs(rep, cfg);

  if (!quiet) std::printf("outputs written to %s\n", cfg.output.directory.c_str());
  for (const auto& c : rep.checks)
    std::printf("%s %s: %.6e (threshold %.1e)\n", c.pass ? "[PASS]" : "[FAIL]", c.name.c_str(),
                c.value, c.threshold);
  if (rep.numerical_failure) {
    for (const auto& m : rep.messages) std::fprintf(stderr, "%s\n", m.c_str());
    return exit_numerical;
  }
  return rep.failed() ? exit_tolerance : exit_ok;
}

int validate_command(const std::string& config_path) {
  bool ok = false;
  const std::string text = read_file(config_path, ok);
  if (!ok) {
    std::fprintf(stderr, "error: cannot read %s\n", config_path.c_str());
    return exit_validation;
  }
  const edpauli::ConfigResult res = edpauli::load_scenario_config(text);
  for (const auto& w : res.warnings) std::printf("warning: %s\n", w.c_str());
  if (!res.ok()) {
    for (const auto& e : res.errors) std::printf("error: %s\n", e.c_str());
    return exit_validation;
  }
  std::printf("%s: OK (scenario %s)\n", config_path.c_str(),
              edpauli::to_string(res.config->id).c_str());
  return exit_ok;
}

int oracle_command(int settings, long long seed, bool quiet) {
  using namespace edpauli::maxent;
  const DisplacementLattice lattice(1, 41, 2.0);
  double worst = 0.0;
  bool all_converged = true;
  for (int i = 0; i < settings; ++i) {
    const Setting s = random_setting(static_cast<std::uint64_t>(seed), i, 1, lattice);
    const Report rep = maxent_oracle(s, lattice);
    worst = std::max(worst, rep.max_rel_error);
    all_converged = all_converged && rep.converged;
    if (!quiet)
      std::printf("setting %2d: alpha=%8.3f alpha'=%6.3f  iters=%3d  max_rel_err=%.3e%s\n", i,
                  s.alpha, s.alpha_prime, rep.iterations, rep.max_rel_error,
                  rep.converged ? "" : "  [multiplier search did not converge]");
    if (!rep.converged)
      std::printf("  duality gap %.3e, constraint gap %.3e\n", rep.duality_gap,
                  rep.constraint_gap);
  }
  std::printf("maxent oracle: %d settings, worst pointwise relative error %.3e (tolerance 1e-6)\n",
              settings, worst);
  if (!all_converged) return exit_numerical;
  return (worst < 1e-6) ? exit_ok : exit_tolerance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropic-dynamics Pauli solver and stochastic trajectory sampler"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  long long seed = -1;
  bool quiet = false;
  int settings = 20;

  CLI::App* run = app.add_subcommand("run", "run a scenario configuration");
  run->add_option("config", config_path, "TOML scenario configuration")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--seed", seed, "sampler seed override");
  run->add_flag("--quiet", quiet, "suppress progress output");

  CLI::App* validate = app.add_subcommand("validate", "validate a configuration");
  validate->add_option("config", config_path, "TOML scenario configuration")->required();

  CLI::App* oracle = app.add_subcommand("oracle", "run the maximum-entropy oracle suite");
  oracle->add_option("--settings", settings, "number of randomized settings (default 20)");
  oracle->add_option("--seed", seed, "suite seed");
  oracle->add_flag("--quiet", quiet, "per-setting lines off");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(config_path, out_dir, seed, quiet);
    if (validate->parsed()) return validate_command(config_path);
    if (oracle->parsed())
      return oracle_command(settings, seed >= 0 ? seed : 20260810, quiet);
  } catch (const edpauli::numerical_error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return exit_numerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_validation;
  }
  return exit_ok;
}
