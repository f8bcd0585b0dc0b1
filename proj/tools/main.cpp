// Command-line front end: scenario-driven cost analysis, MTW condition
// checks, exact discrete transport solves, and optimality certificates.
//
// Exit codes: 0 all declared expectations met; 1 a check failed its
// expectation or errored; 2 configuration error.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "otgeo/scenario.hpp"

namespace {

using otgeo::CheckSpec;
using otgeo::Json;

int run_with_checks(const std::string& config, const std::string& out_dir,
                    long long seed_override, bool seed_given, int jobs,
                    const std::vector<CheckSpec>* replace_checks) {
  otgeo::Scenario scenario;
  try {
    scenario = otgeo::parse_scenario_file(config);
    if (seed_given) scenario.seed = static_cast<std::uint64_t>(seed_override);
    if (replace_checks) scenario.checks = *replace_checks;
    if (scenario.checks.empty())
      throw otgeo::ConfigError("checks", "scenario declares no checks");
  } catch (const otgeo::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  otgeo::RunOptions opts;
  opts.jobs = jobs;
  opts.out_dir_override = out_dir;
  try {
    const otgeo::RunReport report = otgeo::run_scenario(scenario, opts);
    std::printf("%s\n", report.doc.dump(2).c_str());
    return report.exit_code();
  } catch (const otgeo::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"otgeo: transportation cost geometry and exact discrete transport"};
  app.require_subcommand(1);

  std::string config, out_dir;
  long long seed = 0;
  bool seed_given = false;
  int jobs = 1;
  auto add_common = [&](CLI::App* cmd, bool config_required = true) {
    auto* c = cmd->add_option("--config", config, "scenario JSON file");
    if (config_required) c->required();
    cmd->add_option("--out", out_dir, "output directory for reports and tables");
    cmd->add_option("--seed", seed, "override the scenario seed")
        ->each([&](const std::string&) { seed_given = true; });
    cmd->add_option("--jobs", jobs, "run independent checks in parallel")
        ->check(CLI::PositiveNumber);
  };

  auto* zoo = app.add_subcommand("zoo", "cost catalogue");
  bool zoo_json = false;
  auto* zoo_list = zoo->add_subcommand("list", "list the built-in costs");
  zoo_list->add_flag("--json", zoo_json, "machine-readable listing");

  auto* analyze = app.add_subcommand(
      "analyze-cost", "signature scan and Taylor-order probe for the configured cost");
  add_common(analyze);
  auto* mtw = app.add_subcommand("mtw-check", "run the A0-A4 condition battery");
  add_common(mtw);
  bool strict = false, strong = false;
  mtw->add_flag("--strict", strict, "strict third-order condition (A3s)");
  mtw->add_flag("--strong", strong, "strong convexity variant (A4s)");
  auto* solve = app.add_subcommand("solve", "solve the discrete transport problem exactly");
  add_common(solve);
  auto* certify = app.add_subcommand(
      "certify", "certify optimality by cyclical monotonicity and spacelike support");
  add_common(certify);
  int certify_K = 5;
  certify->add_option("-K,--max-cycle", certify_K, "max cycle length");
  auto* run = app.add_subcommand("run", "run a full scenario as declared");
  add_common(run);

  CLI11_PARSE(app, argc, argv);

  if (zoo_list->parsed()) {
    const auto& entries = otgeo::cost_catalogue();
    if (zoo_json) {
      Json j = Json::array();
      for (const auto& e : entries)
        j.push_back({{"name", e.name}, {"formula", e.formula}, {"notes", e.notes}});
      std::printf("%s\n", j.dump(2).c_str());
    } else {
      for (const auto& e : entries)
        std::printf("%-16s %-22s %s\n", e.name.c_str(), e.formula.c_str(), e.notes.c_str());
    }
    return 0;
  }

  if (analyze->parsed()) {
    std::vector<CheckSpec> checks;
    checks.push_back({"signature_scan", Json::object(), std::nullopt});
    checks.push_back({"taylor_probe", Json::object(), std::nullopt});
    return run_with_checks(config, out_dir, seed, seed_given, jobs, &checks);
  }
  if (mtw->parsed()) {
    std::vector<CheckSpec> checks;
    for (const char* op : {"check_A0", "check_A1", "check_A2", "check_A3", "check_A4"}) {
      Json params = Json::object();
      if (std::string(op) == "check_A3" && strict) params["strict"] = true;
      if (std::string(op) == "check_A4" && strong) params["strong"] = true;
      checks.push_back({op, params, std::nullopt});
    }
    return run_with_checks(config, out_dir, seed, seed_given, jobs, &checks);
  }
  if (solve->parsed()) {
    std::vector<CheckSpec> checks;
    checks.push_back({"solve", Json{{"emit_plan", true}}, std::nullopt});
    return run_with_checks(config, out_dir, seed, seed_given, jobs, &checks);
  }
  if (certify->parsed()) {
    std::vector<CheckSpec> checks;
    checks.push_back({"certify", Json{{"K", certify_K}}, std::nullopt});
    return run_with_checks(config, out_dir, seed, seed_given, jobs, &checks);
  }
  return run_with_checks(config, out_dir, seed, seed_given, jobs, nullptr);
}
