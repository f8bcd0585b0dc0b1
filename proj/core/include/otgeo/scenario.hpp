#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "otgeo/cost_zoo.hpp"
#include "otgeo/discrete.hpp"
#include "otgeo/mtw.hpp"

namespace otgeo {

using Json = nlohmann::json;

/// How a measure enters a scenario: a CSV file or a generator.
struct MeasureSpec {
  std::string csv;  // non-empty: load from file
  std::string generator;  // "uniform_grid" | "bump" | "random_uniform"
  std::vector<int> counts{8};
  int count = 16;            // random_uniform
  Vec center;                // bump
  double sharpness = 1.0;    // bump
  std::optional<Box> box;    // defaults to the cost domain of its side
};

struct CheckSpec {
  std::string op;
  Json params = Json::object();
  std::optional<Json> expect;
};

struct Scenario {
  CostSpec cost;
  GridSpec grid;
  std::optional<MeasureSpec> source;
  std::optional<MeasureSpec> target;
  std::vector<CheckSpec> checks;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::string base_dir;  // directory of the scenario file, for relative paths
};

struct RunOptions {
  int jobs = 1;
  std::string out_dir_override;
};

struct RunReport {
  Json doc;
  bool all_expectations_met = true;
  bool any_error = false;
  /// 0: all declared expectations met; 1: some expectation failed or a
  /// checked operation errored.
  int exit_code() const { return all_expectations_met && !any_error ? 0 : 1; }
};

Scenario parse_scenario(const Json& j, const std::string& base_dir = "");
Scenario parse_scenario_file(const std::string& path);

/// Execute the scenario's checks in declaration order (possibly in
/// parallel), write tables/plan files under the output directory, and
/// assemble the deterministic report.
RunReport run_scenario(const Scenario& s, const RunOptions& opts = {});

/// Remove wall-clock and timestamp fields; what remains is byte-stable
/// across reruns of the same scenario and seed.
Json strip_volatile(Json report);

/// Build the measure described by `spec` (side: "source"/"target" for
/// error messages and domain defaults).
MeasurePtr build_measure(const MeasureSpec& spec, const Cost& cost, bool is_source,
                         std::uint64_t seed, const std::string& base_dir);

Json condition_report_to_json(const ConditionReport& rep);

}  // namespace otgeo
