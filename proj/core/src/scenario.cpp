#include "otgeo/scenario.hpp"

#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "otgeo/measure_io.hpp"

namespace otgeo {

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

Vec to_vec(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "expected an array of numbers");
  Vec v(static_cast<long>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(field, "expected numbers");
    v[static_cast<long>(i)] = j[i].get<double>();
  }
  return v;
}

Box parse_box(const Json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("lo") || !j.contains("hi"))
    throw ConfigError(field, "expected {lo: [...], hi: [...]}");
  const Vec lo = to_vec(j["lo"], field + ".lo");
  const Vec hi = to_vec(j["hi"], field + ".hi");
  if (lo.size() != hi.size()) throw ConfigError(field, "lo/hi length mismatch");
  std::vector<Axis> axes;
  for (long i = 0; i < lo.size(); ++i) {
    bool periodic = false;
    if (j.contains("periodic")) {
      const Json& p = j["periodic"];
      if (p.is_boolean())
        periodic = p.get<bool>();
      else if (p.is_array() && i < static_cast<long>(p.size()))
        periodic = p[static_cast<size_t>(i)].get<bool>();
    }
    if (!(lo[i] < hi[i])) throw ConfigError(field, "lo must be strictly below hi");
    axes.push_back(Axis{lo[i], hi[i], periodic});
  }
  return Box(std::move(axes));
}

Json box_to_json(const Box& b) {
  Json lo = Json::array(), hi = Json::array(), per = Json::array();
  for (int i = 0; i < b.dim(); ++i) {
    lo.push_back(b.axis(i).lo);
    hi.push_back(b.axis(i).hi);
    per.push_back(b.axis(i).periodic);
  }
  return Json{{"lo", lo}, {"hi", hi}, {"periodic", per}};
}

std::vector<int> parse_counts(const Json& j, const std::string& field) {
  std::vector<int> counts;
  if (j.is_number_integer()) {
    counts.push_back(j.get<int>());
  } else if (j.is_array()) {
    for (const auto& e : j) counts.push_back(e.get<int>());
  } else {
    throw ConfigError(field, "expected an integer or array of integers");
  }
  for (int c : counts)
    if (c < 2) throw ConfigError(field, "grid counts must be >= 2");
  return counts;
}

Json vec_to_json(VecRef v) {
  Json a = Json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

Json condition_report_to_json(const ConditionReport& rep) {
  Json j;
  j["condition"] = rep.condition;
  j["verdict"] = to_string(rep.verdict);
  j["margin"] = std::isfinite(rep.margin) ? Json(rep.margin) : Json("inf");
  Json wits = Json::array();
  for (const auto& w : rep.witnesses) {
    Json wj;
    Json pts = Json::object();
    for (const auto& [label, v] : w.points) pts[label] = vec_to_json(v);
    wj["points"] = pts;
    wj["values"] = w.values;
    wits.push_back(wj);
  }
  j["witnesses"] = wits;
  j["grid"] = rep.grid;
  j["tolerances"] = rep.tolerances;
  j["notes"] = rep.notes;
  return j;
}

Scenario parse_scenario(const Json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("", "scenario must be a JSON object");
  Scenario s;
  s.base_dir = base_dir;
  if (!j.contains("cost") || !j["cost"].is_object())
    throw ConfigError("cost", "missing cost object");
  const Json& jc = j["cost"];
  if (!jc.contains("name") || !jc["name"].is_string())
    throw ConfigError("cost.name", "missing cost name");
  s.cost.name = jc["name"].get<std::string>();
  s.cost.dim = jc.value("dim", 1);
  s.cost.p = jc.value("p", 3.0);
  s.cost.cut_clearance = jc.value("cut_clearance", 0.1);
  if (jc.contains("domain_x")) s.cost.domain_x = parse_box(jc["domain_x"], "cost.domain_x");
  if (jc.contains("domain_y")) s.cost.domain_y = parse_box(jc["domain_y"], "cost.domain_y");

  if (j.contains("grid")) {
    const Json& jg = j["grid"];
    if (!jg.is_object()) throw ConfigError("grid", "expected an object");
    if (jg.contains("counts_x")) s.grid.counts_x = parse_counts(jg["counts_x"], "grid.counts_x");
    if (jg.contains("counts_y")) s.grid.counts_y = parse_counts(jg["counts_y"], "grid.counts_y");
    if (jg.contains("bounds_x")) s.grid.bounds_x = parse_box(jg["bounds_x"], "grid.bounds_x");
    if (jg.contains("bounds_y")) s.grid.bounds_y = parse_box(jg["bounds_y"], "grid.bounds_y");
    s.grid.directions = jg.value("directions", 8);
    if (s.grid.directions < 1) throw ConfigError("grid.directions", "must be >= 1");
  }

  auto parse_measure = [&](const Json& jm, const std::string& field) {
    MeasureSpec ms;
    if (jm.contains("csv")) {
      ms.csv = jm["csv"].get<std::string>();
      return ms;
    }
    if (!jm.contains("generator") || !jm["generator"].is_object())
      throw ConfigError(field, "expected {csv: path} or {generator: {...}}");
    const Json& jg = jm["generator"];
    ms.generator = jg.value("type", "");
    if (ms.generator != "uniform_grid" && ms.generator != "bump" &&
        ms.generator != "random_uniform")
      throw ConfigError(field + ".generator.type",
                        "one of uniform_grid, bump, random_uniform");
    if (jg.contains("counts")) ms.counts = parse_counts(jg["counts"], field + ".counts");
    ms.count = jg.value("count", 16);
    if (jg.contains("center")) ms.center = to_vec(jg["center"], field + ".center");
    ms.sharpness = jg.value("sharpness", 1.0);
    if (jg.contains("box")) ms.box = parse_box(jg["box"], field + ".box");
    return ms;
  };
  if (j.contains("measures")) {
    const Json& jm = j["measures"];
    if (jm.contains("source")) s.source = parse_measure(jm["source"], "measures.source");
    if (jm.contains("target")) s.target = parse_measure(jm["target"], "measures.target");
  }

  if (j.contains("checks")) {
    if (!j["checks"].is_array()) throw ConfigError("checks", "expected an array");
    for (size_t i = 0; i < j["checks"].size(); ++i) {
      const Json& ck = j["checks"][i];
      const std::string field = "checks[" + std::to_string(i) + "]";
      if (!ck.is_object() || !ck.contains("op"))
        throw ConfigError(field, "each check needs an op");
      CheckSpec spec;
      spec.op = ck["op"].get<std::string>();
      if (ck.contains("params")) spec.params = ck["params"];
      if (ck.contains("expect")) spec.expect = ck["expect"];
      s.checks.push_back(std::move(spec));
    }
  }
  s.seed = j.value("seed", 0);
  s.output_dir = j.value("output_dir", "");
  return s;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open scenario file: " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("scenario parse error: ") + e.what());
  }
  return parse_scenario(j, std::filesystem::path(path).parent_path().string());
}

MeasurePtr build_measure(const MeasureSpec& spec, const Cost& cost, bool is_source,
                         std::uint64_t seed, const std::string& base_dir) {
  const std::string side = is_source ? "source" : "target";
  if (!spec.csv.empty()) {
    std::filesystem::path p(spec.csv);
    if (p.is_relative() && !base_dir.empty() && !std::filesystem::exists(p))
      p = std::filesystem::path(base_dir) / p;
    if (!std::filesystem::exists(p))
      throw ConfigError("measures." + side + ".csv", "file not found: " + p.string());
    auto load = load_measure_csv(p.string());
    if (load.normalized_warning)
      std::fprintf(stderr, "warning: %s measure %s raw weight sum %.9g normalized\n",
                   side.c_str(), p.string().c_str(), load.raw_weight_sum);
    return std::make_shared<DiscreteMeasure>(std::move(load.measure));
  }
  const Box box = spec.box.value_or(is_source ? cost.domain_x() : cost.domain_y());
  if (spec.generator == "uniform_grid") {
    const auto pts = box.grid(spec.counts);
    std::vector<double> w(pts.size(), 1.0);
    return std::make_shared<DiscreteMeasure>(
        DiscreteMeasure::create(pts, std::move(w)));
  }
  if (spec.generator == "bump") {
    const auto pts = box.grid(spec.counts);
    if (spec.center.size() != box.dim())
      throw ConfigError("measures." + side + ".center",
                        "center dimension must match the domain");
    std::vector<double> w;
    w.reserve(pts.size());
    for (const auto& p : pts) {
      double logw = 0.0;
      for (int d = 0; d < box.dim(); ++d) {
        const double delta = p[d] - spec.center[d];
        if (box.axis(d).periodic)
          logw += spec.sharpness * std::cos(delta);
        else
          logw += -spec.sharpness * delta * delta;
      }
      w.push_back(std::exp(logw));
    }
    return std::make_shared<DiscreteMeasure>(DiscreteMeasure::create(pts, std::move(w)));
  }
  if (spec.generator == "random_uniform") {
    std::mt19937_64 rng(splitmix(seed ^ (is_source ? 0x5eedu : 0x7a46e7u)));
    std::vector<Vec> pts;
    std::vector<double> w;
    std::uniform_real_distribution<double> wdist(0.5, 1.5);
    for (int i = 0; i < spec.count; ++i) {
      pts.push_back(box.sample_interior(rng));
      w.push_back(wdist(rng));
    }
    return std::make_shared<DiscreteMeasure>(DiscreteMeasure::create(std::move(pts), std::move(w)));
  }
  throw ConfigError("measures." + side, "no csv or generator given");
}

// ------------------------------------------------------------------ checks

namespace {

struct CheckContext {
  const Scenario& scenario;
  const Cost& cost;
  MeasurePtr mu;
  MeasurePtr nu;
  std::string out_dir;
  int index;
  std::uint64_t seed;

  std::string table_path(const std::string& suffix) const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", index);
    return out_dir + "/" + buf + "_" + suffix;
  }
};

MtwOptions mtw_options_from(const Json& params) {
  MtwOptions o;
  o.strict = params.value("strict", false);
  o.C0 = params.value("C0", 0.0);
  o.strong = params.value("strong", false);
  if (params.contains("collision_rel")) o.collision_rel = params["collision_rel"];
  if (params.contains("det_threshold")) o.det_threshold = params["det_threshold"];
  if (params.contains("margin_tol")) o.margin_tol = params["margin_tol"];
  if (params.contains("refine_factor")) o.refine_factor = params["refine_factor"];
  if (params.contains("max_base_points")) o.max_base_points = params["max_base_points"];
  if (params.contains("max_probe_points")) o.max_probe_points = params["max_probe_points"];
  return o;
}

GridSpec grid_from(const CheckContext& ctx, const Json& params) {
  GridSpec g = ctx.scenario.grid;
  if (params.contains("counts_x")) g.counts_x = parse_counts(params["counts_x"], "params.counts_x");
  if (params.contains("counts_y")) g.counts_y = parse_counts(params["counts_y"], "params.counts_y");
  if (params.contains("directions")) g.directions = params["directions"];
  g.seed = ctx.seed;
  return g;
}

Json run_condition_check(const CheckContext& ctx, const std::string& op, const Json& params) {
  const GridSpec grid = grid_from(ctx, params);
  const MtwOptions opts = mtw_options_from(params);
  ConditionReport rep;
  if (op == "check_A0")
    rep = check_A0(ctx.cost, grid, opts);
  else if (op == "check_A1_plus")
    rep = check_A1_plus(ctx.cost, grid, opts);
  else if (op == "check_A1")
    rep = check_A1(ctx.cost, grid, opts);
  else if (op == "check_A2")
    rep = check_A2(ctx.cost, grid, opts);
  else if (op == "check_A3")
    rep = check_A3(ctx.cost, grid, opts);
  else if (op == "check_A4")
    rep = check_A4(ctx.cost, grid, opts);
  else
    throw ConfigError("checks", "unknown condition op " + op);
  return condition_report_to_json(rep);
}

Json run_signature_scan(const CheckContext& ctx, const Json& params) {
  const GridSpec grid = grid_from(ctx, params);
  SignatureOptions sopts;
  if (params.contains("rel_tol")) sopts.rel_tol = params["rel_tol"];
  const auto xs = grid.resolved_x(ctx.cost).grid(grid.counts_x);
  const auto ys = grid.resolved_y(ctx.cost).grid(grid.counts_y);
  std::ofstream table;
  if (!ctx.out_dir.empty()) {
    table.open(ctx.table_path("signature_map.csv"));
    for (int d = 0; d < ctx.cost.dim_x(); ++d) table << "x" << (d + 1) << ",";
    for (int d = 0; d < ctx.cost.dim_y(); ++d) table << "y" << (d + 1) << ",";
    table << "k_plus,k_zero,k_minus,rank\n";
  }
  std::map<std::string, long> hist;
  long degenerate = 0, skipped = 0;
  int min_rank = std::numeric_limits<int>::max(), max_rank = 0;
  for (const auto& x0 : xs)
    for (const auto& y0 : ys) {
      if (ctx.cost.excluded(x0, y0)) {
        ++skipped;
        continue;
      }
      Signature sig;
      try {
        sig = signature(hessian_h(ctx.cost, BasePoint{x0, y0}), sopts);
      } catch (const DomainError&) {
        ++skipped;
        continue;
      }
      char key[64];
      std::snprintf(key, sizeof(key), "(%d,%d,%d)", sig.k_plus, sig.k_zero, sig.k_minus);
      ++hist[key];
      if (sig.rank == 0) ++degenerate;
      min_rank = std::min(min_rank, sig.rank);
      max_rank = std::max(max_rank, sig.rank);
      if (table.is_open()) {
        for (int d = 0; d < x0.size(); ++d) table << x0[d] << ",";
        for (int d = 0; d < y0.size(); ++d) table << y0[d] << ",";
        table << sig.k_plus << "," << sig.k_zero << "," << sig.k_minus << "," << sig.rank
              << "\n";
      }
    }
  Json j;
  j["histogram"] = hist;
  j["degenerate_points"] = degenerate;
  j["skipped_points"] = skipped;
  j["min_rank"] = min_rank == std::numeric_limits<int>::max() ? 0 : min_rank;
  j["max_rank"] = max_rank;
  return j;
}

Json run_taylor_probe(const CheckContext& ctx, const Json& params) {
  const int samples = params.value("samples", 20);
  std::vector<double> steps{1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3};
  if (params.contains("steps")) {
    steps.clear();
    for (const auto& e : params["steps"]) steps.push_back(e.get<double>());
  }
  std::mt19937_64 rng(ctx.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double tmax = *std::max_element(steps.begin(), steps.end());
  double min_slope = kInf;
  Json slopes = Json::array();
  int used = 0;
  for (int s = 0; s < samples * 4 && used < samples; ++s) {
    const Vec x0 = ctx.cost.domain_x().sample_interior(rng, 2.0 * tmax);
    const Vec y0 = ctx.cost.domain_y().sample_interior(rng, 2.0 * tmax);
    if (ctx.cost.excluded_clearance(x0, y0) < 4.0 * tmax) continue;
    Vec dir(ctx.cost.dim_x() + ctx.cost.dim_y());
    for (int d = 0; d < dir.size(); ++d) dir[d] = gauss(rng);
    dir.normalize();
    std::vector<double> res;
    try {
      res = taylor_residual(ctx.cost, BasePoint{x0, y0}, dir, steps);
    } catch (const DomainError&) {
      continue;
    }
    const double slope = fitted_loglog_slope(steps, res);
    slopes.push_back(std::isfinite(slope) ? Json(slope) : Json("inf"));
    min_slope = std::min(min_slope, slope);
    ++used;
  }
  Json j;
  j["samples"] = used;
  j["slopes"] = slopes;
  j["min_slope"] = std::isfinite(min_slope) ? Json(min_slope) : Json("inf");
  return j;
}

Json run_mtw_scan(const CheckContext& ctx, const Json& params) {
  const GridSpec grid = grid_from(ctx, params);
  const MtwOptions opts = mtw_options_from(params);
  ConditionReport rep = check_A3(ctx.cost, grid, opts);
  // Table: tensor margins over the grid with the scanned directions.
  if (!ctx.out_dir.empty()) {
    std::ofstream table(ctx.table_path("mtw_scan.csv"));
    for (int d = 0; d < ctx.cost.dim_x(); ++d) table << "x" << (d + 1) << ",";
    for (int d = 0; d < ctx.cost.dim_y(); ++d) table << "y" << (d + 1) << ",";
    for (int d = 0; d < ctx.cost.dim_x(); ++d) table << "p" << (d + 1) << ",";
    for (int d = 0; d < ctx.cost.dim_y(); ++d) table << "q" << (d + 1) << ",";
    table << "tensor\n";
    const auto xs = grid.resolved_x(ctx.cost).grid(grid.counts_x);
    const auto ys = grid.resolved_y(ctx.cost).grid(grid.counts_y);
    for (const auto& x0 : xs)
      for (const auto& y0 : ys) {
        if (ctx.cost.excluded(x0, y0)) continue;
        std::optional<MtwKernel> kernel;
        try {
          kernel.emplace(ctx.cost, BasePoint{x0, y0}, opts.fd);
        } catch (const Error&) {
          continue;
        }
        // One projected pair per base keeps the table compact.
        Vec q = Vec::Zero(ctx.cost.dim_y());
        q[ctx.cost.dim_y() - 1] = 1.0;
        Vec w = kernel->cross() * q;
        Vec p = Vec::Zero(ctx.cost.dim_x());
        p[0] = 1.0;
        const double wn = w.norm();
        if (wn > 1e-14) p -= (p.dot(w) / (wn * wn)) * w;
        if (p.norm() < 0.1) continue;
        p.normalize();
        const double val = (*kernel)(p, q);
        for (int d = 0; d < x0.size(); ++d) table << x0[d] << ",";
        for (int d = 0; d < y0.size(); ++d) table << y0[d] << ",";
        for (int d = 0; d < p.size(); ++d) table << p[d] << ",";
        for (int d = 0; d < q.size(); ++d) table << q[d] << ",";
        table << val << "\n";
      }
  }
  return condition_report_to_json(rep);
}

Json run_solve(const CheckContext& ctx, const Json& params) {
  if (!ctx.mu || !ctx.nu)
    throw ConfigError("measures", "solve requires source and target measures");
  const Mat costs = cost_matrix(ctx.cost, *ctx.mu, *ctx.nu);
  const TransportPlan plan = solve_primal(costs, ctx.mu, ctx.nu);
  const double primal = kantorovich_cost(costs, plan);
  const DualPotentials duals = solve_dual(costs, plan);
  const double dual = duals.objective(*ctx.mu, *ctx.nu);
  const DualDiagnostics diag = dual_diagnostics(costs, plan, duals);

  Json j;
  j["entries"] = plan.entries().size();
  j["primal_cost"] = primal;
  j["dual_value"] = dual;
  j["duality_gap"] = std::abs(primal - dual);
  j["slackness_residual"] = diag.slackness_residual;
  j["feasibility_violation"] = diag.feasibility_violation;
  j["marginal_residual"] = plan.marginal_residual();

  const Decomposition dec = graph_antigraph_decompose(plan);
  j["decomposition"] = {{"graph_entries", dec.graph.size()},
                        {"antigraph_entries", dec.antigraph.size()},
                        {"residual_entries", dec.residual.size()},
                        {"residual_mass", dec.residual_mass}};
  const MongeExtraction monge = extract_monge_map(plan, params.value("monge_tolerance", 1e-9));
  j["monge_map"] = monge.assignment.has_value();
  j["split_sources"] = monge.split_sources.size();

  if (!ctx.out_dir.empty()) {
    std::ofstream table(ctx.table_path("plan.csv"));
    table << "i,j,mass,c_value,graph_or_antigraph\n";
    auto label_of = [&dec](const PlanEntry& e) -> std::string {
      for (const auto& g : dec.graph)
        if (g.i == e.i && g.j == e.j) return "graph";
      for (const auto& g : dec.antigraph)
        if (g.i == e.i && g.j == e.j) return "antigraph";
      return "residual";
    };
    for (const auto& e : plan.entries()) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", e.mass);
      table << e.i << "," << e.j << "," << buf << "," << costs(e.i, e.j) << ","
            << label_of(e) << "\n";
    }
    if (params.value("emit_plan", false)) {
      save_plan(ctx.table_path("plan"), plan, ctx.cost.name(), primal);
      j["plan_files"] = {ctx.table_path("plan") + ".csv", ctx.table_path("plan") + ".json"};
    }
  }
  return j;
}

Json run_certify(const CheckContext& ctx, const Json& params) {
  if (!ctx.mu || !ctx.nu)
    throw ConfigError("measures", "certify requires source and target measures");
  const Mat costs = cost_matrix(ctx.cost, *ctx.mu, *ctx.nu);
  const TransportPlan plan = solve_primal(costs, ctx.mu, ctx.nu);
  const auto support = plan.support_points();
  const int K = params.value("K", 5);
  std::string mode = params.value("mode", "");
  if (mode.empty())
    mode = (support.size() <= 16 && K <= 6) ? "exact" : "local_search";
  CcmOptions copts;
  copts.seed = ctx.seed;
  const CycleCertificate cert = check_ccm(ctx.cost, support, K, mode, copts);
  const SpacelikeReport space =
      spacelike_support_check(ctx.cost, support, params.value("neighbor_radius", kInf));

  Json j;
  j["ccm_status"] = cert.status == CycleCertificate::Status::certified_up_to_K
                        ? "certified_up_to_K"
                        : "violated";
  j["K"] = cert.K;
  j["mode"] = cert.mode;
  j["nodes_visited"] = cert.nodes_visited;
  if (cert.status == CycleCertificate::Status::violated) {
    j["violation"] = cert.violation;
    j["gap"] = cert.gap;
  }
  j["spacelike_min"] = space.pairs_checked ? Json(space.min_normalized) : Json("vacuous");
  j["spacelike_pairs"] = space.pairs_checked;
  return j;
}

Json run_geodesic(const CheckContext& ctx, const Json& params) {
  GeodesicState start;
  const Vec x0 = params.contains("start_x")
                     ? to_vec(params["start_x"], "params.start_x")
                     : Vec::Zero(ctx.cost.dim_x());
  const Vec y0 = params.contains("start_y")
                     ? to_vec(params["start_y"], "params.start_y")
                     : Vec::Zero(ctx.cost.dim_y());
  start.position = Vec(x0.size() + y0.size());
  start.position << x0, y0;
  if (params.contains("velocity")) {
    start.velocity = to_vec(params["velocity"], "params.velocity");
  } else {
    start.velocity = Vec::Ones(start.position.size());
    start.velocity.normalize();
  }
  const double duration = params.value("duration", 1.0);
  const int steps = params.value("steps", 1000);
  const Trajectory traj = geodesic_integrate(ctx.cost, start, duration, steps);

  double e0 = geodesic_energy(ctx.cost, traj.states.front());
  double drift = 0.0, chord_dev = 0.0;
  const Vec& z0 = traj.states.front().position;
  const Vec& z1 = traj.states.back().position;
  const double t0 = traj.states.front().time;
  const double t1 = traj.states.back().time;
  for (const auto& st : traj.states) {
    drift = std::max(drift,
                     std::abs(geodesic_energy(ctx.cost, st) - e0) / std::max(std::abs(e0), 1e-12));
    if (t1 > t0) {
      const double lam = (st.time - t0) / (t1 - t0);
      chord_dev = std::max(chord_dev, (st.position - ((1 - lam) * z0 + lam * z1)).norm());
    }
  }
  if (!ctx.out_dir.empty()) {
    std::ofstream table(ctx.table_path("trajectory.csv"));
    table << "t";
    for (int d = 0; d < start.position.size(); ++d) table << ",z" << (d + 1);
    table << ",energy\n";
    for (const auto& st : traj.states) {
      table << st.time;
      for (int d = 0; d < st.position.size(); ++d) table << "," << st.position[d];
      table << "," << geodesic_energy(ctx.cost, st) << "\n";
    }
  }
  Json j;
  j["status"] = traj.status == GeodesicStatus::completed
                    ? "completed"
                    : (traj.status == GeodesicStatus::domain_exit ? "domain_exit"
                                                                  : "degenerate_metric");
  j["exit_time"] = traj.exit_time;
  j["states"] = traj.states.size();
  j["energy_drift"] = drift;
  j["chord_deviation"] = chord_dev;
  return j;
}

Json dispatch_check(const CheckContext& ctx, const CheckSpec& spec) {
  if (spec.op.rfind("check_A", 0) == 0) return run_condition_check(ctx, spec.op, spec.params);
  if (spec.op == "signature_scan") return run_signature_scan(ctx, spec.params);
  if (spec.op == "taylor_probe") return run_taylor_probe(ctx, spec.params);
  if (spec.op == "mtw_scan") return run_mtw_scan(ctx, spec.params);
  if (spec.op == "solve") return run_solve(ctx, spec.params);
  if (spec.op == "certify") return run_certify(ctx, spec.params);
  if (spec.op == "geodesic") return run_geodesic(ctx, spec.params);
  throw ConfigError("checks", "unknown op '" + spec.op + "'");
}

/// Compare a result document against the declared expectation keys.
bool expectation_met(const Json& expect, const Json& result) {
  for (auto it = expect.begin(); it != expect.end(); ++it) {
    const std::string& key = it.key();
    auto leq = [&](const char* field, double bound) {
      return result.contains(field) && result[field].is_number() &&
             result[field].get<double>() <= bound;
    };
    if (key == "verdict") {
      if (result.value("verdict", "") != it.value().get<std::string>()) return false;
    } else if (key == "status") {
      if (result.value("ccm_status", result.value("status", "")) !=
          it.value().get<std::string>())
        return false;
    } else if (key == "min_margin") {
      if (!(result.contains("margin") &&
            ((result["margin"].is_string() && result["margin"] == "inf") ||
             (result["margin"].is_number() &&
              result["margin"].get<double>() >= it.value().get<double>()))))
        return false;
    } else if (key == "min_slope") {
      if (result.contains("min_slope") && result["min_slope"].is_string()) continue;  // inf
      if (!(result.contains("min_slope") &&
            result["min_slope"].get<double>() >= it.value().get<double>()))
        return false;
    } else if (key == "max_gap") {
      if (!leq("duality_gap", it.value().get<double>())) return false;
    } else if (key == "max_slackness") {
      if (!leq("slackness_residual", it.value().get<double>())) return false;
    } else if (key == "max_feasibility_violation") {
      if (!leq("feasibility_violation", it.value().get<double>())) return false;
    } else if (key == "max_residual_mass") {
      if (!result.contains("decomposition") ||
          !(result["decomposition"]["residual_mass"].get<double>() <= it.value().get<double>()))
        return false;
    } else if (key == "max_energy_drift") {
      if (!leq("energy_drift", it.value().get<double>())) return false;
    } else if (key == "max_chord_deviation") {
      if (!leq("chord_deviation", it.value().get<double>())) return false;
    } else if (key == "min_rank") {
      if (!(result.contains("min_rank") &&
            result["min_rank"].get<int>() >= it.value().get<int>()))
        return false;
    } else if (key == "monge_map") {
      if (result.value("monge_map", false) != it.value().get<bool>()) return false;
    } else {
      throw ConfigError("expect", "unknown expectation key '" + key + "'");
    }
  }
  return true;
}

std::string scenario_digest(const Scenario& s, const Json& original) {
  (void)s;
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : original.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

Json scenario_to_json(const Scenario& s) {
  Json j;
  j["cost"] = {{"name", s.cost.name}, {"dim", s.cost.dim}, {"p", s.cost.p}};
  if (s.cost.domain_x) j["cost"]["domain_x"] = box_to_json(*s.cost.domain_x);
  if (s.cost.domain_y) j["cost"]["domain_y"] = box_to_json(*s.cost.domain_y);
  j["grid"] = {{"counts_x", s.grid.counts_x},
               {"counts_y", s.grid.counts_y},
               {"directions", s.grid.directions}};
  Json checks = Json::array();
  for (const auto& c : s.checks) {
    Json cj{{"op", c.op}, {"params", c.params}};
    if (c.expect) cj["expect"] = *c.expect;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  j["seed"] = s.seed;
  return j;
}

}  // namespace

RunReport run_scenario(const Scenario& s, const RunOptions& opts) {
  const std::string out_dir =
      !opts.out_dir_override.empty() ? opts.out_dir_override : s.output_dir;
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  std::unique_ptr<Cost> cost = make_cost(s.cost);
  MeasurePtr mu, nu;
  if (s.source) mu = build_measure(*s.source, *cost, true, s.seed, s.base_dir);
  if (s.target) nu = build_measure(*s.target, *cost, false, s.seed, s.base_dir);

  struct Slot {
    Json result;
    std::string error;
    double wall_ms = 0.0;
  };
  std::vector<Slot> slots(s.checks.size());

  auto run_one = [&](size_t idx) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckContext ctx{s,   *cost, mu, nu, out_dir, static_cast<int>(idx),
                     splitmix(s.seed ^ (0xC0FFEEull + idx))};
    try {
      slots[idx].result = dispatch_check(ctx, s.checks[idx]);
    } catch (const std::exception& e) {
      slots[idx].error = e.what();
    }
    slots[idx].wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
  };

  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1 || s.checks.size() <= 1) {
    for (size_t i = 0; i < s.checks.size(); ++i) run_one(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    const int nthreads = std::min<size_t>(jobs, s.checks.size());
    for (int t = 0; t < nthreads; ++t)
      workers.emplace_back([&]() {
        while (true) {
          const size_t i = next.fetch_add(1);
          if (i >= s.checks.size()) break;
          run_one(i);
        }
      });
    for (auto& w : workers) w.join();
  }

  RunReport report;
  Json& doc = report.doc;
  doc["tool"] = {{"name", "otgeo"}, {"version", kToolVersion}};
  const Json sj = scenario_to_json(s);
  doc["scenario_digest"] = scenario_digest(s, sj);
  doc["seed"] = s.seed;
  Json checks = Json::array();
  int met = 0, declared = 0, errors = 0;
  for (size_t i = 0; i < s.checks.size(); ++i) {
    Json cj;
    cj["index"] = i;
    cj["op"] = s.checks[i].op;
    cj["params"] = s.checks[i].params;
    if (!slots[i].error.empty()) {
      cj["error"] = slots[i].error;
      ++errors;
      if (s.checks[i].expect) {
        ++declared;
        cj["expect"] = *s.checks[i].expect;
        cj["expect_met"] = false;
        report.all_expectations_met = false;
      }
    } else {
      cj["result"] = slots[i].result;
      if (s.checks[i].expect) {
        ++declared;
        cj["expect"] = *s.checks[i].expect;
        const bool ok = expectation_met(*s.checks[i].expect, slots[i].result);
        cj["expect_met"] = ok;
        if (ok)
          ++met;
        else
          report.all_expectations_met = false;
      }
    }
    cj["wall_ms"] = slots[i].wall_ms;
    checks.push_back(std::move(cj));
  }
  doc["checks"] = checks;
  doc["summary"] = {{"checks", s.checks.size()},
                    {"expect_declared", declared},
                    {"expect_met", met},
                    {"errors", errors}};
  report.any_error = errors > 0;
  {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    doc["timestamp_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  }
  if (!out_dir.empty()) {
    std::ofstream out(out_dir + "/report.json");
    out << doc.dump(2) << "\n";
  }
  return report;
}

Json strip_volatile(Json report) {
  report.erase("timestamp_ms");
  if (report.contains("checks"))
    for (auto& c : report["checks"]) c.erase("wall_ms");
  return report;
}

}  // namespace otgeo
