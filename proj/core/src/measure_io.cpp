#include "otgeo/measure_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace otgeo {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

MeasureLoad load_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open measure file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IOError("empty measure file: " + path);
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "w")
    throw IOError(path + ": measure CSV must start with header w,x1,...,xn");
  const int dim = static_cast<int>(header.size()) - 1;
  if (dim < 1) throw IOError(path + ": measure CSV needs at least one coordinate column");

  std::vector<Vec> atoms;
  std::vector<double> weights;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != dim + 1)
      throw IOError(path + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(dim + 1) + " fields");
    try {
      weights.push_back(std::stod(fields[0]));
      Vec a(dim);
      for (int i = 0; i < dim; ++i) a[i] = std::stod(fields[static_cast<size_t>(i) + 1]);
      atoms.push_back(std::move(a));
    } catch (const std::exception&) {
      throw IOError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  MeasureLoad out;
  out.measure = DiscreteMeasure::create(std::move(atoms), std::move(weights));
  out.raw_weight_sum = out.measure.raw_weight_sum();
  out.normalized_warning = std::abs(out.raw_weight_sum - 1.0) > 1e-6;
  return out;
}

void save_measure_csv(const std::string& path, const DiscreteMeasure& m) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write measure file: " + path);
  out << "w";
  for (int i = 0; i < m.dim(); ++i) out << ",x" << (i + 1);
  out << "\n";
  for (int i = 0; i < m.size(); ++i) {
    out << format_double(m.weight(i));
    for (int d = 0; d < m.dim(); ++d) out << "," << format_double(m.atom(i)[d]);
    out << "\n";
  }
}

std::string measure_digest(const DiscreteMeasure& m) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ull;
    }
  };
  for (int i = 0; i < m.size(); ++i) {
    mix(format_double(m.weight(i)));
    mix(";");
    for (int d = 0; d < m.dim(); ++d) {
      mix(format_double(m.atom(i)[d]));
      mix(",");
    }
    mix("|");
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

void save_plan(const std::string& base_path, const TransportPlan& plan,
               const std::string& cost_name, double cost_value) {
  std::ofstream csv(base_path + ".csv");
  if (!csv) throw IOError("cannot write plan file: " + base_path + ".csv");
  csv << "i,j,mass\n";
  for (const auto& e : plan.entries())
    csv << e.i << "," << e.j << "," << format_double(e.mass) << "\n";

  nlohmann::json meta;
  meta["source_digest"] = measure_digest(plan.source());
  meta["target_digest"] = measure_digest(plan.target());
  meta["source_atoms"] = plan.source().size();
  meta["target_atoms"] = plan.target().size();
  meta["entries"] = plan.entries().size();
  meta["cost_name"] = cost_name;
  meta["kantorovich_cost"] = cost_value;
  std::ofstream js(base_path + ".json");
  if (!js) throw IOError("cannot write plan header: " + base_path + ".json");
  js << meta.dump(2) << "\n";
}

TransportPlan load_plan(const std::string& base_path, MeasurePtr mu, MeasurePtr nu,
                        bool verify_digests) {
  if (verify_digests) {
    std::ifstream js(base_path + ".json");
    if (!js) throw IOError("cannot open plan header: " + base_path + ".json");
    nlohmann::json meta = nlohmann::json::parse(js, nullptr, true);
    if (meta.value("source_digest", "") != measure_digest(*mu) ||
        meta.value("target_digest", "") != measure_digest(*nu))
      throw IOError(base_path + ": plan header digests do not match the measures");
  }
  std::ifstream csv(base_path + ".csv");
  if (!csv) throw IOError("cannot open plan file: " + base_path + ".csv");
  std::string line;
  if (!std::getline(csv, line) || split_csv_line(line) != std::vector<std::string>{"i", "j", "mass"})
    throw IOError(base_path + ".csv: expected header i,j,mass");
  std::vector<PlanEntry> entries;
  int lineno = 1;
  while (std::getline(csv, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3)
      throw IOError(base_path + ".csv:" + std::to_string(lineno) + ": expected 3 fields");
    entries.push_back({std::stoi(f[0]), std::stoi(f[1]), std::stod(f[2])});
  }
  return TransportPlan(std::move(mu), std::move(nu), std::move(entries));
}

}  // namespace otgeo
