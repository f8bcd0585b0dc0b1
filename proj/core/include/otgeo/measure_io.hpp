#pragma once

#include <string>

#include "otgeo/discrete.hpp"

namespace otgeo {

struct MeasureLoad {
  DiscreteMeasure measure;
  double raw_weight_sum = 1.0;
  bool normalized_warning = false;  // raw sum deviated from 1 by > 1e-6
};

/// CSV with header `w,x1,...,xn`, one atom per row. Weights are
/// normalized at load; a deviation of the raw sum from 1 beyond 1e-6
/// sets the warning flag.
MeasureLoad load_measure_csv(const std::string& path);
void save_measure_csv(const std::string& path, const DiscreteMeasure& m);

/// FNV-1a over the canonical text serialization of atoms and weights.
std::string measure_digest(const DiscreteMeasure& m);

/// Plan files: `<base>.csv` holds `i,j,mass`; `<base>.json` holds the
/// measure digests and summary metadata.
void save_plan(const std::string& base_path, const TransportPlan& plan,
               const std::string& cost_name, double cost_value);
TransportPlan load_plan(const std::string& base_path, MeasurePtr mu, MeasurePtr nu,
                        bool verify_digests = true);

}  // namespace otgeo
