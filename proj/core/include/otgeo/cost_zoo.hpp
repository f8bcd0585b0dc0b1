#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "otgeo/cost.hpp"

namespace otgeo {

/// Parsed description of a catalogue cost. Domains default per cost
/// when not supplied; the defaults are a tool convention.
struct CostSpec {
  std::string name;
  int dim = 1;                       // n for the R^n costs (circle charts are 1-D)
  double p = 3.0;                    // exponent for the power cost
  double cut_clearance = 0.1;        // radians, circle geodesic cost
  std::optional<Box> domain_x;
  std::optional<Box> domain_y;
};

/// c(x,y) = -x.y
std::unique_ptr<Cost> bilinear_cost(int dim, std::optional<Box> dx = {},
                                    std::optional<Box> dy = {});
/// c(x,y) = |x-y|^2 / 2
std::unique_ptr<Cost> quadratic_cost(int dim, std::optional<Box> dx = {},
                                     std::optional<Box> dy = {});
/// c(x,y) = |x-y|, diagonal excluded
std::unique_ptr<Cost> euclidean_cost(int dim, std::optional<Box> dx = {},
                                     std::optional<Box> dy = {});
/// c(x,y) = -log|x-y|, diagonal excluded
std::unique_ptr<Cost> log_cost(int dim, std::optional<Box> dx = {},
                               std::optional<Box> dy = {});
/// c(x,y) = |x-y|^p / p; diagonal excluded unless p is an even integer
std::unique_ptr<Cost> power_cost(int dim, double p, std::optional<Box> dx = {},
                                 std::optional<Box> dy = {});
/// c(theta,phi) = 1 - cos(theta - phi), the restriction of |x-y|^2/2 to
/// unit vectors in angle coordinates
std::unique_ptr<Cost> circle_chord_cost();
/// c(theta,phi) = wrap(theta - phi)^2 / 2, cut locus excluded with clearance
std::unique_ptr<Cost> circle_geodesic_cost(double cut_clearance = 0.1);

std::unique_ptr<Cost> make_cost(const CostSpec& spec);

struct CatalogueEntry {
  std::string name;
  std::string formula;
  std::string notes;
};
const std::vector<CatalogueEntry>& cost_catalogue();

}  // namespace otgeo
