#include "otgeo/box.hpp"

#include <cmath>

namespace otgeo {

Box Box::cube(int dim, double lo, double hi) {
  std::vector<Axis> axes(static_cast<size_t>(dim));
  for (auto& a : axes) a = Axis{lo, hi, false};
  return Box(std::move(axes));
}

Box Box::circle(int dim) {
  std::vector<Axis> axes(static_cast<size_t>(dim));
  for (auto& a : axes) a = Axis{0.0, 2.0 * M_PI, true};
  return Box(std::move(axes));
}

bool Box::contains(VecRef v, double margin) const {
  if (v.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    const Axis& a = axes_[static_cast<size_t>(i)];
    if (a.periodic) continue;
    if (v[i] < a.lo + margin || v[i] > a.hi - margin) return false;
  }
  return true;
}

Vec Box::wrap(VecRef v) const {
  Vec out = v;
  for (int i = 0; i < dim(); ++i) {
    const Axis& a = axes_[static_cast<size_t>(i)];
    if (!a.periodic) continue;
    const double w = a.width();
    double t = std::fmod(out[i] - a.lo, w);
    if (t < 0) t += w;
    out[i] = a.lo + t;
  }
  return out;
}

double Box::boundary_clearance(VecRef v) const {
  double best = kInf;
  for (int i = 0; i < dim(); ++i) {
    const Axis& a = axes_[static_cast<size_t>(i)];
    if (a.periodic) continue;
    best = std::min(best, std::min(v[i] - a.lo, a.hi - v[i]));
  }
  return best;
}

Vec Box::sample_interior(std::mt19937_64& rng, double margin) const {
  Vec v(dim());
  for (int i = 0; i < dim(); ++i) {
    const Axis& a = axes_[static_cast<size_t>(i)];
    const double lo = a.periodic ? a.lo : a.lo + margin;
    const double hi = a.periodic ? a.hi : a.hi - margin;
    std::uniform_real_distribution<double> dist(lo, hi);
    v[i] = dist(rng);
  }
  return v;
}

std::vector<Vec> Box::grid(const std::vector<int>& counts) const {
  std::vector<int> c = counts;
  if (c.size() == 1 && dim() > 1) c.assign(static_cast<size_t>(dim()), counts[0]);
  std::vector<Vec> pts;
  if (static_cast<int>(c.size()) != dim()) return pts;
  long total = 1;
  for (int i = 0; i < dim(); ++i) total *= std::max(1, c[static_cast<size_t>(i)]);
  pts.reserve(static_cast<size_t>(total));
  std::vector<int> idx(static_cast<size_t>(dim()), 0);
  while (true) {
    Vec v(dim());
    for (int i = 0; i < dim(); ++i) {
      const Axis& a = axes_[static_cast<size_t>(i)];
      const int n = std::max(1, c[static_cast<size_t>(i)]);
      if (n == 1) {
        v[i] = 0.5 * (a.lo + a.hi);
      } else if (a.periodic) {
        v[i] = a.lo + a.width() * static_cast<double>(idx[static_cast<size_t>(i)]) / n;
      } else {
        v[i] = a.lo + (a.hi - a.lo) * static_cast<double>(idx[static_cast<size_t>(i)]) / (n - 1);
      }
    }
    pts.push_back(std::move(v));
    int ax = dim() - 1;
    while (ax >= 0) {
      if (++idx[static_cast<size_t>(ax)] < std::max(1, c[static_cast<size_t>(ax)])) break;
      idx[static_cast<size_t>(ax)] = 0;
      --ax;
    }
    if (ax < 0) break;
  }
  return pts;
}

double wrap_angle(double t) {
  double w = std::remainder(t, 2.0 * M_PI);
  // remainder returns in [-pi, pi]; map -pi to +pi for a (-pi, pi] chart
  if (w <= -M_PI) w = M_PI;
  return w;
}

}  // namespace otgeo
