#include "otgeo/mtw.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace otgeo {

namespace {

std::string box_summary(const Box& b, const std::vector<int>& counts) {
  std::ostringstream os;
  for (int i = 0; i < b.dim(); ++i) {
    const int n = counts.size() == 1 ? counts[0] : counts[static_cast<size_t>(i)];
    if (i) os << "x";
    os << n;
  }
  os << " on ";
  for (int i = 0; i < b.dim(); ++i) {
    const Axis& a = b.axis(i);
    os << (a.periodic ? "[" : "[") << a.lo << "," << a.hi << (a.periodic ? ")p" : "]");
  }
  return os.str();
}

/// Deterministic unit directions in R^n. n=1: {1}; n=2: half-circle
/// angles; n>=3: seeded Gaussian samples, normalized.
std::vector<Vec> unit_directions(int n, int count, std::uint64_t seed) {
  std::vector<Vec> dirs;
  if (n == 1) {
    Vec v(1);
    v[0] = 1.0;
    dirs.push_back(v);
    return dirs;
  }
  if (n == 2) {
    for (int k = 0; k < count; ++k) {
      const double a = M_PI * static_cast<double>(k) / count;
      Vec v(2);
      v << std::cos(a), std::sin(a);
      dirs.push_back(v);
    }
    return dirs;
  }
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (static_cast<int>(dirs.size()) < count) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    const double norm = v.norm();
    if (norm < 1e-8) continue;
    dirs.push_back(v / norm);
  }
  return dirs;
}

/// Closest pair by sweep over the first coordinate. Returns indices and
/// distance; deterministic tie-break by scan order.
struct ClosestPair {
  double dist = kInf;
  int a = -1;
  int b = -1;
};

ClosestPair closest_pair(const std::vector<Vec>& pts) {
  ClosestPair best;
  const int n = static_cast<int>(pts.size());
  if (n < 2) return best;
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    const Vec& a = pts[static_cast<size_t>(i)];
    const Vec& b = pts[static_cast<size_t>(j)];
    for (int k = 0; k < a.size(); ++k) {
      if (a[k] < b[k]) return true;
      if (a[k] > b[k]) return false;
    }
    return i < j;
  });
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec& a = pts[static_cast<size_t>(order[static_cast<size_t>(i)])];
      const Vec& b = pts[static_cast<size_t>(order[static_cast<size_t>(j)])];
      if (b[0] - a[0] >= best.dist) break;
      const double d = (a - b).norm();
      if (d < best.dist) {
        best.dist = d;
        best.a = order[static_cast<size_t>(i)];
        best.b = order[static_cast<size_t>(j)];
      }
    }
  }
  if (best.a > best.b) std::swap(best.a, best.b);
  return best;
}

std::vector<int> stride_subsample(int total, int cap) {
  std::vector<int> idx;
  if (total <= 0) return idx;
  const int take = std::min(total, std::max(1, cap));
  for (int k = 0; k < take; ++k)
    idx.push_back(static_cast<int>(static_cast<long>(k) * total / take));
  return idx;
}

}  // namespace

std::string GridSpec::summary(const Cost& c) const {
  std::ostringstream os;
  os << "x: " << box_summary(resolved_x(c), counts_x)
     << "; y: " << box_summary(resolved_y(c), counts_y) << "; directions: " << directions;
  return os.str();
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

// ---------------------------------------------------------------- A0

ConditionReport check_A0(const Cost& c, const GridSpec& grid, const MtwOptions& opts) {
  ConditionReport rep;
  rep.condition = "A0";
  rep.grid = grid.summary(c);
  rep.tolerances["ratio_threshold"] = opts.a0_ratio_threshold;

  const Box bx = grid.resolved_x(c);
  const Box by = grid.resolved_y(c);
  const auto xs = bx.grid(grid.counts_x);
  const auto ys = by.grid(grid.counts_y);
  double min_spacing = kInf;
  for (int i = 0; i < bx.dim(); ++i) {
    const int n = grid.counts_x.size() == 1 ? grid.counts_x[0]
                                            : grid.counts_x[static_cast<size_t>(i)];
    min_spacing = std::min(min_spacing, bx.axis(i).width() / std::max(1, n));
  }
  for (int j = 0; j < by.dim(); ++j) {
    const int n = grid.counts_y.size() == 1 ? grid.counts_y[0]
                                            : grid.counts_y[static_cast<size_t>(j)];
    min_spacing = std::min(min_spacing, by.axis(j).width() / std::max(1, n));
  }

  const long total = static_cast<long>(xs.size()) * static_cast<long>(ys.size());
  const auto probes = stride_subsample(static_cast<int>(total), opts.max_probe_points);

  double worst_ratio = 0.0;
  int used = 0;
  for (int flat : probes) {
    const Vec& x = xs[static_cast<size_t>(flat) / ys.size()];
    const Vec& y = ys[static_cast<size_t>(flat) % ys.size()];
    const int ax = flat % c.dim_x();
    const int ay = flat % c.dim_y();
    for (int order = 1; order <= 4; ++order) {
      std::vector<Deriv> reqs;
      reqs.emplace_back(std::vector<int>(static_cast<size_t>(order), ax), std::vector<int>{});
      reqs.emplace_back(std::vector<int>{}, std::vector<int>(static_cast<size_t>(order), ay));
      if (order >= 2)
        reqs.emplace_back(std::vector<int>(static_cast<size_t>(order / 2), ax),
                          std::vector<int>(static_cast<size_t>(order - order / 2), ay));
      const double h = std::max(opts.fd.step(order), 0.2 * min_spacing);
      for (const auto& d : reqs) {
        const double d0 = fd_partial_unchecked(c, d, x, y, h);
        const double d1 = fd_partial_unchecked(c, d, x, y, h / 2.0);
        const double d2 = fd_partial_unchecked(c, d, x, y, h / 4.0);
        ++used;
        Witness w;
        w.points = {{"x", x}, {"y", y}};
        w.values["order"] = order;
        if (!std::isfinite(d0) || !std::isfinite(d1) || !std::isfinite(d2)) {
          w.values["ratio"] = kInf;
          rep.witnesses.push_back(std::move(w));
          worst_ratio = kInf;
          continue;
        }
        const double fscale = std::max(std::abs(c.value(x, y)), 1.0);
        const double noise = fd_rounding_noise(order, h / 4.0, fscale);
        const double e1 = std::abs(d0 - d1);
        const double e2 = std::abs(d1 - d2);
        if (e2 <= std::max(noise, 1e-9 * fscale)) continue;  // converged to noise
        const double ratio = e2 / std::max(e1, 1e-300);
        if (ratio > worst_ratio) worst_ratio = ratio;
        if (ratio > opts.a0_ratio_threshold) {
          w.values["ratio"] = ratio;
          w.values["e1"] = e1;
          w.values["e2"] = e2;
          rep.witnesses.push_back(std::move(w));
        }
      }
    }
  }
  if (used == 0) {
    rep.verdict = Verdict::inconclusive;
    rep.notes.push_back("no usable probe points");
    return rep;
  }
  rep.margin = opts.a0_ratio_threshold - worst_ratio;
  rep.verdict = rep.witnesses.empty() ? Verdict::pass : Verdict::fail;
  rep.notes.push_back("derivative stability under step refinement, orders 1-4");
  return rep;
}

// ---------------------------------------------------------------- A1

ConditionReport check_A1_plus(const Cost& c, const GridSpec& grid, const MtwOptions& opts) {
  ConditionReport rep;
  rep.condition = "A1+";
  rep.grid = grid.summary(c);
  const Box bx = grid.resolved_x(c);
  const Box by = grid.resolved_y(c);
  const auto xs = bx.grid(grid.counts_x);
  const auto ys = by.grid(grid.counts_y);

  // Collect image clouds once to fix a global collision scale.
  std::vector<std::vector<Vec>> clouds(xs.size());
  std::vector<std::vector<int>> kept(xs.size());
  double image_scale = 0.0;
  for (size_t ix = 0; ix < xs.size(); ++ix) {
    clouds[ix].reserve(ys.size());
    for (size_t jy = 0; jy < ys.size(); ++jy) {
      if (c.excluded(xs[ix], ys[jy])) continue;
      Vec g;
      try {
        g = c.grad_x(xs[ix], ys[jy]);
      } catch (const DomainError&) {
        continue;
      }
      image_scale = std::max(image_scale, g.cwiseAbs().maxCoeff());
      clouds[ix].push_back(std::move(g));
      kept[ix].push_back(static_cast<int>(jy));
    }
  }
  const double col_tol = opts.collision_rel * std::max(image_scale, 1e-12);
  rep.tolerances["collision_tol"] = col_tol;

  double min_gap = kInf;
  int best_x = -1;
  ClosestPair best_pair;
  for (size_t ix = 0; ix < xs.size(); ++ix) {
    if (clouds[ix].size() < 2) continue;
    const ClosestPair cp = closest_pair(clouds[ix]);
    if (cp.dist < min_gap) {
      min_gap = cp.dist;
      best_x = static_cast<int>(ix);
      best_pair = cp;
    }
  }
  if (best_x < 0) {
    rep.verdict = Verdict::inconclusive;
    rep.notes.push_back("fewer than two image points per base");
    return rep;
  }
  rep.margin = min_gap - col_tol;
  rep.verdict = rep.margin < 0.0 ? Verdict::fail : Verdict::pass;
  Witness w;
  w.points = {{"x0", xs[static_cast<size_t>(best_x)]},
              {"y_a", ys[static_cast<size_t>(kept[static_cast<size_t>(best_x)]
                                                 [static_cast<size_t>(best_pair.a)])]},
              {"y_b", ys[static_cast<size_t>(kept[static_cast<size_t>(best_x)]
                                                 [static_cast<size_t>(best_pair.b)])]}};
  w.values["image_distance"] = min_gap;
  rep.witnesses.push_back(std::move(w));
  rep.notes.push_back(
      "injectivity of y -> D_x c(x0, y); a collision is a critical point of the "
      "cross-difference restricted to a horizontal fibre");
  return rep;
}

ConditionReport check_A1(const Cost& c, const GridSpec& grid, const MtwOptions& opts) {
  ConditionReport fwd = check_A1_plus(c, grid, opts);
  ReflectedCost refl(c);
  GridSpec swapped = grid;
  std::swap(swapped.counts_x, swapped.counts_y);
  std::swap(swapped.bounds_x, swapped.bounds_y);
  ConditionReport bwd = check_A1_plus(refl, swapped, opts);

  ConditionReport rep;
  rep.condition = "A1";
  rep.grid = fwd.grid;
  rep.tolerances = fwd.tolerances;
  if (fwd.verdict == Verdict::inconclusive || bwd.verdict == Verdict::inconclusive)
    rep.verdict = Verdict::inconclusive;
  else if (fwd.verdict == Verdict::fail || bwd.verdict == Verdict::fail)
    rep.verdict = Verdict::fail;
  else
    rep.verdict = Verdict::pass;
  rep.margin = std::min(fwd.margin, bwd.margin);
  for (auto& w : fwd.witnesses) {
    w.values["reflected"] = 0.0;
    rep.witnesses.push_back(std::move(w));
  }
  for (auto& w : bwd.witnesses) {
    w.values["reflected"] = 1.0;
    rep.witnesses.push_back(std::move(w));
  }
  rep.notes.push_back("A1+ for the cost and its reflection");
  return rep;
}

// ---------------------------------------------------------------- A2

ConditionReport check_A2(const Cost& c, const GridSpec& grid, const MtwOptions& opts) {
  if (c.dim_x() != c.dim_y())
    throw DimensionMismatch("check_A2: determinant requires n+ == n-");
  ConditionReport rep;
  rep.condition = "A2";
  rep.grid = grid.summary(c);
  rep.tolerances["det_threshold"] = opts.det_threshold;

  const auto xs = grid.resolved_x(c).grid(grid.counts_x);
  const auto ys = grid.resolved_y(c).grid(grid.counts_y);
  struct Entry {
    double det;
    Vec rows;
    int ix, jy;
  };
  std::vector<Entry> entries;
  double scale = 0.0;
  for (size_t ix = 0; ix < xs.size(); ++ix) {
    for (size_t jy = 0; jy < ys.size(); ++jy) {
      if (c.excluded(xs[ix], ys[jy])) continue;
      Mat C;
      try {
        C = c.cross_hessian(xs[ix], ys[jy]);
      } catch (const DomainError&) {
        continue;
      }
      Entry e;
      e.det = C.determinant();
      e.rows = C.rowwise().norm();
      e.ix = static_cast<int>(ix);
      e.jy = static_cast<int>(jy);
      scale = std::max(scale, e.rows.maxCoeff());
      entries.push_back(std::move(e));
    }
  }
  if (entries.empty()) {
    rep.verdict = Verdict::inconclusive;
    rep.notes.push_back("no evaluable grid points");
    return rep;
  }
  const double floor = opts.row_floor_rel * std::max(scale, 1e-12);
  double min_margin = kInf;
  const Entry* worst = nullptr;
  for (const auto& e : entries) {
    double denom = 1.0;
    for (int i = 0; i < e.rows.size(); ++i) denom *= std::max(e.rows[i], floor);
    const double m = std::abs(e.det) / denom;
    if (m < min_margin) {
      min_margin = m;
      worst = &e;
    }
  }
  rep.margin = min_margin;
  rep.verdict = min_margin < opts.det_threshold ? Verdict::fail : Verdict::pass;
  Witness w;
  w.points = {{"x0", xs[static_cast<size_t>(worst->ix)]},
              {"y0", ys[static_cast<size_t>(worst->jy)]}};
  w.values["normalized_det"] = min_margin;
  w.values["det"] = worst->det;
  rep.witnesses.push_back(std::move(w));
  return rep;
}

// ---------------------------------------------------------------- MTW kernel

MtwKernel::MtwKernel(const Cost& c, const BasePoint& base, const FDScheme& scheme,
                     const SignatureOptions& rank)
    : base_(base), n_(c.dim_x()) {
  if (c.dim_x() != c.dim_y())
    throw DimensionMismatch("MtwKernel: tensor requires n+ == n-");
  const Vec& x = base.x0;
  const Vec& y = base.y0;
  cross_ = Mat(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      cross_(i, j) = c.derivative(Deriv{{i}, {j}}, x, y, scheme);
  Eigen::JacobiSVD<Mat> svd(cross_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smax = svd.singularValues().maxCoeff();
  const double cut = std::max(rank.rel_tol * smax, rank.abs_floor);
  if (svd.singularValues().minCoeff() <= cut)
    throw DegenerateMetric("MtwKernel: c_{i,j} numerically singular at base");
  cross_inverse_ = svd.solve(Mat::Identity(n_, n_));

  t3a_.assign(static_cast<size_t>(n_), Mat(n_, n_));
  t3b_.assign(static_cast<size_t>(n_), Mat(n_, n_));
  for (int m = 0; m < n_; ++m)
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) {
        const double v = c.derivative(Deriv{{i, j}, {m}}, x, y, scheme);
        t3a_[static_cast<size_t>(m)](i, j) = v;
        t3a_[static_cast<size_t>(m)](j, i) = v;
      }
  for (int n = 0; n < n_; ++n)
    for (int k = 0; k < n_; ++k)
      for (int l = k; l < n_; ++l) {
        const double v = c.derivative(Deriv{{n}, {k, l}}, x, y, scheme);
        t3b_[static_cast<size_t>(n)](k, l) = v;
        t3b_[static_cast<size_t>(n)](l, k) = v;
      }
  t4_.assign(static_cast<size_t>(n_ * n_ * n_ * n_), 0.0);
  for (int i = 0; i < n_; ++i)
    for (int j = i; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = k; l < n_; ++l) {
          const double v = c.derivative(Deriv{{i, j}, {k, l}}, x, y, scheme);
          const auto at = [&](int a, int b, int cc, int dd) -> double& {
            return t4_[static_cast<size_t>(((a * n_ + b) * n_ + cc) * n_ + dd)];
          };
          at(i, j, k, l) = v;
          at(j, i, k, l) = v;
          at(i, j, l, k) = v;
          at(j, i, l, k) = v;
        }
}

double MtwKernel::operator()(VecRef p, VecRef q) const {
  if (p.size() != n_ || q.size() != n_)
    throw DimensionMismatch("MtwKernel: direction dimension mismatch");
  double s4 = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      double inner = 0.0;
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l)
          inner += t4_[static_cast<size_t>(((i * n_ + j) * n_ + k) * n_ + l)] * q[k] * q[l];
      s4 += p[i] * p[j] * inner;
    }
  Vec alpha(n_), beta(n_);
  for (int m = 0; m < n_; ++m) alpha[m] = p.dot(t3a_[static_cast<size_t>(m)] * p);
  for (int n = 0; n < n_; ++n) beta[n] = q.dot(t3b_[static_cast<size_t>(n)] * q);
  return -s4 + alpha.dot(cross_inverse_ * beta);
}

double mtw_sectional(const Cost& c, const BasePoint& base, VecRef p, VecRef q,
                     const FDScheme& scheme) {
  return MtwKernel(c, base, scheme)(p, q);
}

// ---------------------------------------------------------------- A3

ConditionReport check_A3(const Cost& c, const GridSpec& grid, const MtwOptions& opts) {
  ConditionReport rep;
  rep.condition = opts.strict ? "A3s" : "A3";
  rep.grid = grid.summary(c);
  rep.tolerances["margin_tol"] = opts.margin_tol;
  if (opts.strict) rep.tolerances["C0"] = opts.C0;

  const auto xs = grid.resolved_x(c).grid(grid.counts_x);
  const auto ys = grid.resolved_y(c).grid(grid.counts_y);
  const auto pdirs = unit_directions(c.dim_x(), grid.directions, grid.seed);
  const auto qdirs = unit_directions(c.dim_y(), grid.directions, grid.seed + 1);

  double margin = kInf;
  Witness best;
  long scanned = 0;
  int degenerate_bases = 0;
  for (const auto& x0 : xs) {
    for (const auto& y0 : ys) {
      if (c.excluded(x0, y0)) continue;
      std::optional<MtwKernel> kernel;
      try {
        kernel.emplace(c, BasePoint{x0, y0}, opts.fd, opts.rank);
      } catch (const DegenerateMetric&) {
        ++degenerate_bases;
        continue;
      } catch (const DomainError&) {
        continue;
      }
      for (const auto& q : qdirs) {
        const Vec w = kernel->cross() * q;
        const double wn = w.norm();
        for (const auto& praw : pdirs) {
          Vec p = praw;
          if (wn > 1e-14) p -= (p.dot(w) / (wn * wn)) * w;
          const double pn = p.norm();
          if (pn < 0.1) continue;  // collapsed onto the constraint normal
          p /= pn;
          const double val = (*kernel)(p, q) - (opts.strict ? opts.C0 : 0.0);
          ++scanned;
          if (val < margin) {
            margin = val;
            best.points = {{"x0", x0}, {"y0", y0}, {"p", p}, {"q", q}};
            best.values["tensor_minus_C0"] = val;
          }
        }
      }
    }
  }
  if (degenerate_bases > 0) {
    rep.notes.push_back("degenerate bases excluded from scan: " +
                        std::to_string(degenerate_bases));
    rep.tolerances["degenerate_bases"] = degenerate_bases;
  }
  if (scanned == 0) {
    rep.verdict = Verdict::pass;
    rep.margin = kInf;
    rep.notes.push_back("no lightlike direction pairs at this dimension/grid");
    return rep;
  }
  rep.margin = margin;
  rep.witnesses.push_back(best);
  rep.verdict = margin >= -opts.margin_tol ? Verdict::pass : Verdict::fail;
  return rep;
}

// ---------------------------------------------------------------- A4

std::vector<Vec> image_set(const Cost& c, VecRef x0, const std::vector<Vec>& y_points) {
  if (x0.size() != c.dim_x()) throw DimensionMismatch("image_set: x0 dimension mismatch");
  if (!c.domain_x().contains(x0)) throw DomainError("image_set: x0 outside domain");
  std::vector<Vec> images;
  images.reserve(y_points.size());
  for (const auto& y : y_points) {
    if (c.excluded(x0, y)) continue;
    try {
      images.push_back(c.grad_x(x0, y));
    } catch (const DomainError&) {
      // grid point too close to the excluded set for the stencil
    }
  }
  return images;
}

namespace {

struct SideScan {
  double max_mid_dist = 0.0;
  double tol = 0.0;
  bool inconclusive = false;
  std::string why;
  Witness witness;
  double min_curvature = kInf;
  bool curvature_done = false;
};

/// Image points of a structured grid, with multi-index retained so grid
/// neighbors can estimate the cloud resolution.
SideScan scan_side(const Cost& c, const Box& by, const std::vector<int>& counts_in,
                   const std::vector<Vec>& xs, const MtwOptions& opts) {
  SideScan out;
  std::vector<int> counts = counts_in;
  if (counts.size() == 1 && by.dim() > 1)
    counts.assign(static_cast<size_t>(by.dim()), counts_in[0]);

  std::vector<int> refined(counts);
  for (auto& v : refined) v *= opts.refine_factor;
  const auto ygrid = by.grid(counts);
  const auto yref = by.grid(refined);

  const auto base_probes = stride_subsample(static_cast<int>(xs.size()), opts.max_base_points);
  for (int bp : base_probes) {
    const Vec& x0 = xs[static_cast<size_t>(bp)];
    // refined cloud with grid indices for adjacency
    std::vector<Vec> rimg;
    std::vector<long> rflat;
    rimg.reserve(yref.size());
    for (size_t t = 0; t < yref.size(); ++t) {
      if (c.excluded(x0, yref[t])) continue;
      try {
        rimg.push_back(c.grad_x(x0, yref[t]));
        rflat.push_back(static_cast<long>(t));
      } catch (const DomainError&) {
      }
    }
    const auto bimg = image_set(c, x0, ygrid);
    if (static_cast<int>(bimg.size()) < by.dim() + 2 || rimg.size() < 2 * bimg.size()) {
      out.inconclusive = true;
      out.why = "image cloud too small";
      continue;
    }
    // resolution: image spacing between grid-adjacent refined samples
    std::map<long, size_t> index_of;
    for (size_t t = 0; t < rflat.size(); ++t) index_of[rflat[t]] = t;
    std::vector<long> axis_stride(static_cast<size_t>(by.dim()), 1);
    for (int ax = by.dim() - 2; ax >= 0; --ax)
      axis_stride[static_cast<size_t>(ax)] = axis_stride[static_cast<size_t>(ax + 1)] *
                                             refined[static_cast<size_t>(ax + 1)];
    double resolution = 0.0;
    int edges = 0;
    for (size_t t = 0; t < rflat.size(); ++t) {
      long rem = rflat[t];
      for (int ax = 0; ax < by.dim(); ++ax) {
        const long idx = rem / axis_stride[static_cast<size_t>(ax)];
        rem %= axis_stride[static_cast<size_t>(ax)];
        if (idx + 1 >= refined[static_cast<size_t>(ax)]) continue;  // row end
        auto nb = index_of.find(rflat[t] + axis_stride[static_cast<size_t>(ax)]);
        if (nb == index_of.end()) continue;
        resolution = std::max(resolution, (rimg[t] - rimg[nb->second]).norm());
        ++edges;
      }
    }
    if (edges == 0) {
      out.inconclusive = true;
      out.why = "no adjacent refined samples";
      continue;
    }
    Vec lo = rimg[0], hi = rimg[0];
    for (const auto& v : rimg) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    const double diam = (hi - lo).norm();
    if (resolution > diam / opts.resolution_ratio && diam > 0.0) {
      out.inconclusive = true;
      out.why = "cloud resolution too coarse for the convexity test";
      continue;
    }
    const double tol = opts.convexity_tol_factor * resolution;
    out.tol = std::max(out.tol, tol);

    Mat R(static_cast<long>(rimg.size()), rimg[0].size());
    for (size_t t = 0; t < rimg.size(); ++t) R.row(static_cast<long>(t)) = rimg[t];

    const long npairs =
        static_cast<long>(bimg.size()) * (static_cast<long>(bimg.size()) - 1) / 2;
    const long stride = std::max(1L, npairs / std::max(1L, opts.pair_budget));
    long pair_index = 0;
    for (size_t a = 0; a < bimg.size(); ++a) {
      for (size_t b = a + 1; b < bimg.size(); ++b, ++pair_index) {
        if (pair_index % stride != 0) continue;
        const Vec mid = 0.5 * (bimg[a] + bimg[b]);
        const double d2 = (R.rowwise() - mid.transpose()).rowwise().squaredNorm().minCoeff();
        const double d = std::sqrt(d2);
        if (d > out.max_mid_dist) {
          out.max_mid_dist = d;
          out.witness.points = {{"x0", x0}, {"midpoint", mid}};
          out.witness.values["distance"] = d;
        }
      }
    }

    if (opts.strong && by.dim() >= 2) {
      // boundary samples: grid nodes with an extremal index on some
      // non-periodic axis
      std::vector<Vec> boundary;
      std::vector<int> cidx(static_cast<size_t>(by.dim()), 0);
      for (size_t t = 0; t < ygrid.size(); ++t) {
        long rem = static_cast<long>(t);
        bool on_boundary = false;
        for (int axisi = by.dim() - 1; axisi >= 0; --axisi) {
          const int cnt = counts[static_cast<size_t>(axisi)];
          cidx[static_cast<size_t>(axisi)] = static_cast<int>(rem % cnt);
          rem /= cnt;
        }
        for (int axisi = 0; axisi < by.dim(); ++axisi) {
          if (by.axis(axisi).periodic) continue;
          const int cnt = counts[static_cast<size_t>(axisi)];
          if (cidx[static_cast<size_t>(axisi)] == 0 ||
              cidx[static_cast<size_t>(axisi)] == cnt - 1)
            on_boundary = true;
        }
        if (!on_boundary || c.excluded(x0, ygrid[t])) continue;
        try {
          boundary.push_back(c.grad_x(x0, ygrid[t]));
        } catch (const DomainError&) {
        }
      }
      const int k = 2 * by.dim() + 4;
      if (static_cast<int>(boundary.size()) >= k + 1) {
        Vec centroid = Vec::Zero(bimg[0].size());
        for (const auto& v : bimg) centroid += v;
        centroid /= static_cast<double>(bimg.size());
        for (size_t bpt = 0; bpt < boundary.size(); ++bpt) {
          std::vector<std::pair<double, size_t>> dist;
          for (size_t o = 0; o < boundary.size(); ++o)
            if (o != bpt) dist.emplace_back((boundary[o] - boundary[bpt]).norm(), o);
          std::sort(dist.begin(), dist.end());
          const int kk = std::min<int>(k, static_cast<int>(dist.size()));
          Mat nbrs(kk, boundary[0].size());
          for (int o = 0; o < kk; ++o)
            nbrs.row(o) = boundary[dist[static_cast<size_t>(o)].second] - boundary[bpt];
          Eigen::JacobiSVD<Mat> svd(nbrs, Eigen::ComputeFullV);
          const Mat V = svd.matrixV();
          Vec normal = V.col(V.cols() - 1);
          if (normal.dot(centroid - boundary[bpt]) < 0) normal = -normal;
          const int td = static_cast<int>(V.cols()) - 1;
          // quadric fit zeta = 0.5 xi^T Q xi + b xi + c
          const int nq = td * (td + 1) / 2 + td + 1;
          Mat A(kk, nq);
          Vec rhs(kk);
          for (int o = 0; o < kk; ++o) {
            const Vec dv = nbrs.row(o).transpose();
            Vec xi(td);
            for (int tt = 0; tt < td; ++tt) xi[tt] = dv.dot(V.col(tt));
            rhs[o] = dv.dot(normal);
            int colu = 0;
            for (int aq = 0; aq < td; ++aq)
              for (int bq = aq; bq < td; ++bq)
                A(o, colu++) = (aq == bq ? 0.5 : 1.0) * xi[aq] * xi[bq];
            for (int tt = 0; tt < td; ++tt) A(o, colu++) = xi[tt];
            A(o, colu) = 1.0;
          }
          const Vec sol = A.colPivHouseholderQr().solve(rhs);
          Mat Q(td, td);
          int colu = 0;
          for (int aq = 0; aq < td; ++aq)
            for (int bq = aq; bq < td; ++bq) {
              Q(aq, bq) = Q(bq, aq) = sol[colu++];
            }
          Eigen::SelfAdjointEigenSolver<Mat> es(Q);
          out.min_curvature = std::min(out.min_curvature, es.eigenvalues().minCoeff());
          out.curvature_done = true;
        }
      }
    }
  }
  return out;
}

}  // namespace

ConditionReport check_A4(const Cost& c, const GridSpec& grid, const MtwOptions& opts) {
  ConditionReport rep;
  rep.condition = opts.strong ? "A4s" : "A4";
  rep.grid = grid.summary(c);
  const auto xs = grid.resolved_x(c).grid(grid.counts_x);
  const auto ys = grid.resolved_y(c).grid(grid.counts_y);

  SideScan fwd = scan_side(c, grid.resolved_y(c), grid.counts_y, xs, opts);
  ReflectedCost refl(c);
  SideScan bwd = scan_side(refl, grid.resolved_x(c), grid.counts_x, ys, opts);

  const double tol = std::max(fwd.tol, bwd.tol);
  rep.tolerances["convexity_tol"] = tol;
  const double worst = std::max(fwd.max_mid_dist, bwd.max_mid_dist);
  rep.margin = -worst;
  if (fwd.inconclusive && bwd.inconclusive) {
    rep.verdict = Verdict::inconclusive;
    rep.notes.push_back(fwd.why);
    return rep;
  }
  bool fail = false;
  if (!fwd.inconclusive && fwd.max_mid_dist > fwd.tol) {
    fail = true;
    fwd.witness.values["reflected"] = 0.0;
    rep.witnesses.push_back(fwd.witness);
  }
  if (!bwd.inconclusive && bwd.max_mid_dist > bwd.tol) {
    fail = true;
    bwd.witness.values["reflected"] = 1.0;
    rep.witnesses.push_back(bwd.witness);
  }
  if (!fail && fwd.witness.points.size()) {
    rep.witnesses.push_back(fwd.witness);  // closest-to-failing midpoint
  }
  rep.verdict = fail ? Verdict::fail : Verdict::pass;
  if (fwd.inconclusive || bwd.inconclusive)
    rep.notes.push_back("one side inconclusive: " + (fwd.inconclusive ? fwd.why : bwd.why));

  if (opts.strong) {
    if (c.dim_y() < 2) {
      rep.verdict = Verdict::inconclusive;
      rep.notes.push_back("strong convexity needs boundary curvature; undefined in 1-D");
    } else if (!fwd.curvature_done && !bwd.curvature_done) {
      rep.verdict = Verdict::inconclusive;
      rep.notes.push_back("not enough boundary samples for curvature fits");
    } else {
      const double curv = std::min(fwd.min_curvature, bwd.min_curvature);
      rep.tolerances["min_boundary_curvature"] = curv;
      if (curv <= 0.0 && rep.verdict == Verdict::pass) rep.verdict = Verdict::fail;
      rep.notes.push_back("strong form: least fitted boundary curvature " +
                          std::to_string(curv));
    }
  }
  return rep;
}

}  // namespace otgeo
