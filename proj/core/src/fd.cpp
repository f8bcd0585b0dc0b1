#include "otgeo/fd.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace otgeo {

namespace {
constexpr double kEps = 2.220446049250313e-16;

struct StencilAxis {
  bool on_x;
  int index;
  double step;  // scaled step for this application
};

std::vector<StencilAxis> stencil_axes(const Deriv& d, VecRef x, VecRef y, double h) {
  std::vector<StencilAxis> axes;
  axes.reserve(static_cast<size_t>(d.order()));
  for (int i : d.ix) axes.push_back({true, i, h * std::max(1.0, std::abs(x[i]))});
  for (int j : d.iy) axes.push_back({false, j, h * std::max(1.0, std::abs(y[j]))});
  return axes;
}
}  // namespace

double FDScheme::step(int order) const {
  const int m = std::clamp(order, 1, 4);
  return step_scale[static_cast<size_t>(m)] *
         std::pow(kEps, 1.0 / static_cast<double>(m + 2));
}

double fd_stencil(const Cost& c, const Deriv& d, VecRef x, VecRef y, double h) {
  const auto axes = stencil_axes(d, x, y, h);
  const int m = static_cast<int>(axes.size());
  if (m == 0) return c.value(x, y);
  double denom = 1.0;
  for (const auto& a : axes) denom *= 2.0 * a.step;
  double sum = 0.0;
  const int corners = 1 << m;
  Vec xs(x.size()), ys(y.size());
  for (int mask = 0; mask < corners; ++mask) {
    xs = x;
    ys = y;
    int parity = 0;
    for (int k = 0; k < m; ++k) {
      const double s = (mask >> k) & 1 ? 1.0 : -1.0;
      if (s < 0) ++parity;
      const auto& a = axes[static_cast<size_t>(k)];
      if (a.on_x)
        xs[a.index] += s * a.step;
      else
        ys[a.index] += s * a.step;
    }
    const double f = c.value(xs, ys);
    sum += (parity & 1 ? -f : f);
  }
  return sum / denom;
}

double fd_span(const Deriv& d, VecRef x, VecRef y, double h) {
  // Worst case: every application hits the same axis.
  double scale = 1.0;
  for (int i : d.ix) scale = std::max(scale, std::max(1.0, std::abs(x[i])));
  for (int j : d.iy) scale = std::max(scale, std::max(1.0, std::abs(y[j])));
  return static_cast<double>(d.order()) * h * scale;
}

double fd_rounding_noise(int order, double h, double fscale) {
  // Rounding of the 2^m corner sum divided by (2h)^m, with a safety factor.
  const double denom = std::pow(2.0 * h, order);
  return 64.0 * kEps * std::max(fscale, 1.0) * std::pow(2.0, order) / denom;
}

namespace {
void check_stencil_room(const Cost& c, const Deriv& d, VecRef x, VecRef y, double h) {
  // Domain containment: per-axis total offset is (multiplicity * step)
  std::vector<double> off_x(static_cast<size_t>(c.dim_x()), 0.0);
  std::vector<double> off_y(static_cast<size_t>(c.dim_y()), 0.0);
  for (int i : d.ix) off_x[static_cast<size_t>(i)] += h * std::max(1.0, std::abs(x[i]));
  for (int j : d.iy) off_y[static_cast<size_t>(j)] += h * std::max(1.0, std::abs(y[j]));
  for (int i = 0; i < c.dim_x(); ++i) {
    const Axis& a = c.domain_x().axis(i);
    if (a.periodic || off_x[static_cast<size_t>(i)] == 0.0) continue;
    if (x[i] - off_x[static_cast<size_t>(i)] < a.lo || x[i] + off_x[static_cast<size_t>(i)] > a.hi)
      throw DomainError(c.name() + ": FD stencil leaves domain for " + d.to_string());
  }
  for (int j = 0; j < c.dim_y(); ++j) {
    const Axis& a = c.domain_y().axis(j);
    if (a.periodic || off_y[static_cast<size_t>(j)] == 0.0) continue;
    if (y[j] - off_y[static_cast<size_t>(j)] < a.lo || y[j] + off_y[static_cast<size_t>(j)] > a.hi)
      throw DomainError(c.name() + ": FD stencil leaves domain for " + d.to_string());
  }
  const double clearance = c.excluded_clearance(x, y);
  if (clearance <= fd_span(d, x, y, h))
    throw SingularStencil(c.name() + ": stencil too close to excluded set for " +
                          d.to_string());
}
}  // namespace

double fd_partial(const Cost& c, const Deriv& d, VecRef x, VecRef y, const FDScheme& scheme) {
  const double h0 = scheme.step(d.order());
  check_stencil_room(c, d, x, y, h0);
  const int levels = std::max(1, scheme.richardson_levels);
  std::vector<double> t(static_cast<size_t>(levels));
  for (int l = 0; l < levels; ++l)
    t[static_cast<size_t>(l)] = fd_stencil(c, d, x, y, h0 / std::pow(2.0, l));
  // Richardson table for an O(h^2) base scheme.
  for (int k = 1; k < levels; ++k) {
    const double w = std::pow(4.0, k);
    for (int l = levels - 1; l >= k; --l)
      t[static_cast<size_t>(l)] =
          (w * t[static_cast<size_t>(l)] - t[static_cast<size_t>(l - 1)]) / (w - 1.0);
  }
  return t[static_cast<size_t>(levels - 1)];
}

double fd_partial_unchecked(const Cost& c, const Deriv& d, VecRef x, VecRef y, double h) {
  return fd_stencil(c, d, x, y, h);
}

Mat fd_hessian(const std::function<double(VecRef)>& f, VecRef z, double h) {
  const int n = static_cast<int>(z.size());
  Mat H(n, n);
  Vec a(n), b(n), cvec(n), dvec(n);
  for (int i = 0; i < n; ++i) {
    const double hi = h * std::max(1.0, std::abs(z[i]));
    for (int j = i; j < n; ++j) {
      const double hj = h * std::max(1.0, std::abs(z[j]));
      if (i == j) {
        a = z; a[i] += hi;
        b = z; b[i] -= hi;
        H(i, i) = (f(a) - 2.0 * f(z) + f(b)) / (hi * hi);
      } else {
        a = z; a[i] += hi; a[j] += hj;
        b = z; b[i] += hi; b[j] -= hj;
        cvec = z; cvec[i] -= hi; cvec[j] += hj;
        dvec = z; dvec[i] -= hi; dvec[j] -= hj;
        H(i, j) = H(j, i) = (f(a) - f(b) - f(cvec) + f(dvec)) / (4.0 * hi * hj);
      }
    }
  }
  return H;
}

namespace {
std::vector<Deriv> sample_derivs(int order, int nx, int ny, std::mt19937_64& rng, int extra) {
  std::vector<Deriv> out;
  auto push_if_valid = [&](std::vector<int> ax, std::vector<int> ay) {
    for (int i : ax) if (i >= nx) return;
    for (int j : ay) if (j >= ny) return;
    out.emplace_back(std::move(ax), std::move(ay));
  };
  // Canonical picks: pure-x, pure-y, balanced mixed on axis 0.
  push_if_valid(std::vector<int>(static_cast<size_t>(order), 0), {});
  push_if_valid({}, std::vector<int>(static_cast<size_t>(order), 0));
  if (order >= 2)
    push_if_valid(std::vector<int>(static_cast<size_t>(order / 2), 0),
                  std::vector<int>(static_cast<size_t>(order - order / 2), 0));
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> dx(0, nx - 1);
  std::uniform_int_distribution<int> dy(0, ny - 1);
  for (int e = 0; e < extra; ++e) {
    std::vector<int> ax, ay;
    for (int k = 0; k < order; ++k) {
      if (coin(rng) == 0)
        ax.push_back(dx(rng));
      else
        ay.push_back(dy(rng));
    }
    out.emplace_back(std::move(ax), std::move(ay));
  }
  return out;
}
}  // namespace

FDValidationReport fd_validate(const Cost& c, const FDScheme& scheme, int sample_count,
                               std::uint64_t seed, double rel_tol, double abs_floor) {
  FDValidationReport report;
  report.samples_requested = sample_count;
  std::mt19937_64 rng(seed);
  const int levels = std::max(1, scheme.richardson_levels);
  for (int order = 1; order <= c.smoothness_order(); ++order) {
    FDOrderReport orep;
    orep.order = order;
    const double h = scheme.step(order);
    const double hmin = h / std::pow(2.0, levels - 1);
    for (int s = 0; s < sample_count; ++s) {
      // Margin keeps the whole stencil inside the box.
      const double margin = 1.05 * static_cast<double>(order) * h * 4.0;
      Vec x = c.domain_x().sample_interior(rng, margin);
      Vec y = c.domain_y().sample_interior(rng, margin);
      if (c.excluded_clearance(x, y) <= 4.5 * fd_span(Deriv{{0}, {}}, x, y, h) * order) {
        continue;  // resample budget: skip points without stencil clearance
      }
      auto reqs = sample_derivs(order, c.dim_x(), c.dim_y(), rng, 2);
      for (const auto& d : reqs) {
        auto an = c.partial(d.canonical(), x, y);
        if (!an) continue;
        double fd;
        try {
          fd = fd_partial(c, d, x, y, scheme);
        } catch (const DomainError&) {
          continue;
        }
        const double fscale =
            std::max({std::abs(c.value(x, y)), 1.0});
        const double noise = fd_rounding_noise(order, hmin, fscale);
        const double tol = std::max({rel_tol * std::abs(*an), abs_floor, noise});
        const double err = std::abs(fd - *an);
        orep.max_abs_err = std::max(orep.max_abs_err, err);
        orep.max_rel_err =
            std::max(orep.max_rel_err, err / std::max(std::abs(*an), abs_floor));
        orep.worst_tolerance = std::max(orep.worst_tolerance, tol);
        if (err > tol) orep.pass = false;
        ++orep.checked;
      }
      ++report.samples_used;
    }
    report.pass = report.pass && orep.pass;
    report.orders.push_back(orep);
  }
  return report;
}

}  // namespace otgeo
