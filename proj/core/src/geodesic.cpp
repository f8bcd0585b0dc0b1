#include <Eigen/Dense>
#include <cmath>

#include "otgeo/mtw.hpp"

namespace otgeo {

namespace {

BasePoint split(const Cost& c, VecRef z) {
  BasePoint b;
  b.x0 = z.head(c.dim_x());
  b.y0 = z.tail(c.dim_y());
  return b;
}

Mat metric_at(const Cost& c, VecRef z, const FDScheme& scheme) {
  return hessian_h(c, split(c, z), scheme).matrix;
}

}  // namespace

ChristoffelTensor christoffel(const Cost& c, const BasePoint& base, double fd_step,
                              const FDScheme& scheme) {
  const int dim = base.dim();
  const Vec z = base.joint();
  const double h0 = fd_step > 0.0 ? fd_step : scheme.step(1);

  const PseudoMetric metric = hessian_h(c, split(c, z), scheme);
  if (signature(metric).rank < dim)
    throw DegenerateMetric("christoffel: pseudo-metric singular at base");
  const Mat H = metric.matrix;
  const Mat Hinv = Eigen::FullPivLU<Mat>(H).inverse();

  std::vector<Mat> dH(static_cast<size_t>(dim));
  Vec zp = z, zm = z;
  for (int e = 0; e < dim; ++e) {
    const double he = h0 * std::max(1.0, std::abs(z[e]));
    zp = z;
    zm = z;
    zp[e] += he;
    zm[e] -= he;
    dH[static_cast<size_t>(e)] = (metric_at(c, zp, scheme) - metric_at(c, zm, scheme)) / (2.0 * he);
  }

  ChristoffelTensor out;
  out.gamma.assign(static_cast<size_t>(dim), Mat::Zero(dim, dim));
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b)
      for (int cc = b; cc < dim; ++cc) {
        double sum = 0.0;
        for (int d = 0; d < dim; ++d)
          sum += Hinv(a, d) * (dH[static_cast<size_t>(b)](d, cc) +
                               dH[static_cast<size_t>(cc)](b, d) -
                               dH[static_cast<size_t>(d)](b, cc));
        out.gamma[static_cast<size_t>(a)](b, cc) = 0.5 * sum;
        out.gamma[static_cast<size_t>(a)](cc, b) = 0.5 * sum;
      }
  return out;
}

Trajectory geodesic_integrate(const Cost& c, const GeodesicState& start, double duration,
                              int step_count, double fd_step, const FDScheme& scheme) {
  if (step_count < 1) throw Error("geodesic_integrate: step_count must be >= 1");
  if (start.position.size() != c.dim_x() + c.dim_y())
    throw DimensionMismatch("geodesic_integrate: state dimension mismatch");
  Trajectory traj;
  traj.states.reserve(static_cast<size_t>(step_count) + 1);
  traj.states.push_back(start);

  const double dt = duration / step_count;
  Vec z = start.position;
  Vec v = start.velocity;
  double t = start.time;

  auto accel = [&](VecRef zz, VecRef vv) -> Vec {
    const BasePoint b = split(c, zz);
    if (!c.domain_x().contains(b.x0) || !c.domain_y().contains(b.y0))
      throw DomainError("geodesic: left domain");
    const ChristoffelTensor g = christoffel(c, b, fd_step, scheme);
    Vec a(zz.size());
    for (int i = 0; i < zz.size(); ++i)
      a[i] = -vv.dot(g.gamma[static_cast<size_t>(i)] * vv);
    return a;
  };

  for (int s = 0; s < step_count; ++s) {
    try {
      const Vec k1z = v;
      const Vec k1v = accel(z, v);
      const Vec k2z = v + 0.5 * dt * k1v;
      const Vec k2v = accel(z + 0.5 * dt * k1z, v + 0.5 * dt * k1v);
      const Vec k3z = v + 0.5 * dt * k2v;
      const Vec k3v = accel(z + 0.5 * dt * k2z, v + 0.5 * dt * k2v);
      const Vec k4z = v + dt * k3v;
      const Vec k4v = accel(z + dt * k3z, v + dt * k3v);
      z += dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
      v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
      t += dt;
    } catch (const DegenerateMetric&) {
      traj.status = GeodesicStatus::degenerate_metric;
      traj.exit_time = t;
      return traj;
    } catch (const DomainError&) {
      traj.status = GeodesicStatus::domain_exit;
      traj.exit_time = t;
      return traj;
    }
    traj.states.push_back(GeodesicState{z, v, t});
  }
  traj.status = GeodesicStatus::completed;
  traj.exit_time = t;
  return traj;
}

double geodesic_energy(const Cost& c, const GeodesicState& s, const FDScheme& scheme) {
  const Mat H = metric_at(c, s.position, scheme);
  return s.velocity.dot(H * s.velocity);
}

}  // namespace otgeo
