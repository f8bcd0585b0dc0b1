#include "otgeo/crossdiff.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace otgeo {

std::string to_string(ConeClass c) {
  switch (c) {
    case ConeClass::spacelike_strict: return "spacelike_strict";
    case ConeClass::spacelike_boundary: return "spacelike_boundary";
    case ConeClass::lightlike: return "lightlike";
    case ConeClass::timelike_boundary: return "timelike_boundary";
    case ConeClass::timelike_strict: return "timelike_strict";
  }
  return "?";
}

double cross_difference(const Cost& c, VecRef x, VecRef y, const BasePoint& base) {
  return c.evaluate(x, base.y0) + c.evaluate(base.x0, y) - c.evaluate(x, y) -
         c.evaluate(base.x0, base.y0);
}

PseudoMetric hessian_h(const Cost& c, const BasePoint& base, const FDScheme& scheme) {
  const int nx = c.dim_x();
  const int ny = c.dim_y();
  if (base.x0.size() != nx || base.y0.size() != ny)
    throw DimensionMismatch("hessian_h: base dimension mismatch");
  Mat C(nx, ny);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      C(i, j) = c.derivative(Deriv{{i}, {j}}, base.x0, base.y0, scheme);
  PseudoMetric m;
  m.base = base;
  m.cross_block = C;
  m.matrix = Mat::Zero(nx + ny, nx + ny);
  m.matrix.block(0, nx, nx, ny) = -0.5 * C;
  m.matrix.block(nx, 0, ny, nx) = -0.5 * C.transpose();
  return m;
}

std::vector<double> taylor_residual(const Cost& c, const BasePoint& base, VecRef direction,
                                    const std::vector<double>& steps) {
  if (direction.size() != base.dim())
    throw DimensionMismatch("taylor_residual: direction dimension mismatch");
  const PseudoMetric h = hessian_h(c, base);
  const int nx = c.dim_x();
  std::vector<double> out;
  out.reserve(steps.size());
  for (double t : steps) {
    const Vec dx = t * direction.head(nx);
    const Vec dy = t * direction.tail(direction.size() - nx);
    const double delta0 = cross_difference(c, base.x0 + dx, base.y0 + dy, base);
    Vec v(direction.size());
    v << dx, dy;
    out.push_back(std::abs(delta0 - h.form(v)));
  }
  return out;
}

double fitted_loglog_slope(const std::vector<double>& steps,
                           const std::vector<double>& residuals, double floor) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < steps.size() && i < residuals.size(); ++i) {
    if (!(residuals[i] > floor)) continue;
    const double lx = std::log(steps[i]);
    const double ly = std::log(residuals[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return kInf;
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return kInf;
  return (n * sxy - sx * sy) / denom;
}

Signature signature(const PseudoMetric& m, const SignatureOptions& opts) {
  Mat sym = 0.5 * (m.matrix + m.matrix.transpose());
  const double asym = (m.matrix - m.matrix.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(m.matrix.cwiseAbs().maxCoeff(), 1.0);
  if (asym > 1e-10 * scale)
    throw Error("signature: matrix asymmetry above internal bound");
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  const Vec ev = es.eigenvalues();
  const double lmax = ev.cwiseAbs().maxCoeff();
  const double cut = std::max(opts.rel_tol * lmax, opts.abs_floor);
  Signature sig;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] > cut)
      ++sig.k_plus;
    else if (ev[i] < -cut)
      ++sig.k_minus;
    else
      ++sig.k_zero;
  }
  // Eigenvalues of [[0, B], [B^T, 0]] pair off as +/- singular values of
  // B, so rank comes from the cross block under the same truncation.
  Eigen::JacobiSVD<Mat> svd(m.cross_block);
  const Vec sv = svd.singularValues();
  const double smax = sv.size() ? sv.maxCoeff() : 0.0;
  const double scut = std::max(opts.rel_tol * smax, opts.abs_floor);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > scut) ++r;
  sig.rank = 2 * r;
  if (sig.k_plus != sig.k_minus) {
    // Pairing is exact in theory; a tolerance tie can split the counts.
    sig.k_plus = sig.k_minus = r;
    sig.k_zero = m.dim() - 2 * r;
  }
  return sig;
}

ConeClass cone_classify(const PseudoMetric& m, VecRef v, double tol) {
  const double n2 = v.squaredNorm();
  if (n2 == 0.0) throw ZeroVector("cone_classify: zero vector");
  const double scale = std::max(m.matrix.cwiseAbs().maxCoeff(), 1e-30);
  const double q = m.form(v) / (n2 * scale);
  const double light = 1e-14;
  if (std::abs(q) <= light) return ConeClass::lightlike;
  if (q > tol) return ConeClass::spacelike_strict;
  if (q > 0) return ConeClass::spacelike_boundary;
  if (q < -tol) return ConeClass::timelike_strict;
  return ConeClass::timelike_boundary;
}

double omega(const PseudoMetric& m, VecRef p, VecRef q) {
  if (p.size() != m.dim() || q.size() != m.dim())
    throw DimensionMismatch("omega: vector dimension mismatch");
  Vec uq = q;
  uq.tail(m.dim_y()) *= -1.0;
  return m.form(p, uq);
}

double lagrangian_defect(const Cost& c, const std::vector<MapSample>& samples,
                         const FDScheme& scheme) {
  double worst = 0.0;
  for (const auto& s : samples) {
    if (s.jacobian.rows() != c.dim_y() || s.jacobian.cols() != c.dim_x())
      throw DimensionMismatch("lagrangian_defect: Jacobian shape mismatch");
    const PseudoMetric h = hessian_h(c, BasePoint{s.x, s.gx}, scheme);
    const int nx = c.dim_x();
    std::vector<Vec> tangent;
    tangent.reserve(static_cast<size_t>(nx));
    for (int e = 0; e < nx; ++e) {
      Vec v = Vec::Zero(h.dim());
      v[e] = 1.0;
      v.tail(c.dim_y()) = s.jacobian.col(e);
      tangent.push_back(std::move(v));
    }
    for (int a = 0; a < nx; ++a)
      for (int b = a + 1; b < nx; ++b)
        worst = std::max(worst, std::abs(omega(h, tangent[static_cast<size_t>(a)],
                                               tangent[static_cast<size_t>(b)])));
  }
  return worst;
}

PseudoMetric conformal_scale(const PseudoMetric& m, double f_plus, double f_minus,
                             const SignatureOptions& opts) {
  if (m.dim_x() != m.dim_y())
    throw DimensionMismatch("conformal_scale: requires n+ == n-");
  if (!(f_plus > 0.0) || !(f_minus > 0.0))
    throw Error("conformal_scale: densities must be positive");
  const Signature sig = signature(m, opts);
  if (sig.rank < m.dim())
    throw DegenerateMetric("conformal_scale: cross block is singular");
  const double det = m.cross_block.determinant();
  const double n = static_cast<double>(m.dim_x());
  const double factor = std::pow(f_plus * f_minus / std::abs(det), 1.0 / n);
  PseudoMetric out = m;
  out.matrix *= factor;
  out.cross_block *= factor;
  return out;
}

}  // namespace otgeo
