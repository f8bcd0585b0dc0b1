#include "otgeo/cost.hpp"

#include <algorithm>
#include <sstream>

#include "otgeo/fd.hpp"

namespace otgeo {

Deriv Deriv::canonical() const {
  Deriv d = *this;
  std::sort(d.ix.begin(), d.ix.end());
  std::sort(d.iy.begin(), d.iy.end());
  return d;
}

std::string Deriv::to_string() const {
  std::ostringstream os;
  os << "c_{";
  for (int i : ix) os << (i + 1);
  os << ",";
  for (int j : iy) os << (j + 1);
  os << "}";
  return os.str();
}

void Cost::check_point(VecRef x, VecRef y, bool check_excluded) const {
  if (x.size() != dim_x() || y.size() != dim_y())
    throw DimensionMismatch(name_ + ": point dimension mismatch");
  if (!domain_x_.contains(x) || !domain_y_.contains(y))
    throw DomainError(name_ + ": point outside domain");
  if (check_excluded && excluded(x, y))
    throw DomainError(name_ + ": point in excluded set");
}

double Cost::evaluate(VecRef x, VecRef y) const {
  check_point(x, y);
  return value(domain_x_.wrap(x), domain_y_.wrap(y));
}

double Cost::derivative(const Deriv& d, VecRef x, VecRef y) const {
  return derivative(d, x, y, FDScheme{});
}

double Cost::derivative(const Deriv& d, VecRef x, VecRef y, const FDScheme& scheme) const {
  if (d.order() > 4) throw OrderError(name_ + ": derivative order above 4");
  if (d.order() == 0) return evaluate(x, y);
  for (int i : d.ix)
    if (i < 0 || i >= dim_x()) throw DimensionMismatch(name_ + ": x index out of range");
  for (int j : d.iy)
    if (j < 0 || j >= dim_y()) throw DimensionMismatch(name_ + ": y index out of range");
  check_point(x, y);
  const Deriv cd = d.canonical();
  if (cd.order() <= smoothness_order_) {
    if (auto v = partial(cd, x, y)) return *v;
  }
  return fd_partial(*this, cd, x, y, scheme);
}

Vec Cost::grad_x(VecRef x, VecRef y) const {
  Vec g(dim_x());
  for (int i = 0; i < dim_x(); ++i) g[i] = derivative(Deriv{{i}, {}}, x, y);
  return g;
}

Mat Cost::cross_hessian(VecRef x, VecRef y) const {
  Mat C(dim_x(), dim_y());
  for (int i = 0; i < dim_x(); ++i)
    for (int j = 0; j < dim_y(); ++j) C(i, j) = derivative(Deriv{{i}, {j}}, x, y);
  return C;
}

}  // namespace otgeo
