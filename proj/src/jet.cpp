#include "matgroupoid/jet.hpp"

#include <Eigen/LU>
#include <cmath>
#include <sstream>

#include "matgroupoid/errors.hpp"

namespace matgroupoid {

namespace {

void require_match(const Point3& a, const Point3& b, double point_tol, const char* what) {
  if ((a - b).lpNorm<Eigen::Infinity>() > point_tol) {
    std::ostringstream os;
    os << what << ": (" << a.transpose() << ") vs (" << b.transpose() << ")";
    throw Error(ErrorKind::SourceTargetMismatch, os.str());
  }
}

}  // namespace

bool is_invertible(const Mat3& m, double det_tol) {
  return m.allFinite() && std::abs(m.determinant()) >= det_tol;
}

Jet1 compose(const Jet1& g, const Jet1& h, double point_tol) {
  require_match(h.target, g.source, point_tol, "compose: h.target != g.source");
  return Jet1{h.source, g.target, g.matrix * h.matrix};
}

Jet1 invert(const Jet1& g, double det_tol) {
  if (!is_invertible(g.matrix, det_tol)) {
    throw Error(ErrorKind::SingularMatrix, "invert: |det| below tolerance");
  }
  return Jet1{g.target, g.source, g.matrix.inverse()};
}

Jet1 identity(const Point3& x) { return Jet1{x, x, Mat3::Identity()}; }

Frame act_on_frame(const Jet1& g, const Frame& z, double point_tol) {
  require_match(z.base, g.source, point_tol, "act_on_frame: frame base != jet source");
  return Frame{g.target, g.matrix * z.matrix};
}

double jet_distance(const Jet1& a, const Jet1& b) {
  const double ds = (a.source - b.source).lpNorm<Eigen::Infinity>();
  const double dt = (a.target - b.target).lpNorm<Eigen::Infinity>();
  const double dm = (a.matrix - b.matrix).lpNorm<Eigen::Infinity>();
  return std::max({ds, dt, dm});
}

}  // namespace matgroupoid
