#ifndef MATGROUPOID_JET_HPP
#define MATGROUPOID_JET_HPP

#include "matgroupoid/types.hpp"

namespace matgroupoid {

/**
 * @brief A 1-jet of a local diffeomorphism, in chart coordinates.
 *
 * Maps the tangent space at `source` to the tangent space at `target`
 * through `matrix` (the Jacobian block). Composition follows the chain
 * rule, so these form the 1-jets groupoid of the chart domain.
 */
struct Jet1 {
  Point3 source{Point3::Zero()};
  Point3 target{Point3::Zero()};
  Mat3 matrix{Mat3::Identity()};
};

/// Linear frame at `base`, i.e. the 1-jet at the origin of a chart onto `base`.
struct Frame {
  Point3 base{Point3::Zero()};
  Mat3 matrix{Mat3::Identity()};
};

bool is_invertible(const Mat3& m, double det_tol = kDetTol);

/// g . h: first h, then g. Requires h.target == g.source.
Jet1 compose(const Jet1& g, const Jet1& h, double point_tol = kPointTol);

Jet1 invert(const Jet1& g, double det_tol = kDetTol);

Jet1 identity(const Point3& x);

Frame act_on_frame(const Jet1& g, const Frame& z, double point_tol = kPointTol);

/// Max-abs discrepancy over source, target and matrix entries.
double jet_distance(const Jet1& a, const Jet1& b);

}  // namespace matgroupoid

#endif
