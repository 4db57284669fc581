#ifndef MATGROUPOID_TYPES_HPP
#define MATGROUPOID_TYPES_HPP

#include <Eigen/Core>

namespace matgroupoid {

/// Chart coordinates of a body point.
using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Source/target matching tolerance for jets and frames.
inline constexpr double kPointTol = 1e-9;
/// Smallest |det| accepted as invertible.
inline constexpr double kDetTol = 1e-12;

/// Axis-aligned box; the single chart domain of a body.
struct Box {
  Point3 lo{Point3::Constant(-1.0)};
  Point3 hi{Point3::Constant(1.0)};

  bool contains(const Point3& x, double slack = 0.0) const {
    return ((x - lo).array() >= -slack).all() && ((hi - x).array() >= -slack).all();
  }
  Point3 center() const { return 0.5 * (lo + hi); }
};

inline bool all_finite(const Eigen::Ref<const MatX>& m) { return m.allFinite(); }

}  // namespace matgroupoid

#endif
