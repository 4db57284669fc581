#ifndef MATGROUPOID_ALGEBROID_HPP
#define MATGROUPOID_ALGEBROID_HPP

#include <span>
#include <vector>

#include "matgroupoid/body.hpp"
#include "matgroupoid/grid.hpp"
#include "matgroupoid/types.hpp"

namespace matgroupoid {

using Vec12 = Eigen::Matrix<double, 12, 1>;

/// Fiber coordinates (v^i, v^i_j) of the 1-jets algebroid at a point.
struct AlgebroidElement {
  Vec3 v{Vec3::Zero()};
  Mat3 A{Mat3::Zero()};

  /// v followed by A in row-major order.
  Vec12 to_vector() const;
  static AlgebroidElement from_vector(const Vec12& u);
};

inline constexpr double kDefaultFdStep = 1e-5;
inline constexpr double kDefaultRankTol = 1e-6;
inline constexpr double kDefaultAnchorTol = 1e-6;
inline constexpr std::size_t kDefaultSampleCount = 24;

/**
 * @brief Numerical fiber of the material algebroid at one point.
 *
 * `basis` is orthonormal as 12-vectors. `singular_values` holds all 12
 * singular values of the stacked constraint matrix (missing rows count as
 * zeros), descending. `gap_ratio` is the ratio between the last retained
 * and the first discarded singular value.
 */
struct FiberBasis {
  Point3 point{Point3::Zero()};
  std::vector<AlgebroidElement> basis;
  int dim = 0;
  std::vector<double> singular_values;
  double gap_ratio = 0.0;

  /// 12 x dim matrix whose columns are the basis vectors.
  Eigen::Matrix<double, 12, Eigen::Dynamic> matrix() const;
};

/**
 * Linearized membership constraint at (F, x): the d x 12 matrix L with
 * L (v || A) = <dW/dF(F, x), F A> - <dW/dx(F, x), v>, by central differences.
 */
MatX constraint_rows(const Body& body, const Point3& x, const Mat3& F, double fd_step = kDefaultFdStep);

/// All constraint rows over the sample set, stacked.
MatX stacked_constraints(const Body& body, const Point3& x, const SampleSet& samples,
                         double fd_step = kDefaultFdStep);

FiberBasis fiber(const Body& body, const Point3& x, const SampleSet& samples, double rank_tol = kDefaultRankTol,
                 double fd_step = kDefaultFdStep);

std::vector<FiberBasis> fibers_on_grid(const Body& body, const Grid& grid, const SampleSet& samples,
                                       double rank_tol = kDefaultRankTol, double fd_step = kDefaultFdStep);

/// Rank of the v-projection of the fiber (anchor image dimension).
int anchor_rank(const FiberBasis& f, double v_tol = kDefaultAnchorTol);

/// Elements of the fiber with vanishing anchor.
FiberBasis isotropy_algebra(const FiberBasis& f, double v_tol = kDefaultAnchorTol);

/// Orthogonal projection of u onto span(f).
Vec12 project_onto_fiber(const FiberBasis& f, const Vec12& u);

struct UniformityVerdict {
  bool uniform = false;
  std::vector<int> anchor_ranks;
  /// Points with anchor rank < 3, in lexicographic order.
  std::vector<Point3> offending;
};

UniformityVerdict uniformity_verdict(std::span<const FiberBasis> fibers, double v_tol = kDefaultAnchorTol);

}  // namespace matgroupoid

#endif
