#ifndef MATGROUPOID_GSTRUCTURE_HPP
#define MATGROUPOID_GSTRUCTURE_HPP

#include <functional>
#include <span>
#include <vector>

#include "matgroupoid/body.hpp"
#include "matgroupoid/grid.hpp"
#include "matgroupoid/jet.hpp"

namespace matgroupoid {

/// A global frame field x -> P(x) with P(x).base == x.
class Parallelism {
 public:
  using Fn = std::function<Mat3(const Point3&)>;

  Parallelism(Fn frame_matrix, Box domain);

  static Parallelism constant(const Mat3& m, Box domain);

  /// Throws OutOfDomain / SingularMatrix.
  Frame operator()(const Point3& x) const;
  const Box& domain() const { return domain_; }

  /// Right translation by a fixed matrix: x -> P(x) Z0.
  Parallelism right_multiplied(const Mat3& Z0) const;

 private:
  Fn fn_;
  Box domain_;
};

/// Assignment (x, y) -> jet from x to y.
using GroupoidSection = std::function<Jet1(const Point3&, const Point3&)>;

/// (x -> y, P(y) P(x)^{-1}).
Jet1 g_map(const Parallelism& P, const Point3& x, const Point3& y);

GroupoidSection g_map_section(const Parallelism& P);

/// Worst defect of S(y, z) . S(x, y) = S(x, z) over all triples of the given points.
double morphism_defect(const GroupoidSection& S, std::span<const Point3> points);

/**
 * Recovers x -> S(z, x) Z from a section satisfying the morphism law.
 * The law is checked on all triples of `check_points` (plus z); throws
 * NotMorphism if the worst defect exceeds tol.
 */
Parallelism invert_g_map(const GroupoidSection& S, const Point3& z, const Frame& Z, Box domain,
                         std::span<const Point3> check_points, double tol = 1e-9);

/// {Z0^{-1} P Z0 : P a candidate material symmetry at z0}.
std::vector<Mat3> isotropy_group_sample(const Body& body, const Point3& z0, const Frame& Z0,
                                        std::span<const Mat3> candidates, const SampleSet& samples, double tol);

struct IntegrabilityResult {
  bool integrable = false;
  double max_bracket_defect = 0.0;
};

/**
 * The frame fields E_i (columns of P) commute pairwise iff the parallelism
 * comes from a chart. Brackets by central differences with the grid spacing,
 * over interior grid points.
 */
IntegrabilityResult is_integrable_parallelism(const Parallelism& P, const Grid& grid, double tol);

}  // namespace matgroupoid

#endif
