#ifndef MATGROUPOID_FLOW_HPP
#define MATGROUPOID_FLOW_HPP

#include <functional>
#include <span>
#include <vector>

#include "matgroupoid/algebroid.hpp"
#include "matgroupoid/connection.hpp"
#include "matgroupoid/grid.hpp"
#include "matgroupoid/jet.hpp"

namespace matgroupoid {

inline constexpr double kDefaultOdeStep = 1e-3;
inline constexpr double kMaxOdeStep = 1e-2;
inline constexpr double kDefaultDerivationStep = 1e-5;
inline constexpr double kMaxDerivationStep = 1e-4;

/// A section x -> (v(x), A(x)) of the 1-jets algebroid over a box.
class SectionField {
 public:
  using Fn = std::function<AlgebroidElement(const Point3&)>;

  SectionField(Fn fn, Box domain);

  static SectionField constant(const AlgebroidElement& e, Box domain);
  /// Trilinear interpolation of grid values; defined on the grid hull only.
  static SectionField from_grid(const Grid& grid, std::span<const AlgebroidElement> values);

  /// Throws LeftDomain outside the domain.
  AlgebroidElement operator()(const Point3& x) const;
  const Box& domain() const { return domain_; }

 private:
  Fn fn_;
  Box domain_;
};

/// x -> (w, sum_j w_j A(e_j)(x)) for a linear section on a grid.
SectionField section_from_lift(const LinearSectionField& lift, const Vec3& w);

/// x -> orthogonal projection of the constant element u onto the fiber at x.
SectionField section_from_projection(const Grid& grid, std::span<const FiberBasis> fibers, const Vec12& u);

/**
 * Exp_t of the section at x: integrates y' = v(y), F' = A(y) F from
 * (x, I) with classical RK4, using ceil(|t| / step) equal substeps.
 * Returns the jet x -> y(t) with matrix F(t).
 */
Jet1 exp_section(const SectionField& s, double t, const Point3& x, double step = kDefaultOdeStep);

struct TrajectoryRecord {
  double t = 0.0;
  Point3 y{Point3::Zero()};
  Mat3 F{Mat3::Identity()};
};

/// Same integration as exp_section, one record per substep (including t = 0).
std::vector<TrajectoryRecord> exp_trajectory(const SectionField& s, double t, const Point3& x,
                                             double step = kDefaultOdeStep);

/// |Exp_{t+u}(x) - Exp_t(psi_u(x)) . Exp_u(x)|, max-abs over target and matrix.
double one_parameter_check(const SectionField& s, double t, double u, const Point3& x,
                           double step = kDefaultOdeStep);

/// |Exp_{-t}(psi_t(x)) . Exp_t(x) - identity(x)|.
double inverse_law_defect(const SectionField& s, double t, const Point3& x, double step = kDefaultOdeStep);

struct Derivation {
  /// Action on the coordinate frame: column i holds D(d/dx^i).
  Mat3 matrix{Mat3::Zero()};
  /// Base vector field at x.
  Vec3 base{Vec3::Zero()};
};

/// D = -d/dt|0 of the pullback by Exp_t, by central differences in t.
Derivation derivation_matrix(const SectionField& s, const Point3& x, double h = kDefaultDerivationStep,
                             double step = kDefaultOdeStep);

}  // namespace matgroupoid

#endif
