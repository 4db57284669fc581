#ifndef MATGROUPOID_CONNECTION_HPP
#define MATGROUPOID_CONNECTION_HPP

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "matgroupoid/algebroid.hpp"
#include "matgroupoid/grid.hpp"
#include "matgroupoid/types.hpp"

namespace matgroupoid {

/// Rank-3 array indexed (k, i, j); used for Christoffel symbols and torsion.
using Tensor3 = Eigen::Matrix<double, 27, 1>;
/// Rank-4 array indexed (l, k, i, j); used for curvature.
using Tensor4 = Eigen::Matrix<double, 81, 1>;

constexpr int idx3(int k, int i, int j) { return 9 * k + 3 * i + j; }
constexpr int idx4(int l, int k, int i, int j) { return 27 * l + 9 * k + 3 * i + j; }

inline constexpr double kDefaultFlatTol = 1e-4;

/**
 * @brief Linear section of the anchor on a grid: v -> (v, A(v)).
 *
 * maps[p][j] is A(e_j) at grid point p, so Lambda^k_{i,j} = maps[p][j](k, i).
 * residuals[p] is the worst anchor mismatch |v(u_j) - e_j| of the lift.
 */
struct LinearSectionField {
  Grid grid;
  std::vector<std::array<Mat3, 3>> maps;
  std::vector<double> residuals;
};

/// Christoffel symbols with nabla_{d_j} d_i = Gamma^k_{ij} d_k, stored at idx3(k, i, j).
struct ConnectionField {
  Grid grid;
  std::vector<Tensor3> gamma;
};

struct CurvatureTorsionReport {
  Grid grid;
  std::vector<Tensor4> R;
  std::vector<Tensor3> T;
  /// Points where one-sided differences were used.
  std::vector<bool> boundary;
  double max_abs_R = 0.0;
  double max_abs_T = 0.0;
};

/// Per point and axis, the minimum-norm A with (e_j, A) in the fiber. Throws NotUniform.
LinearSectionField minimal_lift_section(const Grid& grid, std::span<const FiberBasis> fibers,
                                        double v_tol = kDefaultAnchorTol);

/// Gamma^k_{ij} = -Lambda^k_{i,j}.
ConnectionField christoffels(const LinearSectionField& section);

/**
 * R^l_{kij} = d_i G^l_{kj} - d_j G^l_{ki} + G^l_{mi} G^m_{kj} - G^l_{mj} G^m_{ki},
 * T^k_{ij} = G^k_{ij} - G^k_{ji}. Derivatives by second-order differences on the grid.
 */
CurvatureTorsionReport curvature_torsion(const ConnectionField& conn);

enum class HomogeneityVerdict { HomogeneousEvidence, Obstructed, Inconclusive };

std::string_view to_string(HomogeneityVerdict v);

struct HomogeneityResult {
  HomogeneityVerdict verdict = HomogeneityVerdict::Inconclusive;
  bool flat = false;
  bool trivial_isotropy = false;
  int max_isotropy_dim = 0;
  double max_abs_R = 0.0;
  double max_abs_T = 0.0;
};

/**
 * Flat and torsion-free section: evidence of local homogeneity. Otherwise
 * obstructed when every isotropy algebra is trivial (the material connection
 * is then unique), inconclusive when some is not. Throws NotUniform.
 */
HomogeneityResult homogeneity_verdict(std::span<const FiberBasis> fibers, const CurvatureTorsionReport& report,
                                      double flat_tol = kDefaultFlatTol, double v_tol = kDefaultAnchorTol);

/// Coordinates and parallel frame at every grid point.
struct HomogeneousChart {
  Grid grid;
  Point3 origin{Point3::Zero()};
  std::vector<Point3> coords;
  std::vector<Mat3> frames;
};

struct TransportResult {
  Mat3 frame{Mat3::Identity()};
  Point3 coords{Point3::Zero()};
};

/**
 * Parallel transport of the identity frame from x0 to x1 along axis-aligned
 * segments in the given axis order, integrating the coframe alongside.
 */
TransportResult transport_along_axes(const ConnectionField& conn, const Point3& x0, const Point3& x1,
                                     std::array<int, 3> order, double max_step = 1e-2);

/// Throws NotFlat unless curvature and torsion are within flat_tol.
HomogeneousChart build_homogeneous_chart(const ConnectionField& conn, const Point3& x0,
                                         double flat_tol = kDefaultFlatTol, double max_step = 1e-2);

/// Christoffel symbols of conn expressed in the chart coordinates, on the same grid.
ConnectionField chart_christoffels(const ConnectionField& conn, const HomogeneousChart& chart);

/// Largest |Gamma| over points off the grid boundary.
double max_abs_interior(const ConnectionField& conn);

}  // namespace matgroupoid

#endif
