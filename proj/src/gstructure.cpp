#include "matgroupoid/gstructure.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <sstream>

#include "matgroupoid/errors.hpp"

namespace matgroupoid {

Parallelism::Parallelism(Fn frame_matrix, Box domain) : fn_(std::move(frame_matrix)), domain_(domain) {
  if (!fn_) throw Error(ErrorKind::InvalidArgument, "empty parallelism function");
}

Parallelism Parallelism::constant(const Mat3& m, Box domain) {
  return Parallelism([m](const Point3&) { return m; }, domain);
}

Frame Parallelism::operator()(const Point3& x) const {
  if (!x.allFinite() || !domain_.contains(x, 1e-12)) {
    std::ostringstream os;
    os << "parallelism evaluated outside its domain at (" << x.transpose() << ")";
    throw Error(ErrorKind::OutOfDomain, os.str());
  }
  Mat3 m = fn_(x);
  if (!is_invertible(m)) throw Error(ErrorKind::SingularMatrix, "parallelism frame not invertible");
  return Frame{x, m};
}

Parallelism Parallelism::right_multiplied(const Mat3& Z0) const {
  return Parallelism([fn = fn_, Z0](const Point3& x) { return Mat3(fn(x) * Z0); }, domain_);
}

Jet1 g_map(const Parallelism& P, const Point3& x, const Point3& y) {
  const Frame px = P(x);
  const Frame py = P(y);
  return Jet1{x, y, py.matrix * px.matrix.inverse()};
}

GroupoidSection g_map_section(const Parallelism& P) {
  return [P](const Point3& x, const Point3& y) { return g_map(P, x, y); };
}

double morphism_defect(const GroupoidSection& S, std::span<const Point3> points) {
  double worst = 0.0;
  for (const auto& x : points)
    for (const auto& y : points)
      for (const auto& z : points) {
        const Jet1 sxy = S(x, y);
        const Jet1 syz = S(y, z);
        const Jet1 sxz = S(x, z);
        if (jet_distance(sxy, Jet1{x, y, sxy.matrix}) > kPointTol || jet_distance(syz, Jet1{y, z, syz.matrix}) > kPointTol) {
          throw Error(ErrorKind::SourceTargetMismatch, "groupoid section returned a jet with wrong endpoints");
        }
        worst = std::max(worst, jet_distance(compose(syz, sxy), sxz));
      }
  return worst;
}

Parallelism invert_g_map(const GroupoidSection& S, const Point3& z, const Frame& Z, Box domain,
                         std::span<const Point3> check_points, double tol) {
  if ((Z.base - z).lpNorm<Eigen::Infinity>() > kPointTol) {
    throw Error(ErrorKind::SourceTargetMismatch, "reference frame is not based at z");
  }
  std::vector<Point3> pts(check_points.begin(), check_points.end());
  pts.push_back(z);
  const double defect = morphism_defect(S, pts);
  if (defect > tol) {
    std::ostringstream os;
    os << "sampled morphism-law defect " << defect << " exceeds " << tol;
    throw Error(ErrorKind::NotMorphism, os.str());
  }
  return Parallelism([S, z, Zm = Z.matrix](const Point3& x) { return Mat3(S(z, x).matrix * Zm); }, domain);
}

std::vector<Mat3> isotropy_group_sample(const Body& body, const Point3& z0, const Frame& Z0,
                                        std::span<const Mat3> candidates, const SampleSet& samples, double tol) {
  if ((Z0.base - z0).lpNorm<Eigen::Infinity>() > kPointTol) {
    throw Error(ErrorKind::SourceTargetMismatch, "reference frame is not based at z0");
  }
  if (!body.domain().contains(z0)) throw Error(ErrorKind::OutOfDomain, "z0 outside body");
  const Mat3 Zinv = Z0.matrix.inverse();
  std::vector<Mat3> out;
  for (const Mat3& P : candidates)
    if (is_material_symmetry(body, z0, P, samples, tol)) out.push_back(Zinv * P * Z0.matrix);
  return out;
}

IntegrabilityResult is_integrable_parallelism(const Parallelism& P, const Grid& grid, double tol) {
  for (int a = 0; a < 3; ++a)
    if (grid.shape()[a] < 3) throw Error(ErrorKind::GridTooSmall, "bracket test needs at least 3 points per axis");
  std::vector<Mat3> E(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) E[p] = P(grid.point(p)).matrix;
  const std::span<const Mat3> Es(E);

  IntegrabilityResult res;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (grid.on_boundary(p)) continue;
    // dE[m](:, i) = d E_i / dx^m
    std::array<Mat3, 3> dE;
    for (int m = 0; m < 3; ++m) dE[static_cast<std::size_t>(m)] = grid.derivative(Es, p, m);
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        Vec3 br = Vec3::Zero();
        for (int m = 0; m < 3; ++m)
          br += E[p](m, i) * dE[static_cast<std::size_t>(m)].col(j) - E[p](m, j) * dE[static_cast<std::size_t>(m)].col(i);
        res.max_bracket_defect = std::max(res.max_bracket_defect, br.lpNorm<Eigen::Infinity>());
      }
  }
  res.integrable = res.max_bracket_defect <= tol;
  return res;
}

}  // namespace matgroupoid
