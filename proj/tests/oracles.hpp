// Test-only reference computations, independent of the library's numerical paths.
#ifndef MATGROUPOID_TESTS_ORACLES_HPP
#define MATGROUPOID_TESTS_ORACLES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>

#include "matgroupoid/body.hpp"
#include "matgroupoid/jet.hpp"

namespace oracles {

using matgroupoid::Jet1;
using matgroupoid::Mat3;
using matgroupoid::Point3;
using matgroupoid::Vec3;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  Vec3 vec(double lo, double hi) { return Vec3(uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)); }
  Mat3 mat(double lo, double hi) {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }
  /// Entries in [-2, 2] conditioned on |det| >= 0.1.
  Mat3 invertible() {
    for (;;) {
      Mat3 m = mat(-2.0, 2.0);
      if (std::abs(m.determinant()) >= 0.1) return m;
    }
  }
  Jet1 jet(const Point3& source, const Point3& target) { return Jet1{source, target, invertible()}; }
  Jet1 jet() { return jet(vec(-1, 1), vec(-1, 1)); }
  Mat3 rotation() {
    Vec3 axis = vec(-1, 1);
    while (axis.norm() < 1e-3) axis = vec(-1, 1);
    return Eigen::AngleAxisd(uniform(-M_PI, M_PI), axis.normalized()).toRotationMatrix();
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

inline Mat3 rotation_e3(double angle) { return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix(); }

/// d/dF |F^T F - I|^2 = 4 F (F^T F - I).
inline Mat3 isotropic_gradient(const Mat3& F) { return 4.0 * F * (F.transpose() * F - Mat3::Identity()); }

/// d/dG of sum c_ij (G^T G - I)_ij^2 = 2 G (M + M^T), M = c o (G^T G - I).
inline Mat3 anisotropic_gradient(const Mat3& G) {
  const Mat3 E = G.transpose() * G - Mat3::Identity();
  Mat3 M;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) M(i, j) = matgroupoid::models::anisotropic_weight(i, j) * E(i, j);
  return 2.0 * G * (M + M.transpose());
}

/// Analytic constraint row for bodies W(F, x) = w0(F K(x)) with dK/dx^m given.
inline Eigen::Matrix<double, 1, 12> prestrain_row(const Mat3& F, const Mat3& K, const std::array<Mat3, 3>& dK,
                                                  const std::function<Mat3(const Mat3&)>& grad_w0) {
  const Mat3 G = grad_w0(F * K);
  Eigen::Matrix<double, 1, 12> row;
  for (int m = 0; m < 3; ++m) row(m) = -(G.cwiseProduct(F * dK[static_cast<std::size_t>(m)])).sum();
  // <G K^T, F A> = <F^T G K^T, A>
  const Mat3 FtGKt = F.transpose() * G * K.transpose();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) row(3 + 3 * a + b) = FtGKt(a, b);
  return row;
}

inline Eigen::Matrix<double, 1, 12> isotropic_row(const Mat3& F) {
  return prestrain_row(F, Mat3::Identity(), {Mat3::Zero(), Mat3::Zero(), Mat3::Zero()}, isotropic_gradient);
}

inline Eigen::Matrix<double, 1, 12> fgm_row(const Mat3& F, const Point3& x) {
  Mat3 dK1 = Mat3::Zero();
  dK1(0, 1) = 1.0;
  return prestrain_row(F, matgroupoid::models::fgm_K(x), {dK1, Mat3::Zero(), Mat3::Zero()}, anisotropic_gradient);
}

/// Rank of a stacked analytic constraint matrix, relative cut.
inline int numerical_rank(const Eigen::MatrixXd& L, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(L);
  const auto& s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

/// exp(A) by scaling and squaring with a degree-18 Taylor polynomial.
inline Mat3 expm(const Mat3& A) {
  const double norm = A.lpNorm<1>();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Mat3 B = A / std::ldexp(1.0, squarings);
  Mat3 term = Mat3::Identity();
  Mat3 sum = Mat3::Identity();
  for (int k = 1; k <= 18; ++k) {
    term = term * B / k;
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

}  // namespace oracles

#endif
