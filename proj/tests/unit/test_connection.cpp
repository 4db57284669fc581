#include <gtest/gtest.h>

#include "matgroupoid/algebroid.hpp"
#include "matgroupoid/connection.hpp"
#include "matgroupoid/errors.hpp"
#include "matgroupoid/flow.hpp"
#include "oracles.hpp"

using namespace matgroupoid;

namespace {

struct Pipeline {
  Body body;
  Grid grid;
  std::vector<FiberBasis> fibers;
};

Pipeline run(BuiltinKind k, int n = 5) {
  Body b = builtin_body(k);
  Grid g = Grid::interior(b.domain(), {n, n, n}, 0.1);
  auto f = fibers_on_grid(b, g, make_sample_set(24, 1234));
  return Pipeline{std::move(b), g, std::move(f)};
}

ConnectionField field_from(const Grid& g, const std::function<double(int, int, int, const Point3&)>& gamma) {
  ConnectionField c;
  c.grid = g;
  c.gamma.resize(g.size());
  for (std::size_t p = 0; p < g.size(); ++p)
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) c.gamma[p](idx3(k, i, j)) = gamma(k, i, j, g.point(p));
  return c;
}

// Quadratic-in-x Christoffel field with exact derivatives; R by direct summation.
struct QuadraticGamma {
  double a[3][3][3], b[3][3][3][3], c[3][3][3][3];

  explicit QuadraticGamma(oracles::Rng& rng) {
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          a[k][i][j] = rng.uniform(-1, 1);
          for (int m = 0; m < 3; ++m) {
            b[k][i][j][m] = rng.uniform(-1, 1);
            c[k][i][j][m] = rng.uniform(-0.5, 0.5);
          }
        }
  }
  double value(int k, int i, int j, const Point3& x) const {
    double v = a[k][i][j];
    for (int m = 0; m < 3; ++m) v += b[k][i][j][m] * x(m) + c[k][i][j][m] * x(m) * x(m);
    return v;
  }
  double deriv(int k, int i, int j, int m, const Point3& x) const { return b[k][i][j][m] + 2 * c[k][i][j][m] * x(m); }
  double R(int l, int k, int i, int j, const Point3& x) const {
    double r = deriv(l, k, j, i, x) - deriv(l, k, i, j, x);
    for (int m = 0; m < 3; ++m) r += value(l, m, i, x) * value(m, k, j, x) - value(l, m, j, x) * value(m, k, i, x);
    return r;
  }
};

}  // namespace

TEST(Connection, IsotropicLiftIsPureTranslation) {
  const auto p = run(BuiltinKind::HomogeneousIsotropic);
  const auto lift = minimal_lift_section(p.grid, p.fibers);
  for (std::size_t q = 0; q < p.grid.size(); ++q) {
    for (const Mat3& A : lift.maps[q]) EXPECT_LE(A.lpNorm<Eigen::Infinity>(), 1e-8);
    EXPECT_LE(lift.residuals[q], 1e-10);
  }
  const auto ct = curvature_torsion(christoffels(lift));
  EXPECT_LE(ct.max_abs_R, 1e-6);
  EXPECT_LE(ct.max_abs_T, 1e-6);
}

TEST(Connection, FgmLiftAndChristoffels) {
  const auto p = run(BuiltinKind::UniformFgm);
  const auto lift = minimal_lift_section(p.grid, p.fibers);
  Mat3 E = Mat3::Zero();
  E(0, 1) = 1.0;
  for (std::size_t q = 0; q < p.grid.size(); ++q) {
    EXPECT_LE((lift.maps[q][0] - E).lpNorm<Eigen::Infinity>(), 1e-7);
    EXPECT_LE(lift.maps[q][1].lpNorm<Eigen::Infinity>(), 1e-7);
    EXPECT_LE(lift.maps[q][2].lpNorm<Eigen::Infinity>(), 1e-7);
  }
  const auto conn = christoffels(lift);
  // Gamma^1_{21} = -1 in 1-based labels; everything else vanishes.
  for (const auto& g : conn.gamma) {
    for (int n = 0; n < 27; ++n) {
      const double expected = n == idx3(0, 1, 0) ? -1.0 : 0.0;
      EXPECT_NEAR(g(n), expected, 1e-7);
    }
  }
  const auto ct = curvature_torsion(conn);
  EXPECT_NEAR(ct.max_abs_T, 1.0, 1e-7);
  EXPECT_LE(ct.max_abs_R, 1e-6);
}

TEST(Connection, NonuniformLiftThrows) {
  const auto p = run(BuiltinKind::Nonuniform, 3);
  try {
    minimal_lift_section(p.grid, p.fibers);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotUniform);
  }
}

TEST(Connection, CurvatureMatchesBruteForceOracle) {
  oracles::Rng rng(31);
  const Grid g(Point3(-0.5, -0.4, -0.3), Point3(0.6, 0.5, 0.4), {5, 6, 7});
  for (int trial = 0; trial < 3; ++trial) {
    const QuadraticGamma q(rng);
    const auto conn = field_from(g, [&](int k, int i, int j, const Point3& x) { return q.value(k, i, j, x); });
    const auto ct = curvature_torsion(conn);
    for (std::size_t p = 0; p < g.size(); ++p) {
      const Point3 x = g.point(p);
      for (int l = 0; l < 3; ++l)
        for (int k = 0; k < 3; ++k)
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
              // Second-order stencils are exact on quadratics.
              ASSERT_NEAR(ct.R[p](idx4(l, k, i, j)), q.R(l, k, i, j, x), 1e-10);
              ASSERT_EQ(ct.R[p](idx4(l, k, i, j)), -ct.R[p](idx4(l, k, j, i)));
            }
      for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            ASSERT_EQ(ct.T[p](idx3(k, i, j)), -ct.T[p](idx3(k, j, i)));
            ASSERT_NEAR(ct.T[p](idx3(k, i, j)), q.value(k, i, j, x) - q.value(k, j, i, x), 1e-14);
          }
    }
  }
}

TEST(Connection, CurvedTestField) {
  // Gamma^k_ij = delta^k_i delta_j1 x^2: the connection form x^2 dx^1 is not closed.
  const Grid g(Point3::Constant(-1), Point3::Constant(1), {5, 5, 5});
  const auto conn =
      field_from(g, [](int k, int i, int j, const Point3& x) { return (k == i && j == 0) ? x(1) : 0.0; });
  const auto ct = curvature_torsion(conn);
  EXPECT_NEAR(ct.max_abs_R, 1.0, 1e-12);
  EXPECT_GT(ct.max_abs_R, 0.5);
  for (std::size_t p = 0; p < g.size(); ++p)
    for (int l = 0; l < 3; ++l) EXPECT_NEAR(ct.R[p](idx4(l, l, 1, 0)), 1.0, 1e-12);
  EXPECT_THROW(build_homogeneous_chart(conn, Point3::Zero()), Error);
}

TEST(Connection, ExactConnectionFormIsFlat) {
  // Gamma^k_ij = delta^k_i x^j: the form is d(|x|^2 / 2), so R vanishes.
  const Grid g(Point3::Constant(-1), Point3::Constant(1), {5, 5, 5});
  const auto conn = field_from(g, [](int k, int i, int j, const Point3& x) { return k == i ? x(j) : 0.0; });
  const auto ct = curvature_torsion(conn);
  EXPECT_LE(ct.max_abs_R, 1e-12);
  EXPECT_GT(ct.max_abs_T, 0.5);
}

TEST(Connection, GridTooSmall) {
  ConnectionField c;
  c.grid = Grid(Point3::Zero(), Point3::Ones(), {2, 3, 3});
  c.gamma.assign(c.grid.size(), Tensor3::Zero());
  try {
    curvature_torsion(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridTooSmall);
  }
}

TEST(Connection, CurvatureAntisymmetryOnBuiltins) {
  for (BuiltinKind k : {BuiltinKind::HomogeneousIsotropic, BuiltinKind::UniformFgm, BuiltinKind::UniformFgmIntegrable}) {
    const auto p = run(k);
    const auto ct = curvature_torsion(christoffels(minimal_lift_section(p.grid, p.fibers)));
    for (std::size_t q = 0; q < p.grid.size(); ++q)
      for (int l = 0; l < 3; ++l)
        for (int kk = 0; kk < 3; ++kk)
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
              EXPECT_LE(std::abs(ct.R[q](idx4(l, kk, i, j)) + ct.R[q](idx4(l, kk, j, i))), 1e-6);
              EXPECT_EQ(ct.T[q](idx3(l, i, j)), -ct.T[q](idx3(l, j, i)));
            }
  }
}

TEST(Connection, VerdictTableAcrossResolutions) {
  for (int n : {5, 9}) {
    {
      const auto p = run(BuiltinKind::HomogeneousIsotropic, n);
      ASSERT_TRUE(uniformity_verdict(p.fibers).uniform);
      const auto ct = curvature_torsion(christoffels(minimal_lift_section(p.grid, p.fibers)));
      const auto v = homogeneity_verdict(p.fibers, ct, 1e-4);
      EXPECT_EQ(v.verdict, HomogeneityVerdict::HomogeneousEvidence);
      EXPECT_FALSE(v.trivial_isotropy);
      EXPECT_EQ(v.max_isotropy_dim, 3);
    }
    {
      const auto p = run(BuiltinKind::UniformFgm, n);
      ASSERT_TRUE(uniformity_verdict(p.fibers).uniform);
      const auto ct = curvature_torsion(christoffels(minimal_lift_section(p.grid, p.fibers)));
      const auto v = homogeneity_verdict(p.fibers, ct, 1e-4);
      EXPECT_EQ(v.verdict, HomogeneityVerdict::Obstructed);
      EXPECT_TRUE(v.trivial_isotropy);
    }
    {
      const auto p = run(BuiltinKind::Nonuniform, n);
      EXPECT_FALSE(uniformity_verdict(p.fibers).uniform);
      CurvatureTorsionReport empty;
      EXPECT_THROW(homogeneity_verdict(p.fibers, empty), Error);
    }
  }
}

TEST(Connection, CurvedWithIsotropyIsInconclusive) {
  const auto p = run(BuiltinKind::HomogeneousIsotropic, 3);
  CurvatureTorsionReport rep;
  rep.max_abs_R = 1.0;
  EXPECT_EQ(homogeneity_verdict(p.fibers, rep).verdict, HomogeneityVerdict::Inconclusive);
  EXPECT_EQ(to_string(HomogeneityVerdict::Inconclusive), "inconclusive");
}

TEST(Connection, IntegrableBodyChart) {
  const auto p = run(BuiltinKind::UniformFgmIntegrable);
  const auto conn = christoffels(minimal_lift_section(p.grid, p.fibers));
  // Gamma^2_{11} = -1 in 1-based labels.
  EXPECT_NEAR(conn.gamma[0](idx3(1, 0, 0)), -1.0, 1e-7);
  const auto ct = curvature_torsion(conn);
  ASSERT_EQ(homogeneity_verdict(p.fibers, ct).verdict, HomogeneityVerdict::HomogeneousEvidence);

  const Point3 origin = Point3::Zero();
  const auto chart = build_homogeneous_chart(conn, origin);
  EXPECT_LE(max_abs_interior(chart_christoffels(conn, chart)), 1e-3);
  for (std::size_t q = 0; q < p.grid.size(); ++q) {
    const Point3 x = p.grid.point(q);
    const Point3 expected(x(0), x(1) - 0.5 * x(0) * x(0), x(2));
    EXPECT_LE((chart.coords[q] - expected).lpNorm<Eigen::Infinity>(), 1e-6);
    EXPECT_LE((chart.frames[q] - models::fgm_integrable_K(x)).lpNorm<Eigen::Infinity>(), 1e-6);
  }
  // Path independence on a flat, torsion-free connection.
  const Point3 target(0.8, -0.7, 0.6);
  const auto a = transport_along_axes(conn, origin, target, {0, 1, 2});
  const auto b = transport_along_axes(conn, origin, target, {2, 1, 0});
  const auto c = transport_along_axes(conn, origin, target, {1, 0, 2});
  EXPECT_LE((a.coords - b.coords).norm(), 1e-6);
  EXPECT_LE((a.coords - c.coords).norm(), 1e-6);
  EXPECT_LE((a.frame - b.frame).norm(), 1e-6);
}

TEST(Connection, TorsionMakesTransportPathDependent) {
  const auto p = run(BuiltinKind::UniformFgm);
  const auto conn = christoffels(minimal_lift_section(p.grid, p.fibers));
  const Point3 target(0.8, -0.7, 0.6);
  const auto a = transport_along_axes(conn, Point3::Zero(), target, {0, 1, 2});
  const auto b = transport_along_axes(conn, Point3::Zero(), target, {1, 0, 2});
  EXPECT_GT((a.coords - b.coords).norm(), 0.1);
  EXPECT_THROW(build_homogeneous_chart(conn, Point3::Zero()), Error);
}

TEST(Connection, SignLockAgainstDerivation) {
  oracles::Rng rng(32);
  for (BuiltinKind k : {BuiltinKind::UniformFgm, BuiltinKind::UniformFgmIntegrable}) {
    const auto p = run(k);
    const auto lift = minimal_lift_section(p.grid, p.fibers);
    const auto conn = christoffels(lift);
    for (int n = 0; n < 5; ++n) {
      const Point3 x = rng.vec(-0.7, 0.7);
      const Tensor3 G = p.grid.interpolate(std::span<const Tensor3>(conn.gamma), x);
      for (int j = 0; j < 3; ++j) {
        const Derivation d = derivation_matrix(section_from_lift(lift, Vec3::Unit(j)), x);
        for (int kk = 0; kk < 3; ++kk)
          for (int i = 0; i < 3; ++i) EXPECT_NEAR(d.matrix(kk, i), G(idx3(kk, i, j)), 1e-5);
        EXPECT_LE((d.base - Vec3::Unit(j)).norm(), 1e-6);
      }
    }
  }
}
