#include <gtest/gtest.h>

#include "matgroupoid/errors.hpp"
#include "matgroupoid/jet.hpp"
#include "oracles.hpp"

using namespace matgroupoid;

namespace {

constexpr double kTol = 1e-12;

Mat3 diag(double a, double b, double c) { return Vec3(a, b, c).asDiagonal(); }

}  // namespace

TEST(Jet, ComposeWithIdentityMatrix) {
  const Point3 x(0.1, 0.2, 0.3), y(-0.4, 0.5, 0.0), z(0.9, -0.9, 0.2);
  const Mat3 M = oracles::Rng(1).invertible();
  const Jet1 r = compose(Jet1{y, z, M}, Jet1{x, y, Mat3::Identity()});
  EXPECT_EQ(r.source, x);
  EXPECT_EQ(r.target, z);
  EXPECT_EQ(r.matrix, M);
}

TEST(Jet, ComposeDiagonal) {
  const Jet1 r = compose(Jet1{Point3::Zero(), Point3::Zero(), diag(2, 1, 1)}, Jet1{Point3::Zero(), Point3::Zero(), diag(1, 3, 1)});
  EXPECT_EQ(r.matrix, diag(2, 3, 1));
}

TEST(Jet, ComposeRejectsMismatch) {
  const Jet1 g{Point3(1, 0, 0), Point3::Zero(), Mat3::Identity()};
  const Jet1 h{Point3::Zero(), Point3(0.5, 0, 0), Mat3::Identity()};
  try {
    compose(g, h);
    FAIL() << "expected SourceTargetMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SourceTargetMismatch);
  }
  // Within point_tol is accepted.
  const Jet1 h2{Point3::Zero(), Point3(1 + 1e-10, 0, 0), Mat3::Identity()};
  EXPECT_NO_THROW(compose(g, h2));
}

TEST(Jet, InvertExamples) {
  const Point3 x(0.1, 0.2, 0.3), y(0.3, 0.2, 0.1);
  const Jet1 inv = invert(Jet1{x, y, Mat3::Identity()});
  EXPECT_EQ(inv.source, y);
  EXPECT_EQ(inv.target, x);
  EXPECT_EQ(inv.matrix, Mat3::Identity());

  const Jet1 d = invert(Jet1{x, y, diag(2, 4, 5)});
  EXPECT_LE((d.matrix - diag(0.5, 0.25, 0.2)).lpNorm<Eigen::Infinity>(), kTol);
}

TEST(Jet, InvertSingularThrows) {
  Mat3 s = Mat3::Identity();
  s(2, 2) = 1e-14;
  try {
    invert(Jet1{Point3::Zero(), Point3::Zero(), s});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularMatrix);
  }
}

TEST(Jet, IdentityAndUnitLaws) {
  EXPECT_EQ(identity(Point3::Zero()).matrix, Mat3::Identity());
  oracles::Rng rng(2);
  for (int n = 0; n < 200; ++n) {
    const Jet1 g = rng.jet();
    EXPECT_LE(jet_distance(compose(g, identity(g.source)), g), kTol);
    EXPECT_LE(jet_distance(compose(identity(g.target), g), g), kTol);
  }
}

// Groupoid axioms over random jets; inverse and associativity laws.
TEST(JetProperty, GroupoidAxioms) {
  oracles::Rng rng(3);
  for (int n = 0; n < 1000; ++n) {
    const Point3 a = rng.vec(-1, 1), b = rng.vec(-1, 1), c = rng.vec(-1, 1), d = rng.vec(-1, 1);
    const Jet1 h = rng.jet(a, b), g = rng.jet(b, c), k0 = rng.jet(d, a);
    // compose(compose(g,h),k) vs compose(g,compose(h,k)), direct product oracle
    const Jet1 left = compose(compose(g, h), k0);
    const Jet1 right = compose(g, compose(h, k0));
    const double scale = std::max(1.0, left.matrix.lpNorm<Eigen::Infinity>());
    ASSERT_LE(jet_distance(left, right), kTol * scale);
    ASSERT_LE((left.matrix - g.matrix * h.matrix * k0.matrix).lpNorm<Eigen::Infinity>(), kTol * scale);

    const Jet1 gi = invert(g);
    ASSERT_LE(jet_distance(compose(gi, g), identity(g.source)), 1e-11);
    ASSERT_LE(jet_distance(compose(g, gi), identity(g.target)), 1e-11);
    ASSERT_LE(jet_distance(invert(gi), g), 1e-11 * std::max(1.0, g.matrix.lpNorm<Eigen::Infinity>()));
  }
}

TEST(Jet, IdentityFixedByInvert) {
  const Jet1 e = identity(Point3(0.3, -0.2, 0.7));
  EXPECT_EQ(jet_distance(invert(e), e), 0.0);
}

TEST(Jet, ActOnFrame) {
  const Point3 x(0.1, 0.2, 0.3), y(-0.3, 0.4, 0.5);
  const Frame z{x, oracles::Rng(4).invertible()};
  const Frame same = act_on_frame(identity(x), z);
  EXPECT_EQ(same.base, x);
  EXPECT_EQ(same.matrix, z.matrix);

  const Mat3 M = oracles::Rng(5).invertible();
  const Frame moved = act_on_frame(Jet1{x, y, M}, Frame{x, Mat3::Identity()});
  EXPECT_EQ(moved.base, y);
  EXPECT_EQ(moved.matrix, M);

  EXPECT_THROW(act_on_frame(Jet1{y, x, M}, z), Error);
}

TEST(JetProperty, ActionCompatibleWithComposition) {
  oracles::Rng rng(6);
  for (int n = 0; n < 300; ++n) {
    const Point3 a = rng.vec(-1, 1), b = rng.vec(-1, 1), c = rng.vec(-1, 1);
    const Jet1 h = rng.jet(a, b), g = rng.jet(b, c);
    const Frame z{a, rng.invertible()};
    const Frame lhs = act_on_frame(compose(g, h), z);
    const Frame rhs = act_on_frame(g, act_on_frame(h, z));
    const double scale = std::max(1.0, lhs.matrix.lpNorm<Eigen::Infinity>());
    ASSERT_LE((lhs.matrix - rhs.matrix).lpNorm<Eigen::Infinity>(), kTol * scale);
    ASSERT_EQ(lhs.base, rhs.base);
  }
}
