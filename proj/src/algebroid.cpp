#include "matgroupoid/algebroid.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <limits>
#include <sstream>

#include "matgroupoid/errors.hpp"

namespace matgroupoid {

Vec12 AlgebroidElement::to_vector() const {
  Vec12 u;
  u.head<3>() = v;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) u(3 + 3 * i + j) = A(i, j);
  return u;
}

AlgebroidElement AlgebroidElement::from_vector(const Vec12& u) {
  AlgebroidElement e;
  e.v = u.head<3>();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e.A(i, j) = u(3 + 3 * i + j);
  return e;
}

Eigen::Matrix<double, 12, Eigen::Dynamic> FiberBasis::matrix() const {
  Eigen::Matrix<double, 12, Eigen::Dynamic> B(12, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t c = 0; c < basis.size(); ++c) B.col(static_cast<Eigen::Index>(c)) = basis[c].to_vector();
  return B;
}

MatX constraint_rows(const Body& body, const Point3& x, const Mat3& F, double fd_step) {
  if (!(fd_step > 0.0)) throw Error(ErrorKind::InvalidArgument, "fd_step must be positive");
  if (!body.domain().contains(x - Point3::Constant(fd_step)) || !body.domain().contains(x + Point3::Constant(fd_step))) {
    throw Error(ErrorKind::OutOfDomain, "finite-difference stencil leaves the body domain");
  }
  const auto d = static_cast<Eigen::Index>(body.output_dim());
  MatX L(d, 12);
  const double inv2h = 1.0 / (2.0 * fd_step);

  for (int k = 0; k < 3; ++k) {
    Point3 xp = x, xm = x;
    xp(k) += fd_step;
    xm(k) -= fd_step;
    L.col(k) = -(body.evaluate(F, xp) - body.evaluate(F, xm)) * inv2h;
  }

  // dW/dF entry by entry, then <G, F A> = sum_ab (F^T G)_ab A_ab.
  std::array<VecX, 9> grad;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      Mat3 Fp = F, Fm = F;
      Fp(a, b) += fd_step;
      Fm(a, b) -= fd_step;
      grad[3 * a + b] = (body.evaluate(Fp, x) - body.evaluate(Fm, x)) * inv2h;
    }
  }
  for (Eigen::Index r = 0; r < d; ++r) {
    Mat3 G;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) G(a, b) = grad[3 * a + b](r);
    const Mat3 FtG = F.transpose() * G;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) L(r, 3 + 3 * a + b) = FtG(a, b);
  }
  return L;
}

MatX stacked_constraints(const Body& body, const Point3& x, const SampleSet& samples, double fd_step) {
  const auto d = static_cast<Eigen::Index>(body.output_dim());
  MatX L(d * static_cast<Eigen::Index>(samples.count()), 12);
  Eigen::Index row = 0;
  for (const Mat3& F : samples.matrices) {
    L.middleRows(row, d) = constraint_rows(body, x, F, fd_step);
    row += d;
  }
  return L;
}

FiberBasis fiber(const Body& body, const Point3& x, const SampleSet& samples, double rank_tol, double fd_step) {
  const MatX L = stacked_constraints(body, x, samples, fd_step);
  Eigen::JacobiSVD<MatX> svd(L, Eigen::ComputeFullV);
  const VecX& s = svd.singularValues();

  FiberBasis f;
  f.point = x;
  f.singular_values.assign(12, 0.0);
  for (Eigen::Index i = 0; i < s.size() && i < 12; ++i) f.singular_values[static_cast<std::size_t>(i)] = s(i);

  const double smax = f.singular_values.front();
  const double cut = rank_tol * smax;
  int rank = 0;
  if (smax > 0.0) {
    while (rank < 12 && f.singular_values[static_cast<std::size_t>(rank)] > cut) ++rank;
  }
  f.dim = 12 - rank;
  for (int c = rank; c < 12; ++c) f.basis.push_back(AlgebroidElement::from_vector(svd.matrixV().col(c)));

  if (rank == 0 || rank == 12) {
    f.gap_ratio = std::numeric_limits<double>::infinity();
  } else {
    const double kept = f.singular_values[static_cast<std::size_t>(rank - 1)];
    const double dropped = std::max(f.singular_values[static_cast<std::size_t>(rank)],
                                    smax * std::numeric_limits<double>::epsilon());
    f.gap_ratio = kept / dropped;
  }
  return f;
}

std::vector<FiberBasis> fibers_on_grid(const Body& body, const Grid& grid, const SampleSet& samples,
                                       double rank_tol, double fd_step) {
  std::vector<FiberBasis> out;
  out.reserve(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    try {
      out.push_back(fiber(body, grid.point(p), samples, rank_tol, fd_step));
    } catch (const Error& e) {
      std::ostringstream os;
      os << e.what() << " at grid point (" << grid.point(p).transpose() << ")";
      throw Error(e.kind(), os.str());
    }
  }
  return out;
}

namespace {

Eigen::JacobiSVD<MatX> anchor_svd(const FiberBasis& f) {
  const auto B = f.matrix();
  return Eigen::JacobiSVD<MatX>(MatX(B.topRows<3>()), Eigen::ComputeFullV);
}

int rank_of(const VecX& s, double tol) {
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++r;
  return r;
}

}  // namespace

int anchor_rank(const FiberBasis& f, double v_tol) {
  if (f.dim == 0) return 0;
  return rank_of(anchor_svd(f).singularValues(), v_tol);
}

FiberBasis isotropy_algebra(const FiberBasis& f, double v_tol) {
  FiberBasis iso;
  iso.point = f.point;
  iso.singular_values = f.singular_values;
  iso.gap_ratio = f.gap_ratio;
  if (f.dim == 0) return iso;

  auto svd = anchor_svd(f);
  const int r = rank_of(svd.singularValues(), v_tol);
  const auto B = f.matrix();
  // Columns of V beyond the rank span the kernel of the v-projection.
  for (int c = r; c < f.dim; ++c) {
    Vec12 u = B * svd.matrixV().col(c);
    u.head<3>().setZero();
    iso.basis.push_back(AlgebroidElement::from_vector(u));
  }
  iso.dim = f.dim - r;
  return iso;
}

Vec12 project_onto_fiber(const FiberBasis& f, const Vec12& u) {
  if (f.dim == 0) return Vec12::Zero();
  const auto B = f.matrix();
  return B * (B.transpose() * u);
}

UniformityVerdict uniformity_verdict(std::span<const FiberBasis> fibers, double v_tol) {
  UniformityVerdict v;
  v.uniform = true;
  for (const auto& f : fibers) {
    const int r = anchor_rank(f, v_tol);
    v.anchor_ranks.push_back(r);
    if (r < 3) {
      v.uniform = false;
      v.offending.push_back(f.point);
    }
  }
  std::sort(v.offending.begin(), v.offending.end(), [](const Point3& a, const Point3& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
  });
  return v;
}

}  // namespace matgroupoid
