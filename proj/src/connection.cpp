#include "matgroupoid/connection.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "matgroupoid/errors.hpp"

namespace matgroupoid {

LinearSectionField minimal_lift_section(const Grid& grid, std::span<const FiberBasis> fibers, double v_tol) {
  if (fibers.size() != grid.size()) throw Error(ErrorKind::InvalidArgument, "fiber count does not match grid");
  LinearSectionField out;
  out.grid = grid;
  out.maps.resize(grid.size());
  out.residuals.resize(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const FiberBasis& f = fibers[p];
    if (anchor_rank(f, v_tol) < 3) {
      std::ostringstream os;
      os << "anchor not surjective at (" << f.point.transpose() << ")";
      throw Error(ErrorKind::NotUniform, os.str());
    }
    const auto B = f.matrix();
    const MatX V = B.topRows<3>();
    // B has orthonormal columns, so |A-part|^2 = |c|^2 - 1 once V c = e_j: the
    // minimum-norm solution of V c = e_j is the minimum-norm lift.
    Eigen::JacobiSVD<MatX> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double worst = 0.0;
    for (int j = 0; j < 3; ++j) {
      const VecX c = svd.solve(Vec3::Unit(j));
      const Vec12 u = B * c;
      const AlgebroidElement e = AlgebroidElement::from_vector(u);
      out.maps[p][static_cast<std::size_t>(j)] = e.A;
      worst = std::max(worst, (e.v - Vec3::Unit(j)).lpNorm<Eigen::Infinity>());
    }
    out.residuals[p] = worst;
  }
  return out;
}

ConnectionField christoffels(const LinearSectionField& section) {
  ConnectionField conn;
  conn.grid = section.grid;
  conn.gamma.resize(section.maps.size());
  for (std::size_t p = 0; p < section.maps.size(); ++p) {
    Tensor3& g = conn.gamma[p];
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g(idx3(k, i, j)) = -section.maps[p][static_cast<std::size_t>(j)](k, i);
  }
  return conn;
}

CurvatureTorsionReport curvature_torsion(const ConnectionField& conn) {
  const Grid& grid = conn.grid;
  for (int a = 0; a < 3; ++a)
    if (grid.shape()[a] < 3) throw Error(ErrorKind::GridTooSmall, "curvature needs at least 3 points per axis");
  if (conn.gamma.size() != grid.size()) throw Error(ErrorKind::InvalidArgument, "connection size mismatch");

  CurvatureTorsionReport rep;
  rep.grid = grid;
  rep.R.resize(grid.size());
  rep.T.resize(grid.size());
  rep.boundary.resize(grid.size());
  const std::span<const Tensor3> values(conn.gamma);

  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Tensor3& G = conn.gamma[p];
    std::array<Tensor3, 3> dG;
    for (int a = 0; a < 3; ++a) dG[static_cast<std::size_t>(a)] = grid.derivative(values, p, a);

    Tensor4& R = rep.R[p];
    for (int l = 0; l < 3; ++l)
      for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            double r = dG[static_cast<std::size_t>(i)](idx3(l, k, j)) - dG[static_cast<std::size_t>(j)](idx3(l, k, i));
            for (int m = 0; m < 3; ++m) r += G(idx3(l, m, i)) * G(idx3(m, k, j)) - G(idx3(l, m, j)) * G(idx3(m, k, i));
            R(idx4(l, k, i, j)) = r;
          }

    Tensor3& T = rep.T[p];
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) T(idx3(k, i, j)) = G(idx3(k, i, j)) - G(idx3(k, j, i));

    rep.boundary[p] = grid.on_boundary(p);
    rep.max_abs_R = std::max(rep.max_abs_R, R.lpNorm<Eigen::Infinity>());
    rep.max_abs_T = std::max(rep.max_abs_T, T.lpNorm<Eigen::Infinity>());
  }
  return rep;
}

std::string_view to_string(HomogeneityVerdict v) {
  switch (v) {
    case HomogeneityVerdict::HomogeneousEvidence: return "homogeneous_evidence";
    case HomogeneityVerdict::Obstructed: return "obstructed";
    case HomogeneityVerdict::Inconclusive: return "inconclusive";
  }
  return "";
}

HomogeneityResult homogeneity_verdict(std::span<const FiberBasis> fibers, const CurvatureTorsionReport& report,
                                      double flat_tol, double v_tol) {
  HomogeneityResult res;
  res.max_abs_R = report.max_abs_R;
  res.max_abs_T = report.max_abs_T;
  res.trivial_isotropy = true;
  for (const auto& f : fibers) {
    if (anchor_rank(f, v_tol) < 3) {
      std::ostringstream os;
      os << "body not uniform at (" << f.point.transpose() << ")";
      throw Error(ErrorKind::NotUniform, os.str());
    }
    const int iso = isotropy_algebra(f, v_tol).dim;
    res.max_isotropy_dim = std::max(res.max_isotropy_dim, iso);
    if (iso > 0) res.trivial_isotropy = false;
  }
  res.flat = report.max_abs_R <= flat_tol && report.max_abs_T <= flat_tol;
  if (res.flat) {
    res.verdict = HomogeneityVerdict::HomogeneousEvidence;
  } else if (res.trivial_isotropy) {
    res.verdict = HomogeneityVerdict::Obstructed;
  } else {
    res.verdict = HomogeneityVerdict::Inconclusive;
  }
  return res;
}

namespace {

// G(w)^k_i = Gamma^k_{ij} w^j
Mat3 contract_direction(const Tensor3& g, const Vec3& w) {
  Mat3 m = Mat3::Zero();
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(k, i) += g(idx3(k, i, j)) * w(j);
  return m;
}

struct TransportState {
  Mat3 P;
  Point3 y;
};

// RK4 on dP/ds = -G(dir) P, dy/ds = P^{-1} dir along x0 + s dir.
void transport_segment(const Grid& grid, std::span<const Tensor3> gamma, const Point3& start, const Vec3& dir,
                       double length, double max_step, TransportState& st) {
  if (length <= 0.0) return;
  const int n = std::max(1, static_cast<int>(std::ceil(length / max_step - 1e-12)));
  const double h = length / n;
  auto rhs = [&](double s, const Mat3& P) {
    const Tensor3 g = grid.interpolate(gamma, Point3(start + s * dir));
    TransportState d;
    d.P = -contract_direction(g, dir) * P;
    d.y = P.inverse() * dir;
    return d;
  };
  for (int step = 0; step < n; ++step) {
    const double s = step * h;
    const auto k1 = rhs(s, st.P);
    const auto k2 = rhs(s + 0.5 * h, st.P + 0.5 * h * k1.P);
    const auto k3 = rhs(s + 0.5 * h, st.P + 0.5 * h * k2.P);
    const auto k4 = rhs(s + h, st.P + h * k3.P);
    st.P += h / 6.0 * (k1.P + 2.0 * k2.P + 2.0 * k3.P + k4.P);
    st.y += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
  }
}

}  // namespace

TransportResult transport_along_axes(const ConnectionField& conn, const Point3& x0, const Point3& x1,
                                     std::array<int, 3> order, double max_step) {
  if (!(max_step > 0.0)) throw Error(ErrorKind::InvalidArgument, "transport step must be positive");
  std::array<bool, 3> seen{};
  for (int a : order) {
    if (a < 0 || a > 2 || seen[static_cast<std::size_t>(a)]) throw Error(ErrorKind::InvalidArgument, "axis order must be a permutation of 0,1,2");
    seen[static_cast<std::size_t>(a)] = true;
  }
  const std::span<const Tensor3> gamma(conn.gamma);
  TransportState st{Mat3::Identity(), Point3::Zero()};
  Point3 cur = x0;
  for (int a : order) {
    const double delta = x1(a) - cur(a);
    Vec3 dir = Vec3::Zero();
    dir(a) = delta >= 0.0 ? 1.0 : -1.0;
    transport_segment(conn.grid, gamma, cur, dir, std::abs(delta), max_step, st);
    cur(a) = x1(a);
  }
  return TransportResult{st.P, st.y};
}

HomogeneousChart build_homogeneous_chart(const ConnectionField& conn, const Point3& x0, double flat_tol,
                                         double max_step) {
  const auto rep = curvature_torsion(conn);
  if (rep.max_abs_R > flat_tol || rep.max_abs_T > flat_tol) {
    std::ostringstream os;
    os << "connection not flat and torsion-free: max|R| = " << rep.max_abs_R << ", max|T| = " << rep.max_abs_T;
    throw Error(ErrorKind::NotFlat, os.str());
  }
  if (!conn.grid.hull().contains(x0, 1e-12)) throw Error(ErrorKind::OutOfDomain, "chart origin outside grid");
  HomogeneousChart chart;
  chart.grid = conn.grid;
  chart.origin = x0;
  chart.coords.resize(conn.grid.size());
  chart.frames.resize(conn.grid.size());
  for (std::size_t p = 0; p < conn.grid.size(); ++p) {
    const auto tr = transport_along_axes(conn, x0, conn.grid.point(p), {0, 1, 2}, max_step);
    chart.coords[p] = tr.coords;
    chart.frames[p] = tr.frame;
  }
  return chart;
}

ConnectionField chart_christoffels(const ConnectionField& conn, const HomogeneousChart& chart) {
  const Grid& grid = conn.grid;
  if (chart.coords.size() != grid.size()) throw Error(ErrorKind::InvalidArgument, "chart size mismatch");
  // J(:, m) = dy/dx^m from the chart itself; X = J^{-1} holds the coordinate fields d/dy^a.
  std::vector<Mat3> X(grid.size());
  const std::span<const Point3> coords(chart.coords);
  std::vector<Mat3> J(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    for (int m = 0; m < 3; ++m) J[p].col(m) = grid.derivative(coords, p, m);
    X[p] = J[p].inverse();
  }
  const std::span<const Mat3> Xs(X);

  ConnectionField out;
  out.grid = grid;
  out.gamma.resize(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    std::array<Mat3, 3> dX;
    for (int m = 0; m < 3; ++m) dX[static_cast<std::size_t>(m)] = grid.derivative(Xs, p, m);
    const Tensor3& G = conn.gamma[p];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        // nabla_{X_a} X_b in x-components
        Vec3 w = Vec3::Zero();
        for (int m = 0; m < 3; ++m) w += X[p](m, a) * dX[static_cast<std::size_t>(m)].col(b);
        for (int k = 0; k < 3; ++k)
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) w(k) += G(idx3(k, i, j)) * X[p](i, b) * X[p](j, a);
        const Vec3 wy = J[p] * w;
        for (int c = 0; c < 3; ++c) out.gamma[p](idx3(c, b, a)) = wy(c);
      }
    }
  }
  return out;
}

double max_abs_interior(const ConnectionField& conn) {
  double m = 0.0;
  for (std::size_t p = 0; p < conn.gamma.size(); ++p)
    if (!conn.grid.on_boundary(p)) m = std::max(m, conn.gamma[p].lpNorm<Eigen::Infinity>());
  return m;
}

}  // namespace matgroupoid
