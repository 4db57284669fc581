#ifndef MATGROUPOID_GRID_HPP
#define MATGROUPOID_GRID_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>

#include "matgroupoid/errors.hpp"
#include "matgroupoid/types.hpp"

namespace matgroupoid {

/**
 * @brief Uniform lattice of points in the chart.
 *
 * Flat indices run lexicographically in (x1, x2, x3), so iterating over
 * flat indices visits points in lexicographic order.
 */
class Grid {
 public:
  Grid() = default;
  Grid(Point3 first, Point3 last, std::array<int, 3> shape);

  /// `shape` points per axis spanning the box shrunk by `margin` on every side.
  static Grid interior(const Box& box, std::array<int, 3> shape, double margin);

  const std::array<int, 3>& shape() const { return shape_; }
  std::size_t size() const {
    return static_cast<std::size_t>(shape_[0]) * shape_[1] * shape_[2];
  }
  const Point3& first() const { return first_; }
  const Point3& last() const { return last_; }
  Vec3 spacing() const;
  Box hull() const { return Box{first_, last_}; }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k;
  }
  std::array<int, 3> coords(std::size_t flat) const;
  Point3 point(std::size_t flat) const;
  Point3 point(int i, int j, int k) const;

  /// True if the node lies on a face of the lattice.
  bool on_boundary(std::size_t flat) const;

  /// Second-order difference along `axis`; central inside, one-sided on faces.
  template <class V>
  V derivative(std::span<const V> values, std::size_t flat, int axis) const;

  /// Trilinear interpolation; throws LeftDomain outside the lattice hull.
  template <class V>
  V interpolate(std::span<const V> values, const Point3& x) const;

 private:
  Point3 first_{Point3::Zero()};
  Point3 last_{Point3::Zero()};
  std::array<int, 3> shape_{1, 1, 1};
};

template <class V>
V Grid::derivative(std::span<const V> values, std::size_t flat, int axis) const {
  const int n = shape_[axis];
  if (n < 3) throw Error(ErrorKind::GridTooSmall, "derivative needs at least 3 points per axis");
  const double h = spacing()(axis);
  auto c = coords(flat);
  auto at = [&](int offset) {
    auto cc = c;
    cc[axis] += offset;
    return values[index(cc[0], cc[1], cc[2])];
  };
  const int p = c[axis];
  if (p == 0) return V((-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h));
  if (p == n - 1) return V((3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h));
  return V((at(1) - at(-1)) / (2.0 * h));
}

template <class V>
V Grid::interpolate(std::span<const V> values, const Point3& x) const {
  constexpr double kSlack = 1e-12;
  if (!x.allFinite() || !hull().contains(x, kSlack)) {
    throw Error(ErrorKind::LeftDomain, "interpolation point outside grid hull");
  }
  std::array<int, 3> base{};
  std::array<double, 3> frac{};
  const Vec3 h = spacing();
  for (int a = 0; a < 3; ++a) {
    if (shape_[a] == 1) {
      base[a] = 0;
      frac[a] = 0.0;
      continue;
    }
    const double s = std::clamp((x(a) - first_(a)) / h(a), 0.0, static_cast<double>(shape_[a] - 1));
    base[a] = std::min(static_cast<int>(std::floor(s)), shape_[a] - 2);
    frac[a] = s - base[a];
  }
  V acc = values[index(base[0], base[1], base[2])] * 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    double w = 1.0;
    std::array<int, 3> idx{};
    bool skip = false;
    for (int a = 0; a < 3; ++a) {
      const int bit = (corner >> a) & 1;
      if (shape_[a] == 1 && bit) {
        skip = true;
        break;
      }
      idx[a] = base[a] + bit;
      w *= bit ? frac[a] : 1.0 - frac[a];
    }
    if (skip || w == 0.0) continue;
    acc = acc + values[index(idx[0], idx[1], idx[2])] * w;
  }
  return acc;
}

}  // namespace matgroupoid

#endif
