#include "matgroupoid/grid.hpp"

namespace matgroupoid {

Grid::Grid(Point3 first, Point3 last, std::array<int, 3> shape) : first_(first), last_(last), shape_(shape) {
  for (int a = 0; a < 3; ++a) {
    if (shape_[a] < 1) throw Error(ErrorKind::GridTooSmall, "grid needs at least one point per axis");
    if (shape_[a] > 1 && !(last_(a) > first_(a))) {
      throw Error(ErrorKind::InvalidArgument, "grid extent must be positive along sampled axes");
    }
  }
}

Grid Grid::interior(const Box& box, std::array<int, 3> shape, double margin) {
  const Point3 first = box.lo + Point3::Constant(margin);
  const Point3 last = box.hi - Point3::Constant(margin);
  if (!((last - first).array() > 0.0).all()) {
    throw Error(ErrorKind::InvalidArgument, "grid margin leaves no interior");
  }
  return Grid(first, last, shape);
}

Vec3 Grid::spacing() const {
  Vec3 h = Vec3::Zero();
  for (int a = 0; a < 3; ++a)
    if (shape_[a] > 1) h(a) = (last_(a) - first_(a)) / (shape_[a] - 1);
  return h;
}

std::array<int, 3> Grid::coords(std::size_t flat) const {
  const int k = static_cast<int>(flat % shape_[2]);
  flat /= shape_[2];
  const int j = static_cast<int>(flat % shape_[1]);
  const int i = static_cast<int>(flat / shape_[1]);
  return {i, j, k};
}

Point3 Grid::point(int i, int j, int k) const {
  const Vec3 h = spacing();
  // Pin the last node exactly so hull checks never reject a grid point.
  auto coord = [&](int a, int n) { return n == shape_[a] - 1 && n > 0 ? last_(a) : first_(a) + n * h(a); };
  return Point3(coord(0, i), coord(1, j), coord(2, k));
}

Point3 Grid::point(std::size_t flat) const {
  auto c = coords(flat);
  return point(c[0], c[1], c[2]);
}

bool Grid::on_boundary(std::size_t flat) const {
  auto c = coords(flat);
  for (int a = 0; a < 3; ++a)
    if (c[a] == 0 || c[a] == shape_[a] - 1) return true;
  return false;
}

}  // namespace matgroupoid
