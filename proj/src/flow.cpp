#include "matgroupoid/flow.hpp"

#include <cmath>

#include "matgroupoid/errors.hpp"

namespace matgroupoid {

SectionField::SectionField(Fn fn, Box domain) : fn_(std::move(fn)), domain_(domain) {
  if (!fn_) throw Error(ErrorKind::InvalidArgument, "empty section function");
}

SectionField SectionField::constant(const AlgebroidElement& e, Box domain) {
  return SectionField([e](const Point3&) { return e; }, domain);
}

SectionField SectionField::from_grid(const Grid& grid, std::span<const AlgebroidElement> values) {
  if (values.size() != grid.size()) throw Error(ErrorKind::InvalidArgument, "section values do not match grid");
  std::vector<Vec12> packed;
  packed.reserve(values.size());
  for (const auto& e : values) packed.push_back(e.to_vector());
  return SectionField(
      [grid, packed = std::move(packed)](const Point3& x) {
        return AlgebroidElement::from_vector(grid.interpolate(std::span<const Vec12>(packed), x));
      },
      grid.hull());
}

AlgebroidElement SectionField::operator()(const Point3& x) const {
  if (!x.allFinite() || !domain_.contains(x, 1e-12)) {
    throw Error(ErrorKind::LeftDomain, "flow left the section domain");
  }
  return fn_(x);
}

SectionField section_from_lift(const LinearSectionField& lift, const Vec3& w) {
  std::vector<AlgebroidElement> values(lift.maps.size());
  for (std::size_t p = 0; p < lift.maps.size(); ++p) {
    values[p].v = w;
    for (int j = 0; j < 3; ++j) values[p].A += w(j) * lift.maps[p][static_cast<std::size_t>(j)];
  }
  return SectionField::from_grid(lift.grid, values);
}

SectionField section_from_projection(const Grid& grid, std::span<const FiberBasis> fibers, const Vec12& u) {
  if (fibers.size() != grid.size()) throw Error(ErrorKind::InvalidArgument, "fiber count does not match grid");
  std::vector<AlgebroidElement> values;
  values.reserve(fibers.size());
  for (const auto& f : fibers) values.push_back(AlgebroidElement::from_vector(project_onto_fiber(f, u)));
  return SectionField::from_grid(grid, values);
}

namespace {

struct FlowState {
  Point3 y;
  Mat3 F;
};

FlowState rhs(const SectionField& s, const FlowState& st) {
  const AlgebroidElement e = s(st.y);
  return FlowState{e.v, e.A * st.F};
}

FlowState axpy(const FlowState& st, double h, const FlowState& d) { return FlowState{st.y + h * d.y, st.F + h * d.F}; }

int substeps(double t, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "ODE step must be positive");
  if (step > kMaxOdeStep) throw Error(ErrorKind::StepTooLarge, "ODE step exceeds 1e-2");
  if (!std::isfinite(t)) throw Error(ErrorKind::InvalidArgument, "flow time must be finite");
  return static_cast<int>(std::ceil(std::abs(t) / step - 1e-12));
}

template <class Visit>
FlowState integrate(const SectionField& s, double t, const Point3& x, double step, Visit&& visit) {
  const int n = substeps(t, step);
  FlowState st{x, Mat3::Identity()};
  s(x);  // domain check at the start point, also for t = 0
  visit(0.0, st);
  if (n == 0) return st;
  const double h = t / n;
  for (int i = 0; i < n; ++i) {
    const FlowState k1 = rhs(s, st);
    const FlowState k2 = rhs(s, axpy(st, 0.5 * h, k1));
    const FlowState k3 = rhs(s, axpy(st, 0.5 * h, k2));
    const FlowState k4 = rhs(s, axpy(st, h, k3));
    st.y += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
    st.F += h / 6.0 * (k1.F + 2.0 * k2.F + 2.0 * k3.F + k4.F);
    s(st.y);
    visit((i + 1) * h, st);
  }
  return st;
}

}  // namespace

Jet1 exp_section(const SectionField& s, double t, const Point3& x, double step) {
  const FlowState st = integrate(s, t, x, step, [](double, const FlowState&) {});
  return Jet1{x, st.y, st.F};
}

std::vector<TrajectoryRecord> exp_trajectory(const SectionField& s, double t, const Point3& x, double step) {
  std::vector<TrajectoryRecord> out;
  integrate(s, t, x, step, [&](double tau, const FlowState& st) { out.push_back(TrajectoryRecord{tau, st.y, st.F}); });
  return out;
}

double one_parameter_check(const SectionField& s, double t, double u, const Point3& x, double step) {
  const Jet1 gu = exp_section(s, u, x, step);
  const Jet1 gt = exp_section(s, t, gu.target, step);
  const Jet1 gtu = exp_section(s, t + u, x, step);
  return jet_distance(gtu, compose(gt, gu));
}

double inverse_law_defect(const SectionField& s, double t, const Point3& x, double step) {
  const Jet1 g = exp_section(s, t, x, step);
  const Jet1 back = exp_section(s, -t, g.target, step);
  return jet_distance(compose(back, g), identity(x));
}

Derivation derivation_matrix(const SectionField& s, const Point3& x, double h, double step) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "derivation step must be positive");
  if (h > kMaxDerivationStep) throw Error(ErrorKind::StepTooLarge, "derivation step exceeds 1e-4");
  // Pullback by Exp_tau at x uses the jet ending at x: it starts at psi_{-tau}(x).
  auto pulled = [&](double tau) {
    const Point3 z = exp_section(s, -tau, x, step).target;
    return exp_section(s, tau, z, step).matrix;
  };
  Derivation d;
  d.matrix = -(pulled(h) - pulled(-h)) / (2.0 * h);
  d.base = (exp_section(s, h, x, step).target - exp_section(s, -h, x, step).target) / (2.0 * h);
  return d;
}

}  // namespace matgroupoid
