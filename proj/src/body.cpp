#include "matgroupoid/body.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include "matgroupoid/errors.hpp"

namespace matgroupoid {

namespace {

// Keeps stencil points that land on the box boundary in floating point.
constexpr double kDomainSlack = 1e-12;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Body::Body(std::string name, Box domain, std::size_t output_dim, ResponseFn response)
    : name_(std::move(name)), domain_(domain), output_dim_(output_dim), response_(std::move(response)) {
  if (output_dim_ == 0) throw Error(ErrorKind::InvalidArgument, "body output dimension must be positive");
  if (!response_) throw Error(ErrorKind::InvalidArgument, "body response is empty");
  if (!((domain_.hi - domain_.lo).array() > 0.0).all()) {
    throw Error(ErrorKind::InvalidArgument, "body domain must have positive extent");
  }
}

VecX Body::evaluate(const Mat3& F, const Point3& x) const {
  if (!x.allFinite() || !domain_.contains(x, kDomainSlack)) {
    std::ostringstream os;
    os << "point (" << x.transpose() << ") outside body '" << name_ << "'";
    throw Error(ErrorKind::OutOfDomain, os.str());
  }
  if (!is_invertible(F)) throw Error(ErrorKind::SingularMatrix, "deformation gradient not invertible");
  VecX w = response_(F, x);
  if (static_cast<std::size_t>(w.size()) != output_dim_) {
    throw Error(ErrorKind::InvalidArgument, "response returned wrong dimension");
  }
  return w;
}

VecX evaluate_w_inverse(const Body& body, const Jet1& g) {
  return body.evaluate(invert(g).matrix, g.target);
}

SampleSet make_sample_set(std::size_t random_count, std::uint64_t seed) {
  SampleSet s;
  s.seed = seed;
  s.matrices.reserve(random_count + 4);
  s.matrices.push_back(Mat3::Identity());
  for (int k = 0; k < 3; ++k) {
    Mat3 d = Mat3::Identity();
    d(k, k) = 2.0;
    s.matrices.push_back(d);
  }
  std::mt19937_64 rng(seed);
  while (s.matrices.size() < random_count + 4) {
    Mat3 F = Mat3::Identity();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) F(i, j) += uniform01(rng) - 0.5;
    if (F.determinant() > 0.2) s.matrices.push_back(F);
  }
  return s;
}

double membership_defect(const Body& body, const Jet1& g, const SampleSet& samples) {
  double worst = 0.0;
  for (const Mat3& F : samples.matrices) {
    const VecX lhs = body.evaluate(F * g.matrix, g.source);
    const VecX rhs = body.evaluate(F, g.target);
    worst = std::max(worst, (lhs - rhs).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

bool is_material_isomorphism(const Body& body, const Jet1& g, const SampleSet& samples, double tol) {
  return membership_defect(body, g, samples) <= tol;
}

bool is_material_symmetry(const Body& body, const Point3& x, const Mat3& P, const SampleSet& samples,
                          double tol) {
  return is_material_isomorphism(body, Jet1{x, x, P}, samples, tol);
}

double default_membership_tol(const Body& body, const SampleSet& samples, const Point3& x, double factor) {
  double scale = 0.0;
  for (const Mat3& F : samples.matrices) {
    scale = std::max(scale, body.evaluate(F, x).lpNorm<Eigen::Infinity>());
  }
  return factor * (1.0 + scale);
}

namespace models {

double anisotropic_weight(int i, int j) { return 1.0 + 0.1 * (3 * i + j); }

double anisotropic_w0(const Mat3& G) {
  const Mat3 E = G.transpose() * G - Mat3::Identity();
  double w = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) w += anisotropic_weight(i, j) * E(i, j) * E(i, j);
  return w;
}

Mat3 fgm_K(const Point3& x) {
  Mat3 K = Mat3::Identity();
  K(0, 1) = x(0);
  return K;
}

Mat3 fgm_integrable_K(const Point3& x) {
  Mat3 K = Mat3::Identity();
  K(1, 0) = x(0);
  return K;
}

double isotropic_energy(const Mat3& F) {
  return (F.transpose() * F - Mat3::Identity()).squaredNorm();
}

}  // namespace models

namespace {

constexpr std::array<BuiltinKind, 4> kBuiltins = {
    BuiltinKind::HomogeneousIsotropic,
    BuiltinKind::UniformFgm,
    BuiltinKind::UniformFgmIntegrable,
    BuiltinKind::Nonuniform,
};

VecX scalar(double w) { return VecX::Constant(1, w); }

}  // namespace

Body builtin_body(BuiltinKind kind) {
  const Box unit{Point3::Constant(-1.0), Point3::Constant(1.0)};
  const std::string name(builtin_name(kind));
  switch (kind) {
    case BuiltinKind::HomogeneousIsotropic:
      return Body(name, unit, 1, [](const Mat3& F, const Point3&) { return scalar(models::isotropic_energy(F)); });
    case BuiltinKind::UniformFgm:
      return Body(name, unit, 1, [](const Mat3& F, const Point3& x) {
        return scalar(models::anisotropic_w0(F * models::fgm_K(x)));
      });
    case BuiltinKind::UniformFgmIntegrable:
      return Body(name, unit, 1, [](const Mat3& F, const Point3& x) {
        return scalar(models::anisotropic_w0(F * models::fgm_integrable_K(x)));
      });
    case BuiltinKind::Nonuniform:
      return Body(name, unit, 1, [](const Mat3& F, const Point3& x) {
        const double d = F(0, 0) - 1.0;
        return scalar(models::isotropic_energy(F) + x(0) * d * d);
      });
  }
  throw Error(ErrorKind::InvalidArgument, "unknown builtin body");
}

std::string_view builtin_name(BuiltinKind kind) {
  switch (kind) {
    case BuiltinKind::HomogeneousIsotropic: return "homogeneous_isotropic";
    case BuiltinKind::UniformFgm: return "uniform_fgm";
    case BuiltinKind::UniformFgmIntegrable: return "uniform_fgm_integrable";
    case BuiltinKind::Nonuniform: return "nonuniform";
  }
  return "";
}

std::string_view builtin_description(BuiltinKind kind) {
  switch (kind) {
    case BuiltinKind::HomogeneousIsotropic: return "|F^T F - I|^2, x-independent, rotation-invariant";
    case BuiltinKind::UniformFgm: return "w0(F K(x)), K = I + x1 e1(x)e2, anisotropic quartic w0";
    case BuiltinKind::UniformFgmIntegrable: return "w0(F K(x)), K = I + x1 e2(x)e1 (Jacobian of a map)";
    case BuiltinKind::Nonuniform: return "|F^T F - I|^2 + x1 (F11 - 1)^2";
  }
  return "";
}

std::optional<BuiltinKind> builtin_from_name(std::string_view name) {
  for (BuiltinKind k : kBuiltins)
    if (builtin_name(k) == name) return k;
  return std::nullopt;
}

std::span<const BuiltinKind> all_builtins() { return kBuiltins; }

Body polynomial_body(std::string name, Box domain, std::vector<std::vector<PolynomialTerm>> components) {
  if (components.empty()) throw Error(ErrorKind::InvalidArgument, "polynomial body needs at least one component");
  for (const auto& comp : components) {
    for (const auto& term : comp) {
      int degree = 0;
      for (int e : term.exponents) {
        if (e < 0) throw Error(ErrorKind::InvalidArgument, "negative exponent in polynomial term");
        degree += e;
      }
      if (degree > kMaxPolynomialDegree) {
        throw Error(ErrorKind::InvalidArgument, "polynomial term degree exceeds 4");
      }
      if (!std::isfinite(term.coeff)) throw Error(ErrorKind::InvalidArgument, "non-finite coefficient");
    }
  }
  const std::size_t d = components.size();
  auto response = [comps = std::move(components)](const Mat3& F, const Point3& x) {
    std::array<double, 12> vars{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) vars[3 * i + j] = F(i, j);
    for (int k = 0; k < 3; ++k) vars[9 + k] = x(k);
    VecX out = VecX::Zero(static_cast<Eigen::Index>(comps.size()));
    for (std::size_t c = 0; c < comps.size(); ++c) {
      double sum = 0.0;
      for (const auto& term : comps[c]) {
        double m = term.coeff;
        for (int v = 0; v < 12; ++v)
          for (int p = 0; p < term.exponents[v]; ++p) m *= vars[v];
        sum += m;
      }
      out(static_cast<Eigen::Index>(c)) = sum;
    }
    return out;
  };
  return Body(std::move(name), domain, d, std::move(response));
}

}  // namespace matgroupoid
