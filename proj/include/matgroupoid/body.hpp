#ifndef MATGROUPOID_BODY_HPP
#define MATGROUPOID_BODY_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "matgroupoid/jet.hpp"
#include "matgroupoid/types.hpp"

namespace matgroupoid {

/// Reduced response functional: (deformation gradient F, body point x) -> R^d.
using ResponseFn = std::function<VecX(const Mat3&, const Point3&)>;

/**
 * @brief A simple elastic body in a single box chart.
 *
 * The response never sees a target point, so invariance under translating
 * the image of a deformation is structural.
 */
class Body {
 public:
  Body(std::string name, Box domain, std::size_t output_dim, ResponseFn response);

  const std::string& name() const { return name_; }
  const Box& domain() const { return domain_; }
  std::size_t output_dim() const { return output_dim_; }

  /// Throws OutOfDomain / SingularMatrix on bad input.
  VecX evaluate(const Mat3& F, const Point3& x) const;

 private:
  std::string name_;
  Box domain_;
  std::size_t output_dim_;
  ResponseFn response_;
};

inline VecX evaluate(const Body& body, const Mat3& F, const Point3& x) { return body.evaluate(F, x); }

/// W^{-1}(g) = W(g^{-1}): the response of the inverse jet, read at g.target.
VecX evaluate_w_inverse(const Body& body, const Jet1& g);

/// Finite set of test deformation gradients standing in for "all F".
struct SampleSet {
  std::vector<Mat3> matrices;
  std::uint64_t seed = 0;

  std::size_t count() const { return matrices.size(); }
};

/**
 * Fixed anchors {I, diag(2,1,1), diag(1,2,1), diag(1,1,2)} followed by
 * `random_count` matrices I + S, S uniform in [-0.5, 0.5]^9, det > 0.2.
 */
SampleSet make_sample_set(std::size_t random_count, std::uint64_t seed);

/// max_F || W(F P, g.source) - W(F, g.target) ||_inf over the samples.
double membership_defect(const Body& body, const Jet1& g, const SampleSet& samples);

bool is_material_isomorphism(const Body& body, const Jet1& g, const SampleSet& samples, double tol);

bool is_material_symmetry(const Body& body, const Point3& x, const Mat3& P, const SampleSet& samples,
                          double tol);

/// factor * (1 + max sample response magnitude at x).
double default_membership_tol(const Body& body, const SampleSet& samples, const Point3& x,
                              double factor = 1e-8);

enum class BuiltinKind {
  HomogeneousIsotropic,
  UniformFgm,
  UniformFgmIntegrable,
  Nonuniform,
};

Body builtin_body(BuiltinKind kind);
std::string_view builtin_name(BuiltinKind kind);
std::string_view builtin_description(BuiltinKind kind);
std::optional<BuiltinKind> builtin_from_name(std::string_view name);
std::span<const BuiltinKind> all_builtins();

/// One monomial over (F row-major, x): 12 exponents and a coefficient.
struct PolynomialTerm {
  std::array<int, 12> exponents{};
  double coeff = 0.0;
};

inline constexpr int kMaxPolynomialDegree = 4;

/// One polynomial per output component. Throws InvalidArgument if a term exceeds degree 4.
Body polynomial_body(std::string name, Box domain, std::vector<std::vector<PolynomialTerm>> components);

/// Analytic ingredients of the built-in bodies, exposed for oracles.
namespace models {

/// Weight of the (i, j) entry of (G^T G - I)^2 in the anisotropic energy.
double anisotropic_weight(int i, int j);
double anisotropic_w0(const Mat3& G);
/// Uniform but inhomogeneous prestrain: I + x1 e1 (x) e2.
Mat3 fgm_K(const Point3& x);
/// Jacobian of (x1, x2 + x1^2/2, x3): I + x1 e2 (x) e1.
Mat3 fgm_integrable_K(const Point3& x);
double isotropic_energy(const Mat3& F);

}  // namespace models

}  // namespace matgroupoid

#endif
