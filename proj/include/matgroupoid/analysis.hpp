#ifndef MATGROUPOID_ANALYSIS_HPP
#define MATGROUPOID_ANALYSIS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "matgroupoid/algebroid.hpp"
#include "matgroupoid/body.hpp"
#include "matgroupoid/connection.hpp"
#include "matgroupoid/flow.hpp"

namespace matgroupoid {

using Json = nlohmann::ordered_json;

struct PolynomialSpec {
  std::string name = "polynomial";
  Box domain;
  std::vector<std::vector<PolynomialTerm>> components;
};

/// Exactly one of `builtin` / `polynomial` is set.
struct BodySpec {
  std::optional<std::string> builtin;
  std::optional<PolynomialSpec> polynomial;
};

struct Tolerances {
  double rank_tol = kDefaultRankTol;
  double anchor_tol = kDefaultAnchorTol;
  double flat_tol = kDefaultFlatTol;
  /// Membership tolerance is this factor times (1 + max sample response).
  double membership_tol_factor = 1e-8;
  double fd_step = kDefaultFdStep;
  double ode_step = kDefaultOdeStep;
  double transport_step = 1e-2;
  /// Rank cut flagged as ambiguous when the singular-value gap is below this.
  double gap_warning_ratio = 10.0;
};

struct OutputFlags {
  bool trajectories = false;
  bool chart = false;
  bool singular_values = false;
  /// Wall-clock timings make reports non-reproducible, so they are opt-in.
  bool timings = false;
};

/// Section used by the `flow` subcommand.
struct FlowSpec {
  Vec12 element = (Vec12() << 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0).finished();
  /// Project the element onto the computed material algebroid at each grid point.
  bool project = true;
};

struct AnalysisConfig {
  BodySpec body;
  std::array<int, 3> resolution{5, 5, 5};
  double margin = 0.1;
  std::size_t sample_count = kDefaultSampleCount;
  std::uint64_t seed = 1234;
  Tolerances tol;
  OutputFlags output;
  FlowSpec flow;
};

/// Parses and validates; throws ConfigInvalid.
AnalysisConfig parse_config(const Json& j);
AnalysisConfig load_config(const std::string& path);
Json config_to_json(const AnalysisConfig& cfg);
void validate(const AnalysisConfig& cfg);

Body make_body(const BodySpec& spec);

struct PointReport {
  Point3 x{Point3::Zero()};
  int fiber_dim = 0;
  int isotropy_dim = 0;
  int anchor_rank = 0;
  double gap_ratio = 0.0;
  bool rank_ambiguous = false;
  std::vector<double> singular_values;
};

struct ConnectionSummary {
  double max_abs_gamma = 0.0;
  Point3 reference_point{Point3::Zero()};
  Tensor3 gamma_at_reference{Tensor3::Zero()};
  double max_lift_residual = 0.0;
};

struct MembershipCheck {
  double max_defect = 0.0;
  double tol = 0.0;
  bool passed = false;
};

struct ChartSummary {
  Point3 origin{Point3::Zero()};
  double max_abs_gamma_in_chart = 0.0;
  std::vector<Point3> coords;
};

struct TrajectoryDump {
  Vec3 direction{Vec3::Zero()};
  std::vector<TrajectoryRecord> records;
};

struct AnalysisReport {
  AnalysisConfig config;
  std::string body_name;
  std::array<int, 3> grid_shape{0, 0, 0};
  Point3 grid_first{Point3::Zero()};
  Point3 grid_last{Point3::Zero()};
  std::size_t sample_total = 0;

  std::vector<PointReport> points;
  bool uniform = false;
  std::vector<Point3> offending;
  bool constant_fiber_dim = true;
  int rank_ambiguities = 0;

  /// "homogeneous_evidence", "obstructed", "inconclusive" or "n/a".
  std::string homogeneity = "n/a";
  bool trivial_isotropy = false;
  int max_isotropy_dim = 0;
  std::optional<double> max_abs_R;
  std::optional<double> max_abs_T;
  std::optional<ConnectionSummary> connection;
  std::optional<MembershipCheck> membership;
  std::optional<ChartSummary> chart;
  std::vector<TrajectoryDump> trajectories;
  std::vector<std::pair<std::string, double>> timings;
};

AnalysisReport run_analysis(const AnalysisConfig& cfg);

enum class ReportFormat { Text, Structured };

std::string emit_report(const AnalysisReport& r, ReportFormat format);
Json report_to_json(const AnalysisReport& r);
/// Inverse of report_to_json; throws ConfigInvalid on schema violations.
AnalysisReport report_from_json(const Json& j);

/// Exponential trajectory of the configured section from x.
std::vector<TrajectoryRecord> run_flow(const AnalysisConfig& cfg, double t, const Point3& x);
std::string emit_trajectory(const std::vector<TrajectoryRecord>& records, ReportFormat format);

}  // namespace matgroupoid

#endif
