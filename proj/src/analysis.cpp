#include "matgroupoid/analysis.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "matgroupoid/errors.hpp"
#include "matgroupoid/grid.hpp"

namespace matgroupoid {

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::ConfigInvalid, msg); }

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) config_error(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!ok.count(key)) config_error("unknown key '" + key + "' in " + where);
  }
}

double get_number(const Json& j, const std::string& where) {
  if (!j.is_number()) config_error(where + " must be a number");
  return j.get<double>();
}

bool get_bool(const Json& j, const std::string& where) {
  if (!j.is_boolean()) config_error(where + " must be a boolean");
  return j.get<bool>();
}

template <int N>
Eigen::Matrix<double, N, 1> get_vector(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(N)) {
    config_error(where + " must be an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v(i) = get_number(j[static_cast<std::size_t>(i)], where);
  return v;
}

Json vec_json(const Eigen::Ref<const VecX>& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json mat_json(const Mat3& m) {
  Json a = Json::array();
  for (int i = 0; i < 3; ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

Mat3 mat_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) config_error(where + " must be a 3x3 array");
  Mat3 m;
  for (int i = 0; i < 3; ++i) m.row(i) = get_vector<3>(j[static_cast<std::size_t>(i)], where).transpose();
  return m;
}

// JSON has no infinity; an unbounded gap is written as null.
Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }
double from_finite_or_null(const Json& j, const std::string& where) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : get_number(j, where);
}

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) config_error(where + " is missing '" + key + "'");
  return j.at(key);
}

PolynomialSpec parse_polynomial(const Json& j) {
  check_keys(j, "body.polynomial", {"name", "domain", "components"});
  PolynomialSpec spec;
  if (j.contains("name")) {
    if (!j["name"].is_string()) config_error("body.polynomial.name must be a string");
    spec.name = j["name"].get<std::string>();
  }
  if (j.contains("domain")) {
    check_keys(j["domain"], "body.polynomial.domain", {"lo", "hi"});
    spec.domain.lo = get_vector<3>(require(j["domain"], "lo", "domain"), "domain.lo");
    spec.domain.hi = get_vector<3>(require(j["domain"], "hi", "domain"), "domain.hi");
    if (!((spec.domain.hi - spec.domain.lo).array() > 0.0).all()) config_error("polynomial domain must have positive extent");
  }
  const Json& comps = require(j, "components", "body.polynomial");
  if (!comps.is_array() || comps.empty()) config_error("body.polynomial.components must be a non-empty array");
  for (const auto& comp : comps) {
    if (!comp.is_array()) config_error("each polynomial component must be an array of terms");
    std::vector<PolynomialTerm> terms;
    for (const auto& t : comp) {
      check_keys(t, "polynomial term", {"exponents", "coeff"});
      const Json& e = require(t, "exponents", "polynomial term");
      if (!e.is_array() || e.size() != 12) config_error("term exponents must be 12 integers");
      PolynomialTerm term;
      int degree = 0;
      for (std::size_t k = 0; k < 12; ++k) {
        if (!e[k].is_number_integer() || e[k].get<int>() < 0) config_error("term exponents must be non-negative integers");
        term.exponents[k] = e[k].get<int>();
        degree += term.exponents[k];
      }
      if (degree > kMaxPolynomialDegree) config_error("polynomial term degree exceeds 4");
      term.coeff = get_number(require(t, "coeff", "polynomial term"), "term coeff");
      terms.push_back(term);
    }
    spec.components.push_back(std::move(terms));
  }
  return spec;
}

Json polynomial_json(const PolynomialSpec& p) {
  Json comps = Json::array();
  for (const auto& comp : p.components) {
    Json terms = Json::array();
    for (const auto& t : comp) {
      Json e = Json::array();
      for (int x : t.exponents) e.push_back(x);
      terms.push_back(Json{{"exponents", e}, {"coeff", t.coeff}});
    }
    comps.push_back(terms);
  }
  return Json{{"name", p.name},
              {"domain", Json{{"lo", vec_json(p.domain.lo)}, {"hi", vec_json(p.domain.hi)}}},
              {"components", comps}};
}

}  // namespace

void validate(const AnalysisConfig& cfg) {
  if (cfg.body.builtin.has_value() == cfg.body.polynomial.has_value()) {
    config_error("body must select exactly one of 'builtin' or 'polynomial'");
  }
  if (cfg.body.builtin && !builtin_from_name(*cfg.body.builtin)) config_error("unknown builtin body '" + *cfg.body.builtin + "'");
  for (int n : cfg.resolution)
    if (n < 3) config_error("grid resolution must be at least 3 per axis");
  if (!(cfg.margin >= 0.0)) config_error("grid margin must be non-negative");
  if (cfg.sample_count < 12) config_error("sample count must be at least 12");
  const auto& t = cfg.tol;
  for (double v : {t.rank_tol, t.anchor_tol, t.flat_tol, t.membership_tol_factor, t.fd_step, t.ode_step,
                   t.transport_step, t.gap_warning_ratio}) {
    if (!(v > 0.0) || !std::isfinite(v)) config_error("all tolerances must be positive and finite");
  }
  if (t.ode_step > kMaxOdeStep) config_error("ode_step must not exceed 1e-2");
  if (cfg.margin < t.fd_step) config_error("grid margin must be at least fd_step");
}

AnalysisConfig parse_config(const Json& j) {
  check_keys(j, "config", {"body", "grid", "samples", "tolerances", "output", "flow"});
  AnalysisConfig cfg;

  const Json& body = require(j, "body", "config");
  check_keys(body, "body", {"builtin", "polynomial"});
  if (body.contains("builtin")) {
    if (!body["builtin"].is_string()) config_error("body.builtin must be a string");
    cfg.body.builtin = body["builtin"].get<std::string>();
  }
  if (body.contains("polynomial")) cfg.body.polynomial = parse_polynomial(body["polynomial"]);

  if (j.contains("grid")) {
    const Json& g = j["grid"];
    check_keys(g, "grid", {"resolution", "margin"});
    if (g.contains("resolution")) {
      const Json& r = g["resolution"];
      if (r.is_number_integer()) {
        cfg.resolution = {r.get<int>(), r.get<int>(), r.get<int>()};
      } else if (r.is_array() && r.size() == 3) {
        for (std::size_t a = 0; a < 3; ++a) {
          if (!r[a].is_number_integer()) config_error("grid.resolution entries must be integers");
          cfg.resolution[a] = r[a].get<int>();
        }
      } else {
        config_error("grid.resolution must be an integer or an array of 3 integers");
      }
    }
    if (g.contains("margin")) cfg.margin = get_number(g["margin"], "grid.margin");
  }

  if (j.contains("samples")) {
    const Json& s = j["samples"];
    check_keys(s, "samples", {"count", "seed"});
    if (s.contains("count")) {
      if (!s["count"].is_number_integer() || s["count"].get<long long>() < 0) config_error("samples.count must be a non-negative integer");
      cfg.sample_count = s["count"].get<std::size_t>();
    }
    if (s.contains("seed")) {
      if (!s["seed"].is_number_integer() || (s["seed"].is_number_integer() && !s["seed"].is_number_unsigned() && s["seed"].get<long long>() < 0)) {
        config_error("samples.seed must be a non-negative integer");
      }
      cfg.seed = s["seed"].get<std::uint64_t>();
    }
  }

  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    check_keys(t, "tolerances", {"rank_tol", "anchor_tol", "flat_tol", "membership_tol_factor", "fd_step", "ode_step",
                                 "transport_step", "gap_warning_ratio", "point_tol", "det_tol"});
    auto read = [&](const char* key, double& dst) {
      if (t.contains(key)) dst = get_number(t[key], std::string("tolerances.") + key);
    };
    read("rank_tol", cfg.tol.rank_tol);
    read("anchor_tol", cfg.tol.anchor_tol);
    read("flat_tol", cfg.tol.flat_tol);
    read("membership_tol_factor", cfg.tol.membership_tol_factor);
    read("fd_step", cfg.tol.fd_step);
    read("ode_step", cfg.tol.ode_step);
    read("transport_step", cfg.tol.transport_step);
    read("gap_warning_ratio", cfg.tol.gap_warning_ratio);
    // Fixed library constants are echoed; a config may restate but not change them.
    if (t.contains("point_tol") && get_number(t["point_tol"], "tolerances.point_tol") != kPointTol) {
      config_error("tolerances.point_tol is fixed at 1e-9");
    }
    if (t.contains("det_tol") && get_number(t["det_tol"], "tolerances.det_tol") != kDetTol) {
      config_error("tolerances.det_tol is fixed at 1e-12");
    }
  }

  if (j.contains("output")) {
    const Json& o = j["output"];
    check_keys(o, "output", {"trajectories", "chart", "singular_values", "timings"});
    if (o.contains("trajectories")) cfg.output.trajectories = get_bool(o["trajectories"], "output.trajectories");
    if (o.contains("chart")) cfg.output.chart = get_bool(o["chart"], "output.chart");
    if (o.contains("singular_values")) cfg.output.singular_values = get_bool(o["singular_values"], "output.singular_values");
    if (o.contains("timings")) cfg.output.timings = get_bool(o["timings"], "output.timings");
  }

  if (j.contains("flow")) {
    const Json& f = j["flow"];
    check_keys(f, "flow", {"element", "project"});
    if (f.contains("element")) cfg.flow.element = get_vector<12>(f["element"], "flow.element");
    if (f.contains("project")) cfg.flow.project = get_bool(f["project"], "flow.project");
  }

  validate(cfg);
  return cfg;
}

AnalysisConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

Json config_to_json(const AnalysisConfig& cfg) {
  Json body = Json::object();
  if (cfg.body.builtin) body["builtin"] = *cfg.body.builtin;
  if (cfg.body.polynomial) body["polynomial"] = polynomial_json(*cfg.body.polynomial);
  const auto& t = cfg.tol;
  return Json{
      {"body", body},
      {"grid", Json{{"resolution", Json::array({cfg.resolution[0], cfg.resolution[1], cfg.resolution[2]})},
                    {"margin", cfg.margin}}},
      {"samples", Json{{"count", cfg.sample_count}, {"seed", cfg.seed}}},
      {"tolerances", Json{{"rank_tol", t.rank_tol},
                          {"anchor_tol", t.anchor_tol},
                          {"flat_tol", t.flat_tol},
                          {"membership_tol_factor", t.membership_tol_factor},
                          {"fd_step", t.fd_step},
                          {"ode_step", t.ode_step},
                          {"transport_step", t.transport_step},
                          {"gap_warning_ratio", t.gap_warning_ratio},
                          {"point_tol", kPointTol},
                          {"det_tol", kDetTol}}},
      {"output", Json{{"trajectories", cfg.output.trajectories},
                      {"chart", cfg.output.chart},
                      {"singular_values", cfg.output.singular_values},
                      {"timings", cfg.output.timings}}},
      {"flow", Json{{"element", vec_json(cfg.flow.element)}, {"project", cfg.flow.project}}},
  };
}

Body make_body(const BodySpec& spec) {
  if (spec.builtin) {
    auto kind = builtin_from_name(*spec.builtin);
    if (!kind) config_error("unknown builtin body '" + *spec.builtin + "'");
    return builtin_body(*kind);
  }
  if (spec.polynomial) {
    try {
      return polynomial_body(spec.polynomial->name, spec.polynomial->domain, spec.polynomial->components);
    } catch (const Error& e) {
      config_error(e.what());
    }
  }
  config_error("body must select exactly one of 'builtin' or 'polynomial'");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t center_index(const Grid& grid) {
  const auto& s = grid.shape();
  return grid.index(s[0] / 2, s[1] / 2, s[2] / 2);
}

}  // namespace

AnalysisReport run_analysis(const AnalysisConfig& cfg) {
  validate(cfg);
  const auto t_start = Clock::now();
  AnalysisReport rep;
  rep.config = cfg;

  const Body body = make_body(cfg.body);
  rep.body_name = body.name();
  const Grid grid = Grid::interior(body.domain(), cfg.resolution, cfg.margin);
  rep.grid_shape = grid.shape();
  rep.grid_first = grid.first();
  rep.grid_last = grid.last();
  const SampleSet samples = make_sample_set(cfg.sample_count, cfg.seed);
  rep.sample_total = samples.count();
  const Tolerances& tol = cfg.tol;

  auto t0 = Clock::now();
  const std::vector<FiberBasis> fibers = fibers_on_grid(body, grid, samples, tol.rank_tol, tol.fd_step);
  rep.timings.emplace_back("fibers", seconds_since(t0));

  rep.points.reserve(fibers.size());
  for (const auto& f : fibers) {
    PointReport pr;
    pr.x = f.point;
    pr.fiber_dim = f.dim;
    pr.anchor_rank = anchor_rank(f, tol.anchor_tol);
    pr.isotropy_dim = isotropy_algebra(f, tol.anchor_tol).dim;
    pr.gap_ratio = f.gap_ratio;
    pr.rank_ambiguous = f.gap_ratio < tol.gap_warning_ratio;
    if (cfg.output.singular_values) pr.singular_values = f.singular_values;
    if (pr.rank_ambiguous) ++rep.rank_ambiguities;
    if (pr.fiber_dim != fibers.front().dim) rep.constant_fiber_dim = false;
    rep.points.push_back(std::move(pr));
  }

  const UniformityVerdict uv = uniformity_verdict(fibers, tol.anchor_tol);
  rep.uniform = uv.uniform;
  rep.offending = uv.offending;

  if (rep.uniform) {
    t0 = Clock::now();
    const LinearSectionField lift = minimal_lift_section(grid, fibers, tol.anchor_tol);
    const ConnectionField conn = christoffels(lift);
    const CurvatureTorsionReport ct = curvature_torsion(conn);
    const HomogeneityResult hr = homogeneity_verdict(fibers, ct, tol.flat_tol, tol.anchor_tol);
    rep.timings.emplace_back("connection", seconds_since(t0));

    rep.homogeneity = std::string(to_string(hr.verdict));
    rep.trivial_isotropy = hr.trivial_isotropy;
    rep.max_isotropy_dim = hr.max_isotropy_dim;
    rep.max_abs_R = ct.max_abs_R;
    rep.max_abs_T = ct.max_abs_T;

    ConnectionSummary cs;
    const std::size_t c = center_index(grid);
    cs.reference_point = grid.point(c);
    cs.gamma_at_reference = conn.gamma[c];
    for (std::size_t p = 0; p < grid.size(); ++p) {
      cs.max_abs_gamma = std::max(cs.max_abs_gamma, conn.gamma[p].lpNorm<Eigen::Infinity>());
      cs.max_lift_residual = std::max(cs.max_lift_residual, lift.residuals[p]);
    }
    rep.connection = cs;

    // Finite check: flow the lift along each axis from the center and test the jets.
    t0 = Clock::now();
    MembershipCheck mc;
    mc.passed = true;
    const Vec3 h = grid.spacing();
    for (int j = 0; j < 3; ++j) {
      const SectionField s = section_from_lift(lift, Vec3::Unit(j));
      const double t = 0.5 * h(j);
      const auto traj = exp_trajectory(s, t, cs.reference_point, tol.ode_step);
      const Jet1 g{cs.reference_point, traj.back().y, traj.back().F};
      const double defect = membership_defect(body, g, samples);
      const double mtol = default_membership_tol(body, samples, g.target, tol.membership_tol_factor);
      mc.max_defect = std::max(mc.max_defect, defect);
      mc.tol = std::max(mc.tol, mtol);
      if (defect > mtol) mc.passed = false;
      if (cfg.output.trajectories) rep.trajectories.push_back(TrajectoryDump{Vec3::Unit(j), traj});
    }
    rep.membership = mc;
    rep.timings.emplace_back("membership_check", seconds_since(t0));

    if (cfg.output.chart && hr.verdict == HomogeneityVerdict::HomogeneousEvidence) {
      t0 = Clock::now();
      const HomogeneousChart chart = build_homogeneous_chart(conn, cs.reference_point, tol.flat_tol, tol.transport_step);
      ChartSummary chs;
      chs.origin = chart.origin;
      chs.coords = chart.coords;
      chs.max_abs_gamma_in_chart = max_abs_interior(chart_christoffels(conn, chart));
      rep.chart = chs;
      rep.timings.emplace_back("chart", seconds_since(t0));
    }
  }
  rep.timings.emplace_back("total", seconds_since(t_start));
  return rep;
}

Json report_to_json(const AnalysisReport& r) {
  Json points = Json::array();
  for (const auto& p : r.points) {
    Json jp{{"x", vec_json(p.x)},
            {"fiber_dim", p.fiber_dim},
            {"isotropy_dim", p.isotropy_dim},
            {"anchor_rank", p.anchor_rank},
            {"gap_ratio", finite_or_null(p.gap_ratio)},
            {"rank_ambiguous", p.rank_ambiguous}};
    if (r.config.output.singular_values) jp["singular_values"] = p.singular_values;
    points.push_back(jp);
  }
  Json offending = Json::array();
  for (const auto& x : r.offending) offending.push_back(vec_json(x));

  Json j{{"format", "matgroupoid-report"},
         {"version", 1},
         {"config", config_to_json(r.config)},
         {"body", r.body_name},
         {"grid", Json{{"shape", Json::array({r.grid_shape[0], r.grid_shape[1], r.grid_shape[2]})},
                       {"first", vec_json(r.grid_first)},
                       {"last", vec_json(r.grid_last)}}},
         {"sample_total", r.sample_total},
         {"points", points},
         {"uniformity", r.uniform ? "uniform" : "not_uniform"},
         {"offending_points", offending},
         {"constant_fiber_dim", r.constant_fiber_dim},
         {"rank_ambiguities", r.rank_ambiguities},
         {"homogeneity", r.homogeneity},
         {"trivial_isotropy", r.trivial_isotropy},
         {"max_isotropy_dim", r.max_isotropy_dim},
         {"max_abs_R", r.max_abs_R ? Json(*r.max_abs_R) : Json(nullptr)},
         {"max_abs_T", r.max_abs_T ? Json(*r.max_abs_T) : Json(nullptr)}};

  if (r.connection) {
    const auto& c = *r.connection;
    j["connection"] = Json{{"max_abs_gamma", c.max_abs_gamma},
                           {"reference_point", vec_json(c.reference_point)},
                           {"gamma_at_reference", vec_json(c.gamma_at_reference)},
                           {"max_lift_residual", c.max_lift_residual}};
  } else {
    j["connection"] = nullptr;
  }
  j["membership_check"] = r.membership ? Json{{"max_defect", r.membership->max_defect},
                                              {"tol", r.membership->tol},
                                              {"passed", r.membership->passed}}
                                       : Json(nullptr);
  if (r.chart) {
    Json coords = Json::array();
    for (const auto& y : r.chart->coords) coords.push_back(vec_json(y));
    j["chart"] = Json{{"origin", vec_json(r.chart->origin)},
                      {"max_abs_gamma_in_chart", r.chart->max_abs_gamma_in_chart},
                      {"coords", coords}};
  } else {
    j["chart"] = nullptr;
  }
  Json trajs = Json::array();
  for (const auto& t : r.trajectories) {
    Json recs = Json::array();
    for (const auto& rec : t.records) recs.push_back(Json{{"t", rec.t}, {"y", vec_json(rec.y)}, {"F", mat_json(rec.F)}});
    trajs.push_back(Json{{"direction", vec_json(t.direction)}, {"records", recs}});
  }
  j["trajectories"] = trajs;
  if (r.config.output.timings) {
    Json tm = Json::object();
    for (const auto& [name, secs] : r.timings) tm[name] = secs;
    j["timings"] = tm;
  }
  return j;
}

AnalysisReport report_from_json(const Json& j) {
  check_keys(j, "report",
             {"format", "version", "config", "body", "grid", "sample_total", "points", "uniformity", "offending_points",
              "constant_fiber_dim", "rank_ambiguities", "homogeneity", "trivial_isotropy", "max_isotropy_dim",
              "max_abs_R", "max_abs_T", "connection", "membership_check", "chart", "trajectories", "timings"});
  if (require(j, "format", "report") != "matgroupoid-report" || require(j, "version", "report") != 1) {
    config_error("not a matgroupoid-report version 1 document");
  }
  AnalysisReport r;
  r.config = parse_config(require(j, "config", "report"));
  r.body_name = require(j, "body", "report").get<std::string>();
  const Json& g = require(j, "grid", "report");
  for (std::size_t a = 0; a < 3; ++a) r.grid_shape[a] = g.at("shape").at(a).get<int>();
  r.grid_first = get_vector<3>(g.at("first"), "grid.first");
  r.grid_last = get_vector<3>(g.at("last"), "grid.last");
  r.sample_total = require(j, "sample_total", "report").get<std::size_t>();
  for (const auto& jp : require(j, "points", "report")) {
    PointReport p;
    p.x = get_vector<3>(jp.at("x"), "point.x");
    p.fiber_dim = jp.at("fiber_dim").get<int>();
    p.isotropy_dim = jp.at("isotropy_dim").get<int>();
    p.anchor_rank = jp.at("anchor_rank").get<int>();
    p.gap_ratio = from_finite_or_null(jp.at("gap_ratio"), "point.gap_ratio");
    p.rank_ambiguous = jp.at("rank_ambiguous").get<bool>();
    if (jp.contains("singular_values")) p.singular_values = jp["singular_values"].get<std::vector<double>>();
    r.points.push_back(std::move(p));
  }
  const std::string uni = require(j, "uniformity", "report").get<std::string>();
  if (uni != "uniform" && uni != "not_uniform") config_error("bad uniformity verdict");
  r.uniform = uni == "uniform";
  for (const auto& x : require(j, "offending_points", "report")) r.offending.push_back(get_vector<3>(x, "offending point"));
  r.constant_fiber_dim = require(j, "constant_fiber_dim", "report").get<bool>();
  r.rank_ambiguities = require(j, "rank_ambiguities", "report").get<int>();
  r.homogeneity = require(j, "homogeneity", "report").get<std::string>();
  if (r.homogeneity != "homogeneous_evidence" && r.homogeneity != "obstructed" && r.homogeneity != "inconclusive" &&
      r.homogeneity != "n/a") {
    config_error("bad homogeneity verdict");
  }
  r.trivial_isotropy = require(j, "trivial_isotropy", "report").get<bool>();
  r.max_isotropy_dim = require(j, "max_isotropy_dim", "report").get<int>();
  if (!j.at("max_abs_R").is_null()) r.max_abs_R = get_number(j["max_abs_R"], "max_abs_R");
  if (!j.at("max_abs_T").is_null()) r.max_abs_T = get_number(j["max_abs_T"], "max_abs_T");
  if (!j.at("connection").is_null()) {
    const Json& c = j["connection"];
    ConnectionSummary cs;
    cs.max_abs_gamma = get_number(c.at("max_abs_gamma"), "connection.max_abs_gamma");
    cs.reference_point = get_vector<3>(c.at("reference_point"), "connection.reference_point");
    cs.gamma_at_reference = get_vector<27>(c.at("gamma_at_reference"), "connection.gamma_at_reference");
    cs.max_lift_residual = get_number(c.at("max_lift_residual"), "connection.max_lift_residual");
    r.connection = cs;
  }
  if (!j.at("membership_check").is_null()) {
    const Json& m = j["membership_check"];
    r.membership = MembershipCheck{get_number(m.at("max_defect"), "membership.max_defect"),
                                   get_number(m.at("tol"), "membership.tol"), m.at("passed").get<bool>()};
  }
  if (!j.at("chart").is_null()) {
    const Json& c = j["chart"];
    ChartSummary chs;
    chs.origin = get_vector<3>(c.at("origin"), "chart.origin");
    chs.max_abs_gamma_in_chart = get_number(c.at("max_abs_gamma_in_chart"), "chart.max_abs_gamma_in_chart");
    for (const auto& y : c.at("coords")) chs.coords.push_back(get_vector<3>(y, "chart coord"));
    r.chart = chs;
  }
  for (const auto& t : require(j, "trajectories", "report")) {
    TrajectoryDump d;
    d.direction = get_vector<3>(t.at("direction"), "trajectory.direction");
    for (const auto& rec : t.at("records")) {
      d.records.push_back(TrajectoryRecord{get_number(rec.at("t"), "record.t"), get_vector<3>(rec.at("y"), "record.y"),
                                           mat_from_json(rec.at("F"), "record.F")});
    }
    r.trajectories.push_back(std::move(d));
  }
  if (j.contains("timings")) {
    for (const auto& [name, secs] : j["timings"].items()) r.timings.emplace_back(name, get_number(secs, "timing"));
  }
  return r;
}

namespace {

std::string fmt_point(const Point3& x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << "(" << x(0) << ", " << x(1) << ", " << x(2) << ")";
  return os.str();
}

std::string fmt_sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

std::string emit_text(const AnalysisReport& r) {
  std::ostringstream os;
  os << "matgroupoid analysis report\n";
  os << "body: " << r.body_name << "\n";
  os << "grid: " << r.grid_shape[0] << " x " << r.grid_shape[1] << " x " << r.grid_shape[2] << " from "
     << fmt_point(r.grid_first) << " to " << fmt_point(r.grid_last) << "\n";
  os << "samples: " << r.sample_total << " (seed " << r.config.seed << ")\n";
  const auto& t = r.config.tol;
  os << "tolerances: rank_tol=" << fmt_sci(t.rank_tol) << " anchor_tol=" << fmt_sci(t.anchor_tol)
     << " flat_tol=" << fmt_sci(t.flat_tol) << " membership_tol_factor=" << fmt_sci(t.membership_tol_factor)
     << " fd_step=" << fmt_sci(t.fd_step) << " ode_step=" << fmt_sci(t.ode_step)
     << " transport_step=" << fmt_sci(t.transport_step) << " gap_warning_ratio=" << fmt_sci(t.gap_warning_ratio)
     << " point_tol=" << fmt_sci(kPointTol) << " det_tol=" << fmt_sci(kDetTol) << "\n";

  // Points are stored lexicographically in (x1, x2, x3); one table per x3 slice.
  const int n1 = r.grid_shape[0], n2 = r.grid_shape[1], n3 = r.grid_shape[2];
  for (int k = 0; k < n3 && static_cast<std::size_t>(n1 * n2 * n3) == r.points.size(); ++k) {
    const auto& first = r.points[static_cast<std::size_t>(k)];
    os << "\nslice x3 = " << std::fixed << std::setprecision(4) << first.x(2) << "\n";
    os << "        x1        x2  fiber  isotropy  anchor        gap\n";
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j) {
        const auto& p = r.points[static_cast<std::size_t>((i * n2 + j) * n3 + k)];
        os << std::fixed << std::setprecision(4) << std::setw(10) << p.x(0) << std::setw(10) << p.x(1)
           << std::setw(7) << p.fiber_dim << std::setw(10) << p.isotropy_dim << std::setw(8) << p.anchor_rank
           << std::setw(11) << (std::isfinite(p.gap_ratio) ? fmt_sci(p.gap_ratio) : std::string("inf"))
           << (p.rank_ambiguous ? "  ambiguous" : "") << "\n";
      }
  }
  os << "\n";
  os << "uniformity: " << (r.uniform ? "uniform" : "not_uniform") << "\n";
  os << "homogeneity: " << r.homogeneity << "\n";
  if (r.max_abs_R) os << "max|R| = " << fmt_sci(*r.max_abs_R) << "\n";
  if (r.max_abs_T) os << "max|T| = " << fmt_sci(*r.max_abs_T) << "\n";
  if (r.uniform) {
    os << "isotropy: " << (r.trivial_isotropy ? "trivial" : "nontrivial") << " (max dim " << r.max_isotropy_dim
       << ")\n";
  }
  if (!r.constant_fiber_dim) os << "warning: fiber dimension varies across the grid\n";
  if (r.rank_ambiguities > 0) os << "warning: " << r.rank_ambiguities << " point(s) with ambiguous rank cut\n";
  if (r.connection) {
    os << "connection: max|Gamma| = " << fmt_sci(r.connection->max_abs_gamma)
       << ", max lift residual = " << fmt_sci(r.connection->max_lift_residual) << "\n";
    os << "nonzero Gamma^k_ij at " << fmt_point(r.connection->reference_point) << ":";
    bool any = false;
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const double g = r.connection->gamma_at_reference(idx3(k, i, j));
          if (std::abs(g) > r.config.tol.flat_tol) {
            os << " G^" << k + 1 << "_" << i + 1 << j + 1 << "=" << std::fixed << std::setprecision(6) << g;
            any = true;
          }
        }
    os << (any ? "" : " none") << "\n";
  }
  if (r.membership) {
    os << "membership check: " << (r.membership->passed ? "passed" : "FAILED")
       << " (max defect " << fmt_sci(r.membership->max_defect) << ", tol " << fmt_sci(r.membership->tol) << ")\n";
  }
  if (r.chart) os << "homogeneous chart: max|Gamma'| = " << fmt_sci(r.chart->max_abs_gamma_in_chart) << "\n";
  if (!r.offending.empty()) {
    os << "offending points (anchor rank < 3):\n";
    for (const auto& x : r.offending) os << "  " << fmt_point(x) << "\n";
  }
  if (r.config.output.timings && !r.timings.empty()) {
    os << "timings:";
    for (const auto& [name, secs] : r.timings) os << " " << name << "=" << std::fixed << std::setprecision(3) << secs << "s";
    os << "\n";
  }
  return os.str();
}

}  // namespace

std::string emit_report(const AnalysisReport& r, ReportFormat format) {
  if (format == ReportFormat::Text) return emit_text(r);
  return report_to_json(r).dump(2) + "\n";
}

std::vector<TrajectoryRecord> run_flow(const AnalysisConfig& cfg, double t, const Point3& x) {
  validate(cfg);
  const Body body = make_body(cfg.body);
  if (!cfg.flow.project) {
    return exp_trajectory(SectionField::constant(AlgebroidElement::from_vector(cfg.flow.element), body.domain()), t, x,
                          cfg.tol.ode_step);
  }
  const Grid grid = Grid::interior(body.domain(), cfg.resolution, cfg.margin);
  const SampleSet samples = make_sample_set(cfg.sample_count, cfg.seed);
  const auto fibers = fibers_on_grid(body, grid, samples, cfg.tol.rank_tol, cfg.tol.fd_step);
  return exp_trajectory(section_from_projection(grid, fibers, cfg.flow.element), t, x, cfg.tol.ode_step);
}

std::string emit_trajectory(const std::vector<TrajectoryRecord>& records, ReportFormat format) {
  if (format == ReportFormat::Structured) {
    Json recs = Json::array();
    for (const auto& rec : records) recs.push_back(Json{{"t", rec.t}, {"y", vec_json(rec.y)}, {"F", mat_json(rec.F)}});
    return Json{{"format", "matgroupoid-trajectory"}, {"version", 1}, {"records", recs}}.dump(2) + "\n";
  }
  std::ostringstream os;
  os << std::scientific << std::setprecision(9);
  os << "# t y1 y2 y3 F11 F12 F13 F21 F22 F23 F31 F32 F33\n";
  for (const auto& rec : records) {
    os << rec.t;
    for (int i = 0; i < 3; ++i) os << " " << rec.y(i);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) os << " " << rec.F(i, j);
    os << "\n";
  }
  return os.str();
}

}  // namespace matgroupoid
