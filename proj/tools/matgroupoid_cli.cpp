// Command-line front end: analyze a body, list built-ins, dump a flow.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "matgroupoid/analysis.hpp"
#include "matgroupoid/errors.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

matgroupoid::ReportFormat parse_format(const std::string& s) {
  return s == "structured" ? matgroupoid::ReportFormat::Structured : matgroupoid::ReportFormat::Text;
}

int write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return kExitOk;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write '" << out_path << "'\n";
    return kExitConfig;
  }
  out << text;
  return kExitOk;
}

matgroupoid::Point3 parse_point(const std::string& s) {
  std::stringstream ss(s);
  std::string item;
  matgroupoid::Point3 x;
  int n = 0;
  while (std::getline(ss, item, ',')) {
    if (n >= 3) break;
    try {
      std::size_t used = 0;
      x(n) = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw matgroupoid::Error(matgroupoid::ErrorKind::ConfigInvalid, "--x must be three comma-separated numbers");
    }
    ++n;
  }
  if (n != 3 || std::getline(ss, item, ',')) {
    throw matgroupoid::Error(matgroupoid::ErrorKind::ConfigInvalid, "--x must be three comma-separated numbers");
  }
  return x;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uniformity and homogeneity analysis of simple elastic bodies"};
  app.require_subcommand(1);

  std::string config_path, format = "text", out_path;
  auto* analyze = app.add_subcommand("analyze", "Run the uniformity/homogeneity pipeline");
  analyze->add_option("--config", config_path, "Config file (JSON)")->required();
  analyze->add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "structured"}));
  analyze->add_option("--out", out_path, "Write the report here instead of stdout");

  app.add_subcommand("bodies", "List built-in bodies");

  std::string flow_config, flow_format = "text", flow_out, flow_x;
  double flow_t = 0.0;
  auto* flow = app.add_subcommand("flow", "Dump one exponential trajectory of the configured section");
  flow->add_option("--config", flow_config, "Config file (JSON)")->required();
  flow->add_option("--t", flow_t, "Flow time")->required();
  flow->add_option("--x", flow_x, "Start point x1,x2,x3")->required();
  flow->add_option("--format", flow_format, "Output format")->check(CLI::IsMember({"text", "structured"}));
  flow->add_option("--out", flow_out, "Write the trajectory here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (analyze->parsed()) {
      const auto cfg = matgroupoid::load_config(config_path);
      const auto report = matgroupoid::run_analysis(cfg);
      return write_output(matgroupoid::emit_report(report, parse_format(format)), out_path);
    }
    if (flow->parsed()) {
      const auto cfg = matgroupoid::load_config(flow_config);
      const auto x = parse_point(flow_x);
      const auto records = matgroupoid::run_flow(cfg, flow_t, x);
      return write_output(matgroupoid::emit_trajectory(records, parse_format(flow_format)), flow_out);
    }
    for (auto kind : matgroupoid::all_builtins()) {
      std::cout << matgroupoid::builtin_name(kind) << "\t" << matgroupoid::builtin_description(kind) << "\n";
    }
    return kExitOk;
  } catch (const matgroupoid::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == matgroupoid::ErrorKind::ConfigInvalid ? kExitConfig : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
