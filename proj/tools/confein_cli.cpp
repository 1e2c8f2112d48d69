// confein: command-line front-end over the C interface.
//
//   confein check --scenario thm2_flat --param R=1 --samples 200 [--report out.json]
//   confein check --config run.json
//   confein list [--json]
//   confein probe --builtin sphere --dim 2 --point 1.0,2.0
//   confein probe --config probe.json

#include "confein/confein.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

struct CString {
  char* p = nullptr;
  ~CString() { cfe_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text << '\n';
}

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::runtime_error("bad coordinate '" + item + "'");
    out.push_back(v);
  }
  return out;
}

struct CheckOptions {
  std::string config;
  std::string scenario;
  std::vector<std::string> params;
  std::size_t samples = 0;
  double margin = -1.0;
  long long seed = -1;
  double tol = 0.0;
  std::string report;
  bool verbose = false;
};

int run_check(const CheckOptions& o) {
  json cfg = o.config.empty() ? json::object() : read_json_file(o.config);
  if (!o.scenario.empty()) {
    cfg.erase("inline");
    cfg["scenario"] = o.scenario;
  }
  for (const std::string& kv : o.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw std::runtime_error("--param expects key=value, got '" + kv + "'");
    std::size_t used = 0;
    const std::string value = kv.substr(eq + 1);
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::runtime_error("--param value is not a number: '" + value + "'");
    cfg["params"][kv.substr(0, eq)] = v;
  }
  if (o.samples) cfg["samples"] = o.samples;
  if (o.margin >= 0.0) cfg["margin"] = o.margin;
  if (o.seed >= 0) cfg["seed"] = o.seed;
  if (o.tol > 0.0) cfg["tol"] = o.tol;
  if (!o.report.empty()) cfg["report"] = o.report;
  if (o.verbose) cfg["verbose"] = true;

  CString report, summary;
  int exit_code = 2;
  const cfe_status st = cfe_run_json(cfg.dump().c_str(), &report.p, &summary.p, &exit_code);
  if (st != CFE_OK) {
    std::cerr << cfe_last_error() << '\n';
    return 2;
  }
  if (exit_code == 2) {
    std::cerr << summary.str();
    return 2;
  }
  const std::string path = cfg.value("report", std::string());
  if (!path.empty()) {
    write_file(path, report.str());
    std::cout << summary.str();
  } else {
    std::cout << report.str() << '\n';
    std::cerr << summary.str();
  }
  return exit_code;
}

int run_list(bool as_json) {
  CString out;
  if (cfe_list_scenarios_json(&out.p) != CFE_OK) {
    std::cerr << cfe_last_error() << '\n';
    return 2;
  }
  if (as_json) {
    std::cout << out.str() << '\n';
    return 0;
  }
  for (const auto& s : nlohmann::ordered_json::parse(out.str())) {
    std::cout << s["name"].get<std::string>() << "  " << s["summary"].get<std::string>() << '\n';
    for (const auto& p : s["params"]) {
      std::cout << "    " << p["name"].get<std::string>() << " = "
                << (p["default"].is_null() ? std::string("auto") : p["default"].dump()) << "  "
                << p["description"].get<std::string>() << '\n';
    }
    std::cout << "    expects:";
    for (const auto& [check, verdict] : s["expected"].items()) {
      std::cout << ' ' << check << '=' << verdict.get<std::string>();
    }
    std::cout << '\n';
  }
  return 0;
}

struct ProbeOptions {
  std::string config;
  std::string builtin;
  std::size_t dim = 0;
  double scale = 1.0;
  std::string point;
};

int run_probe(const ProbeOptions& o) {
  json cfg;
  if (!o.config.empty()) {
    cfg = read_json_file(o.config);
  } else {
    if (o.builtin.empty()) throw std::runtime_error("probe needs --config or --builtin");
    cfg["metric"] = {{"builtin", o.builtin}, {"dim", o.dim}, {"scale", o.scale}};
  }
  if (!o.point.empty()) cfg["point"] = parse_point(o.point);
  CString out;
  if (cfe_probe_json(cfg.dump().c_str(), &out.p) != CFE_OK) {
    std::cerr << cfe_last_error() << '\n';
    return 2;
  }
  std::cout << out.str() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal-Einstein product verification engine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cfe_version()));

  CheckOptions check;
  auto* c = app.add_subcommand("check", "run a scenario or config and report verdicts");
  c->add_option("--config", check.config, "JSON run config");
  c->add_option("--scenario", check.scenario, "registered scenario name");
  c->add_option("--param", check.params, "scenario parameter key=value (repeatable)");
  c->add_option("--samples", check.samples, "sample count");
  c->add_option("--margin", check.margin, "margin from chart boundaries");
  c->add_option("--seed", check.seed, "sampling seed");
  c->add_option("--tol", check.tol, "equality tolerance");
  c->add_option("--report", check.report, "write the JSON report to PATH");
  c->add_flag("--verbose", check.verbose, "print every residual report");

  bool list_json = false;
  auto* l = app.add_subcommand("list", "list registered scenarios");
  l->add_flag("--json", list_json, "machine-readable output");

  ProbeOptions probe;
  auto* p = app.add_subcommand("probe", "print curvature of a metric at a point");
  p->add_option("--config", probe.config, "JSON with 'metric' and 'point'");
  p->add_option("--builtin", probe.builtin, "euclidean, sphere or hyperbolic");
  p->add_option("--dim", probe.dim, "dimension of the built-in metric");
  p->add_option("--scale", probe.scale, "radius or curvature scale");
  p->add_option("--point", probe.point, "comma-separated coordinates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c) {
      if (check.config.empty() && check.scenario.empty()) {
        std::cerr << "check needs --scenario or --config\n";
        return 2;
      }
      return run_check(check);
    }
    if (*l) return run_list(list_json);
    return run_probe(probe);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
