#include <CLI11.hpp>

#include "valfun/cli.hpp"
#include "valfun/errors.hpp"

#include <fstream>
#include <iostream>

using namespace valfun;

int main(int argc, char** argv) {
  CLI::App app{"Generalized derivatives of optimal value functions"};
  app.require_subcommand(1, 1);

  std::string problem, xbar, xund, xstar, case_hint, flavor = "M", json_path;
  std::vector<std::string> points;
  int branch_cap = Tolerances{}.branch_cap;
  double tol_act = Tolerances{}.act, tol_kkt = Tolerances{}.kkt;
  bool rational = false, no_oracle = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--problem", problem, "Problem file (JSON)")->required();
    sub->add_option("--point", points, "Named point from the problem file (repeatable)");
    sub->add_option("--xbar", xbar, "Parameter point, comma separated");
    sub->add_option("--xund", xund, "Element of the first-order estimate, comma separated");
    sub->add_option("--xstar", xstar, "Test covector, comma separated");
    sub->add_option("--case", case_hint, "auto, unperturbed, single-single, single-S, single-lambda, lp-lhs, lp-lhs-rhs");
    sub->add_option("--flavor", flavor, "Branch family flavor")->check(CLI::IsMember({"M", "C"}));
    sub->add_option("--branch-cap", branch_cap, "Largest biactive set enumerated with M-type branches");
    sub->add_flag("--rational", rational, "Exact arithmetic on the LP vertex path");
    sub->add_option("--json", json_path, "Write the JSON report to this path ('-' for stdout)");
    sub->add_option("--tol-act", tol_act, "Activity tolerance");
    sub->add_option("--tol-kkt", tol_kkt, "KKT residual tolerance");
    sub->add_flag("--no-oracle", no_oracle, "Skip finite-difference checks in report");
  };
  for (const char* name : {"analyze", "first-order", "hessian", "verify", "report"}) common(app.add_subcommand(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  RunConfig cfg;
  cfg.command = app.get_subcommands().front()->get_name();
  cfg.problem_path = problem;
  cfg.points = points;
  cfg.case_hint = case_hint;
  cfg.flavor = flavor == "C" ? Flavor::C : Flavor::M;
  cfg.tol.branch_cap = branch_cap;
  cfg.tol.rational = rational;
  cfg.tol.act = tol_act;
  cfg.tol.kkt = tol_kkt;
  cfg.oracle = !no_oracle;
  cfg.json_path = json_path;
  try {
    if (!xbar.empty()) cfg.xbar = parse_csv(xbar);
    if (!xund.empty()) cfg.xund = parse_csv(xund);
    if (!xstar.empty()) cfg.xstar = parse_csv(xstar);
    if (!case_hint.empty()) parse_case(case_hint);
  } catch (const UsageError& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kExitUsage;
  }

  RunResult r = run(cfg);
  const std::string dumped = r.report.dump(2) + "\n";
  if (json_path == "-") {
    std::cout << dumped;
  } else {
    std::cout << r.text;
    if (!json_path.empty()) {
      std::ofstream out(json_path, std::ios::binary);
      if (!out) {
        std::cerr << "cannot write " << json_path << "\n";
        return kExitUsage;
      }
      out << dumped;
    }
  }
  if (r.exit_code == kExitUsage && json_path != "-") std::cerr << r.text;
  return r.exit_code;
}
