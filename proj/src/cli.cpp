#include "valfun/cli.hpp"

#include "valfun/errors.hpp"
#include "valfun/oracle.hpp"
#include "valfun/report.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace valfun {

using nlohmann::json;

Vec parse_csv(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("'" + text + "' is not a comma-separated list of numbers");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos)
      throw UsageError("'" + text + "' is not a comma-separated list of numbers");
    vals.push_back(v);
  }
  if (vals.empty()) throw UsageError("empty number list");
  return to_vec(vals);
}

namespace {

struct Query {
  std::string name;
  Vec xbar;
  std::vector<Vec> pinned;
  std::optional<Vec> xund, xstar;
  std::string hint;
};

struct Outcome {
  json j;
  int code = kExitOk;
  std::string text;
};

void check_dim(const Vec& v, int n, const std::string& what) {
  if (v.size() != n) throw UsageError(what + " has " + std::to_string(v.size()) + " entries, expected " + std::to_string(n));
}

std::vector<Query> queries(const ParametricProblem& P, const RunConfig& cfg) {
  std::vector<Query> out;
  if (cfg.xbar && !cfg.points.empty()) throw UsageError("give either --point or --xbar, not both");
  if (cfg.xbar) {
    check_dim(*cfg.xbar, P.n(), "--xbar");
    out.push_back({"cli", *cfg.xbar, {}, std::nullopt, std::nullopt, ""});
  } else {
    std::vector<std::string> names = cfg.points;
    if (names.empty())
      for (const auto& [name, pt] : P.points) names.push_back(name);
    if (names.empty()) throw UsageError("no query point: pass --xbar or --point, or add points to the problem file");
    for (const auto& name : names) {
      auto it = P.points.find(name);
      if (it == P.points.end()) throw UsageError("point '" + name + "' is not defined in the problem file");
      const NamedPoint& pt = it->second;
      out.push_back({name, pt.x, pt.minimizers, pt.xund, pt.xstar, pt.case_hint});
    }
  }
  for (auto& q : out) {
    if (cfg.xund) q.xund = cfg.xund;
    if (cfg.xstar) q.xstar = cfg.xstar;
    if (q.xund) check_dim(*q.xund, P.n(), "xund");
    if (q.xstar) check_dim(*q.xstar, P.n(), "xstar");
  }
  return out;
}

SolveOptions solve_options(const Query& q) {
  SolveOptions s;
  s.pinned = q.pinned;
  return s;
}

std::string log_text(const HypothesisLog& log) {
  std::string out;
  for (const auto& h : log.entries())
    out += std::string("  [") + to_string(h.status) + "] " + h.name + (h.detail.empty() ? "" : ": " + h.detail) + "\n";
  return out;
}

std::string index_list(const std::vector<int>& idx) {
  std::string s = "{";
  for (std::size_t k = 0; k < idx.size(); ++k) s += (k ? "," : "") + std::to_string(idx[k] + 1);
  return s + "}";
}

Outcome analyze_one(const ParametricProblem& P, const Query& q, const RunConfig& cfg) {
  Outcome o;
  SolveResult S = solve_value(P, q.xbar, cfg.tol, solve_options(q));
  std::ostringstream t;
  t << "  phi = " << format_double(S.value) << (S.exact_value.empty() ? "" : " (exact " + S.exact_value + ")")
    << ", certificate " << to_string(S.certificate) << "\n";
  json ys = json::array();
  for (const auto& y : S.minimizers) {
    json yj = {{"y", to_json(y)}};
    LicqReport licq = check_licq(P, q.xbar, y, cfg.tol);
    MfcqReport mfcq = check_mfcq(P, q.xbar, y, cfg.tol);
    MultiplierPolyhedron M = multipliers(P, q.xbar, y, cfg.tol);
    std::vector<int> act = active_set(P, q.xbar, y, cfg.tol);
    json us = json::array();
    for (const auto& u : M.vertices) us.push_back(to_json(u));
    yj["active"] = json::array();
    for (int i : act) yj["active"].push_back(i + 1);
    yj["licq"] = licq.holds;
    yj["mfcq"] = mfcq.holds;
    if (!mfcq.holds) yj["mfcq_witness"] = to_json(mfcq.witness);
    yj["multiplier_vertices"] = us;
    yj["multipliers_bounded"] = M.bounded;
    t << "  y = " << format_vec(y) << "  active " << index_list(act) << "  LICQ " << (licq.holds ? "yes" : "no")
      << "  MFCQ " << (mfcq.holds ? "yes" : "no") << "  multiplier vertices " << M.vertices.size() << "\n";
    if (!M.vertices.empty()) {
      KktPoint K = make_kkt_point(P, q.xbar, y, M.vertices.front(), cfg.tol);
      yj["partition"] = to_json(K.part);
      t << "    eta " << index_list(K.part.eta) << "  theta " << index_list(K.part.theta) << "  nu "
        << index_list(K.part.nu) << "\n";
      try {
        CqLambdaReport cq = check_cq_lambda(K, cfg.tol);
        yj["cq_lambda"] = cq.cq;
        yj["lipschitz_like_lambda"] = cq.holala;
        t << "    CQ for the multiplier map " << (cq.cq ? "holds" : "fails") << ", Lipschitz-like "
          << (cq.holala ? "yes" : "no") << "\n";
      } catch (const HypothesisError&) {
        throw;
      } catch (const Error& e) {
        yj["cq_lambda_error"] = e.what();
      }
    }
    ys.push_back(yj);
  }
  o.j = {{"solve", to_json(S)}, {"minimizers", ys}, {"warnings", P.warnings()}};
  o.text = t.str();
  return o;
}

Outcome first_order_one(const ParametricProblem& P, const Query& q, const RunConfig& cfg) {
  Outcome o;
  SolveResult S = solve_value(P, q.xbar, cfg.tol, solve_options(q));
  SubdiffEstimate E = first_order(P, q.xbar, S, cfg.tol);
  o.j = to_json(E);
  std::ostringstream t;
  t << "  formula " << to_string(E.formula) << (E.hull ? ", convex hull" : ", union")
    << (E.inclusion_only ? ", inclusion only" : "") << "\n";
  for (const auto& g : E.generators) t << "  generator " << format_vec(g.value) << " at y = " << format_vec(g.y) << "\n";
  t << log_text(E.log);
  o.text = t.str();
  if (prune_empty(E.set).empty()) o.code = kExitEmpty;
  return o;
}

struct HessianRun {
  HessianQuery hq;
  HessianEstimate E;
  HessianOptions opt;
};

HessianRun run_hessian(const ParametricProblem& P, const Query& q, const RunConfig& cfg) {
  HessianRun r;
  r.opt.tol = cfg.tol;
  r.opt.flavor = cfg.flavor;
  r.opt.solve = solve_options(q);
  if (!q.xstar) throw UsageError("missing xstar for point '" + q.name + "' (pass --xstar)");
  Vec xund;
  if (q.xund) {
    xund = *q.xund;
  } else {
    SolveResult S = solve_value(P, q.xbar, cfg.tol, r.opt.solve);
    SubdiffEstimate F = first_order(P, q.xbar, S, cfg.tol);
    auto v = singleton_value(F.set, cfg.tol.singleton);
    if (!v) throw UsageError("the first-order estimate at point '" + q.name + "' is not a singleton; pass --xund");
    xund = *v;
  }
  const std::string hint = cfg.case_hint.empty() ? q.hint : cfg.case_hint;
  r.hq = {q.xbar, xund, *q.xstar, hint.empty() ? HessianCase::Auto : parse_case(hint)};
  r.E = estimate_hessian(P, r.hq, r.opt);
  return r;
}

json query_json(const HessianQuery& hq) {
  return {{"xbar", to_json(hq.xbar)}, {"xund", to_json(hq.xund)}, {"xstar", to_json(hq.xstar)},
          {"case", to_string(hq.hint)}};
}

Outcome hessian_one(const ParametricProblem& P, const Query& q, const RunConfig& cfg) {
  Outcome o;
  HessianRun r = run_hessian(P, q, cfg);
  o.j = to_json(r.E);
  o.j["query"] = query_json(r.hq);
  std::ostringstream t;
  t << "  xund = " << format_vec(r.hq.xund) << "  xstar = " << format_vec(r.hq.xstar) << "\n";
  t << "  theorem " << r.E.theorem << (r.E.equality ? ", equality" : ", inclusion")
    << (r.E.approximate ? ", approximate" : "") << "\n";
  if (r.E.collapse) t << "  collapse " << format_vec(*r.E.collapse) << "\n";
  t << describe(r.E.result) << log_text(r.E.log);
  for (const auto& n : r.E.notes) t << "  note: " << n << "\n";
  o.text = t.str();
  if (prune_empty(r.E.result).empty()) o.code = kExitEmpty;
  return o;
}

json check(const std::string& name, const std::string& status, const std::string& detail) {
  return {{"check", name}, {"status", status}, {"detail", detail}};
}

Outcome verify_one(const ParametricProblem& P, const Query& q, const RunConfig& cfg) {
  Outcome o;
  HessianRun r = run_hessian(P, q, cfg);
  o.j = to_json(r.E);
  o.j["query"] = query_json(r.hq);
  json checks = json::array();
  FdOptions fo{cfg.tol, r.opt.solve};
  FdReport fd = fd_hessian(P, q.xbar, 1e-3, fo);
  o.j["fd"] = to_json(fd);
  Vec hv = fd.hessian * r.hq.xstar;
  if (!fd.stable) {
    checks.push_back(check("fd-inclusion", "skipped", "finite-difference Hessian unstable under step halving"));
  } else {
    MemberResult m = member(hv, r.E.result, 1e-3);
    checks.push_back(check("fd-inclusion", m.verdict == Membership::Outside ? "fail" : "pass",
                           "H_fd xstar = " + format_vec(hv) + ", distance " + format_double(m.distance)));
  }
  if (r.E.collapse) {
    if (!fd.stable) {
      checks.push_back(check("collapse", "skipped", "finite-difference Hessian unstable"));
    } else {
      double err = (*r.E.collapse - hv).lpNorm<Eigen::Infinity>();
      checks.push_back(check("collapse", err <= 1e-4 ? "pass" : "fail", "error " + format_double(err)));
    }
  }
  SolveResult S = solve_value(P, q.xbar, cfg.tol, r.opt.solve);
  SubdiffEstimate F = first_order(P, q.xbar, S, cfg.tol);
  auto g = singleton_value(F.set, cfg.tol.singleton);
  if (g && fd.stable) {
    double err = (fd.gradient - *g).lpNorm<Eigen::Infinity>();
    checks.push_back(check("fd-gradient", err <= 5e-4 ? "pass" : "fail", "error " + format_double(err)));
  } else {
    checks.push_back(check("fd-gradient", "skipped", g ? "value function not smooth here" : "set-valued estimate"));
  }
  if (P.affine_in_y() && P.m() <= 8) {
    try {
      LpOracleResult lo = lp_value_oracle(P, q.xbar);
      Tolerances exact = cfg.tol;
      exact.rational = true;
      SolveResult SE = solve_value(P, q.xbar, exact);
      const std::string ov = lo.value.get_str();
      checks.push_back(check("lp-value", SE.exact_value == ov ? "pass" : "fail",
                             "oracle " + ov + ", solver " + SE.exact_value));
    } catch (const HypothesisError& e) {
      checks.push_back(check("lp-value", "skipped", e.what()));
    }
  }
  o.j["checks"] = checks;
  std::ostringstream t;
  t << "  theorem " << r.E.theorem << "\n";
  for (const auto& c : checks)
    t << "  " << c["check"].get<std::string>() << ": " << c["status"].get<std::string>() << " ("
      << c["detail"].get<std::string>() << ")\n";
  o.text = t.str();
  for (const auto& c : checks)
    if (c["status"] == "fail") o.code = kExitEmpty;
  if (prune_empty(r.E.result).empty()) o.code = kExitEmpty;
  return o;
}

Outcome report_one(const ParametricProblem& P, const Query& q, const RunConfig& cfg) {
  Outcome o;
  Outcome a = analyze_one(P, q, cfg);
  Outcome f = first_order_one(P, q, cfg);
  o.j = {{"analyze", a.j}, {"first_order", f.j}};
  o.text = a.text + f.text;
  o.code = f.code;
  if (q.xstar) {
    Outcome h = cfg.oracle ? verify_one(P, q, cfg) : hessian_one(P, q, cfg);
    o.j["hessian"] = h.j;
    o.text += h.text;
    o.code = std::max(o.code, h.code);
  }
  return o;
}

int severity(int code) {
  switch (code) {
    case kExitOk: return 0;
    case kExitEmpty: return 1;
    case kExitHypothesis: return 2;
    default: return 3;
  }
}

using OneFn = std::function<Outcome(const ParametricProblem&, const Query&, const RunConfig&)>;

RunResult run_points(const RunConfig& cfg, const OneFn& fn) {
  if (cfg.problem_path.empty()) throw UsageError("--problem is required");
  ParametricProblem P = load_problem(cfg.problem_path);
  RunResult out;
  json results = json::array();
  std::ostringstream text;
  text << cfg.command << ": " << (P.name.empty() ? cfg.problem_path : P.name) << " (n=" << P.n() << ", m=" << P.m()
       << ", p=" << P.p() << ")\n";
  for (const auto& q : queries(P, cfg)) {
    Outcome o;
    json head = {{"point", q.name}, {"x", to_json(q.xbar)}};
    try {
      o = fn(P, q, cfg);
      head["status"] = o.code == kExitOk ? "ok" : "diagnostic";
    } catch (const HypothesisError& e) {
      o.code = kExitHypothesis;
      o.j = json::object();
      head["status"] = "hypothesis-failure";
      head["hypothesis"] = e.hypothesis();
      head["message"] = e.what();
      o.text = std::string("  hypothesis failure: ") + e.what() + "\n";
    } catch (const UsageError&) {
      throw;
    } catch (const Error& e) {
      o.code = kExitEmpty;
      o.j = json::object();
      head["status"] = "error";
      head["message"] = e.what();
      o.text = std::string("  error: ") + e.what() + "\n";
    }
    head.update(o.j);
    results.push_back(head);
    text << "point " << q.name << "  x = " << format_vec(q.xbar) << "\n" << o.text;
    if (severity(o.code) > severity(out.exit_code)) out.exit_code = o.code;
  }
  out.report = {{"schema", kSchema},
                {"command", cfg.command},
                {"problem", {{"path", cfg.problem_path}, {"name", P.name}, {"n", P.n()}, {"m", P.m()}, {"p", P.p()}}},
                {"settings",
                 {{"flavor", to_string(cfg.flavor)},
                  {"case", cfg.case_hint.empty() ? "auto" : cfg.case_hint},
                  {"oracle", cfg.oracle},
                  {"tolerances", to_json(cfg.tol)}}},
                {"results", results},
                {"exit_code", out.exit_code}};
  out.text = text.str();
  return out;
}

}  // namespace

RunResult cmd_analyze(const RunConfig& cfg) { return run_points(cfg, analyze_one); }
RunResult cmd_first_order(const RunConfig& cfg) { return run_points(cfg, first_order_one); }
RunResult cmd_hessian(const RunConfig& cfg) { return run_points(cfg, hessian_one); }
RunResult cmd_verify(const RunConfig& cfg) { return run_points(cfg, verify_one); }
RunResult cmd_report(const RunConfig& cfg) { return run_points(cfg, report_one); }

RunResult run(const RunConfig& cfg) {
  auto failure = [&](int code, const std::string& kind, const std::string& message) {
    RunResult r;
    r.exit_code = code;
    r.report = {{"schema", kSchema}, {"command", cfg.command}, {"error", {{"kind", kind}, {"message", message}}},
                {"exit_code", code}};
    r.text = kind + ": " + message + "\n";
    return r;
  };
  try {
    if (cfg.command == "analyze") return cmd_analyze(cfg);
    if (cfg.command == "first-order") return cmd_first_order(cfg);
    if (cfg.command == "hessian") return cmd_hessian(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg);
    if (cfg.command == "report") return cmd_report(cfg);
    throw UsageError("unknown command '" + cfg.command + "'");
  } catch (const UsageError& e) {
    return failure(kExitUsage, "usage", e.what());
  } catch (const ParseError& e) {
    return failure(kExitUsage, "problem file", e.what());
  } catch (const HypothesisError& e) {
    return failure(kExitHypothesis, "hypothesis", e.what());
  } catch (const Error& e) {
    return failure(kExitUsage, "problem file", e.what());
  } catch (const nlohmann::json::exception& e) {
    return failure(kExitUsage, "problem file", e.what());
  }
}

}  // namespace valfun
