#include "valfun/hessian.hpp"

#include "valfun/errors.hpp"
#include "valfun/hull.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace valfun {

Sensitivity sensitivity_system(const ParametricProblem& P, const KktPoint& kkt, const Tolerances& tol) {
  const int m = P.m(), p = P.p();
  LicqReport licq = check_licq(P, kkt.x, kkt.y, tol);
  if (!licq.holds)
    throw HypothesisError("LICQ", "active gradients have rank " + std::to_string(licq.rank) + " < " +
                                      std::to_string(licq.active.size()));
  if (!kkt.part.theta.empty()) {
    std::string idx;
    for (int i : kkt.part.theta) idx += (idx.empty() ? "g" : ", g") + std::to_string(i + 1);
    throw HypothesisError("strict complementarity", "biactive constraints " + idx);
  }
  const LagrangianEval& ev = kkt.ev;
  Mat K = Mat::Zero(m + p, m + p);
  K.topLeftCorner(m, m) = ev.hyy;
  if (p > 0) {
    K.topRightCorner(m, p) = ev.gy.transpose();
    K.bottomLeftCorner(p, m) = ev.u.asDiagonal() * ev.gy;
    K.bottomRightCorner(p, p) = ev.g.asDiagonal();
  }
  Mat rhs(m + p, P.n());
  rhs.topRows(m) = -ev.hxy;
  if (p > 0) rhs.bottomRows(p) = -(ev.u.asDiagonal() * ev.gx);
  Sensitivity s;
  s.condition = condition_number(K);
  if (!(s.condition < 1e10))
    throw HypothesisError("nondegeneracy", "sensitivity matrix condition number " + format_double(s.condition));
  Mat X = K.colPivHouseholderQr().solve(rhs);
  s.residual = (K * X - rhs).lpNorm<Eigen::Infinity>() / (1.0 + rhs.lpNorm<Eigen::Infinity>());
  if (!(s.residual < 1e-9))
    throw HypothesisError("nondegeneracy", "sensitivity residual " + format_double(s.residual));
  s.ds = X.topRows(m);
  s.du = X.bottomRows(p);
  return s;
}

const char* to_string(HessianCase c) {
  switch (c) {
    case HessianCase::Auto: return "auto";
    case HessianCase::Unperturbed: return "unperturbed";
    case HessianCase::SingleSingle: return "single-single";
    case HessianCase::SingleS: return "single-S";
    case HessianCase::SingleLambda: return "single-lambda";
    case HessianCase::LpLhs: return "lp-lhs";
    case HessianCase::LpLhsRhs: return "lp-lhs-rhs";
  }
  return "?";
}

HessianCase parse_case(const std::string& text) {
  for (HessianCase c : {HessianCase::Auto, HessianCase::Unperturbed, HessianCase::SingleSingle, HessianCase::SingleS,
                        HessianCase::SingleLambda, HessianCase::LpLhs, HessianCase::LpLhsRhs})
    if (text == to_string(c)) return c;
  throw UsageError("unknown case '" + text +
                   "' (expected auto, unperturbed, single-single, single-S, single-lambda, lp-lhs or lp-lhs-rhs)");
}

const char* to_string(SMode m) {
  switch (m) {
    case SMode::Single: return "single";
    case SMode::Multi: return "multi";
    case SMode::Caratheodory: return "caratheodory";
  }
  return "?";
}

namespace {

double scaled(const Vec& v) { return 1.0 + v.lpNorm<Eigen::Infinity>(); }

bool close(const Vec& a, const Vec& b, double tol) {
  return (a - b).lpNorm<Eigen::Infinity>() <= tol * std::max(scaled(a), scaled(b));
}

// Every point of S(xbar) the estimates look at: minimizers and face vertices.
std::vector<Vec> candidate_points(const SolveResult& S) {
  std::vector<Vec> ys = S.minimizers;
  for (const auto& v : S.face) {
    bool dup = false;
    for (const auto& y : ys) dup = dup || (y - v).lpNorm<Eigen::Infinity>() <= 1e-12;
    if (!dup) ys.push_back(v);
  }
  return ys;
}

Vec zero_u(const ParametricProblem& P) { return Vec::Zero(P.p()); }

std::optional<Vec> unique_multiplier(const ParametricProblem& P, const Vec& x, const Vec& y, const Tolerances& tol) {
  MultiplierPolyhedron M = multipliers(P, x, y, tol);
  if (!M.singleton()) return std::nullopt;
  return M.vertices.front();
}

SolveOptions unpinned(const SolveOptions& s) {
  SolveOptions o = s;
  o.pinned.clear();
  return o;
}

void log_enumeration(HessianEstimate& E, const SolveResult& S) {
  E.log.add("S(xbar) enumerated", S.certificate == Certificate::Heuristic ? Verdict::Asserted : Verdict::Verified,
            to_string(S.certificate));
  if (S.certificate == Certificate::Heuristic) E.notes.push_back("under-enumeration-possible");
}

struct SolutionMap {
  Relation R;
  std::optional<Sensitivity> sens;
};

// The best available estimate of D*S(xbar|y), i.e. of the scalarized
// subdifferential of s when S is single-valued.
SolutionMap solution_relation(const ParametricProblem& P, const Vec& xbar, const Vec& y, const SolveResult& S,
                              const HessianOptions& opt, HypothesisLog& log, std::vector<std::string>& notes) {
  const Tolerances& tol = opt.tol;
  SolutionMap out;
  std::optional<Sensitivity> sens;
  std::optional<Vec> u;
  std::string sens_failure;
  try {
    if (!check_licq(P, xbar, y, tol).holds) throw HypothesisError("LICQ", "fails at y = " + format_vec(y));
    u = unique_multiplier(P, xbar, y, tol);
    if (!u) throw HypothesisError("KKT", "no unique multiplier at y = " + format_vec(y));
    sens = sensitivity_system(P, make_kkt_point(P, xbar, y, *u, tol), tol);
  } catch (const HypothesisError& e) {
    sens_failure = e.what();
  }
  if (sens && S.singleton) {
    out.R = jacobian_relation(sens->ds);
    out.sens = sens;
    log.add("differentiable s", Verdict::Verified,
            "sensitivity system, condition " + format_double(sens->condition));
    return out;
  }
  if (!sens_failure.empty()) log.add("differentiable s", Verdict::Failed, sens_failure);
  if (P.convex_in_y() != Verdict::Failed) {
    try {
      out.R = coderivative_S_relation(P, xbar, y, opt.flavor, tol);
      log.append(out.R.log);
      for (const auto& n : out.R.notes) notes.push_back(n);
      return out;
    } catch (const HypothesisError& e) {
      log.add("multiplier-branch coderivative of S", Verdict::Failed, e.what());
    }
  }
  if (sens && !S.singleton) {
    // y is an isolated, nondegenerate minimizer: its branch s_y is smooth and
    // selected where f(x, s_y(x)) is minimal among the branches.
    std::vector<Vec> normals;
    bool degenerate = false;
    const Vec gy = P.lagrangian_grad_x(xbar, y, *u);
    for (const auto& z : candidate_points(S)) {
      if ((z - y).lpNorm<Eigen::Infinity>() <= tol.singleton) continue;
      std::optional<Vec> uz = unique_multiplier(P, xbar, z, tol);
      if (!uz) {
        degenerate = true;
        continue;
      }
      Vec d = gy - P.lagrangian_grad_x(xbar, z, *uz);
      if (d.lpNorm<Eigen::Infinity>() <= 1e-9 * scaled(gy))
        degenerate = true;
      else
        normals.push_back(d);
    }
    out.R = region_relation(sens->ds, normals);
    out.sens = sens;
    log.add("differentiable branch of S at y", Verdict::Verified, "y = " + format_vec(y));
    log.add("selection region of the branch", degenerate ? Verdict::Asserted : Verdict::Verified,
            degenerate ? "competing branch with equal gradient; region not determined to first order"
                       : std::to_string(normals.size()) + " region normal(s)");
    if (degenerate) out.R.approximate = true;
    return out;
  }
  throw HypothesisError("coderivative of S", "no applicable estimate at y = " + format_vec(y));
}

// Jacobians of s sampled around xbar by central differences.
std::vector<Mat> clarke_jacobians(const ParametricProblem& P, const Vec& xbar, const HessianOptions& opt) {
  const int n = P.n();
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> N(0.0, 1.0);
  const double radius = 1e-3, h = 1e-6;
  SolveOptions so = unpinned(opt.solve);
  auto s_at = [&](const Vec& x) -> Vec {
    SolveResult r = solve_value(P, x, opt.tol, so);
    if (!r.singleton || r.minimizers.size() != 1) throw HypothesisError("S single-valued", "lost near " + format_vec(x));
    return r.minimizers.front();
  };
  std::vector<Mat> out;
  for (int k = 0; k < 6 * n + 2; ++k) {
    Vec d(n);
    for (int j = 0; j < n; ++j) d(j) = N(rng);
    Vec x = xbar + radius * d / d.norm();
    Mat J(P.m(), n);
    for (int j = 0; j < n; ++j) {
      Vec e = Vec::Zero(n);
      e(j) = h;
      J.col(j) = (s_at(x + e) - s_at(x - e)) / (2 * h);
    }
    bool dup = false;
    for (const auto& M : out) dup = dup || (M - J).lpNorm<Eigen::Infinity>() <= 1e-3;
    if (!dup) out.push_back(J);
  }
  return out;
}

// y in S(xbar) selected by grad_x f(xbar, y) = xund. Adds one point of the
// selection set inside an LP optimal face.
std::vector<Vec> select_unperturbed(const ParametricProblem& P, const Vec& xbar, const SolveResult& S, const Vec& xund,
                                    HessianEstimate& E) {
  std::vector<Vec> out;
  for (const auto& y : candidate_points(S))
    if (close(P.fx(xbar, y), xund, 1e-6)) out.push_back(y);
  if (!S.face.empty() && P.affine_in_y()) {
    const int m = P.m();
    Polyhedron F = feasible_polyhedron(P, xbar);
    Vec y0 = Vec::Zero(m);
    LagrangianEval ev = differentiate(P, xbar, y0, zero_u(P));
    F.add_eq(ev.fy, S.value - ev.f);
    F.add_eq(ev.hyx, xund - ev.fx);
    Vec acc = Vec::Zero(m);
    int hits = 0;
    for (int j = 0; j < m; ++j)
      for (double sg : {1.0, -1.0}) {
        Vec c = Vec::Zero(m);
        c(j) = sg;
        if (auto z = argmax(F, c)) {
          acc += *z;
          ++hits;
        }
      }
    if (hits > 0) {
      Vec mid = acc / hits;
      bool dup = false;
      for (const auto& y : out) dup = dup || (y - mid).lpNorm<Eigen::Infinity>() <= 1e-9;
      if (!dup) out.push_back(mid);
      E.log.add("selection inside the optimal face", Verdict::Asserted,
                "evaluated at the face's selected vertices and one relative-interior point");
    }
  }
  return out;
}

// (QCDUAL) piecewise: no nonzero (a*, b*) in the D*Lambda(0) estimate with
// 0 in a* + R(b*).
std::optional<Vec> qcdual_witness(const PolySet& Z0, const Relation& R) {
  const int k = Z0.dim() - R.in_dim;
  for (const auto& zp : Z0.pieces()) {
    const int q = zp.domain.dim();
    Mat Mx = zp.map.topRows(k), My = zp.map.bottomRows(R.in_dim);
    for (const auto& rp : R.pieces) {
      const int r = rp.domain.dim();
      Polyhedron D = Polyhedron::product(zp.domain, rp.domain).closure();
      Mat e1(R.in_dim, q + r), e2(k, q + r);
      e1 << -My, rp.in;
      e2 << Mx, rp.out;
      D.add_eq(e1, zp.offset.tail(R.in_dim) - rp.in_offset);
      D.add_eq(e2, -zp.offset.head(k) - rp.out_offset);
      for (int j = 0; j < q + r; ++j) {
        Vec e = Vec::Zero(q + r);
        e(j) = 1.0;
        D.add_le(e, 1.0);
        D.add_le(-e, 1.0);
      }
      Mat img = Mat::Zero(Z0.dim(), q + r);
      img.leftCols(q) = zp.map;
      for (Eigen::Index i = 0; i < img.rows(); ++i)
        for (double sg : {1.0, -1.0}) {
          Vec c = sg * img.row(i).transpose();
          auto z = argmax(D, c);
          if (z && c.dot(*z) + sg * zp.offset(i) > 1e-9) return Vec(img * *z + zp.offset);
        }
    }
  }
  return std::nullopt;
}

HessianEstimate start(const SolveResult& S, const ParametricProblem& P) {
  HessianEstimate E;
  E.result = PolySet(P.n());
  log_enumeration(E, S);
  return E;
}

void require_singleton(const SolveResult& S) {
  if (!S.singleton || S.minimizers.size() != 1)
    throw HypothesisError("S single-valued", std::to_string(S.minimizers.size()) + " minimizers at xbar");
}

}  // namespace

HessianEstimate hessian_unperturbed(const ParametricProblem& P, const HessianQuery& q, const SolveResult& S, SMode mode,
                                    const HessianOptions& opt) {
  if (P.g_depends_on_x())
    throw HypothesisError("g independent of x", "constraints depend on x; use single-single, single-S or single-lambda");
  HessianEstimate E = start(S, P);
  E.log.add("g independent of x", Verdict::Verified);
  E.log.add("Y compact", S.certificate == Certificate::ExactLp ? Verdict::Verified : Verdict::Asserted);
  const Vec& xs = q.xstar;
  // With g free of x the x-blocks of L are those of f.
  auto blocks = [&](const Vec& y) { return differentiate(P, q.xbar, y, zero_u(P)); };

  if (mode == SMode::Single) {
    require_singleton(S);
    E.theorem = "unperturbed-single";
    const Vec& y = S.minimizers.front();
    LagrangianEval ev = blocks(y);
    Vec base = ev.hxx * xs, v = ev.hxy * xs;
    E.supports.push_back({y, std::nullopt, 1.0, "s(xbar)"});
    try {
      SolutionMap sm = solution_relation(P, q.xbar, y, S, opt, E.log, E.notes);
      E.result = apply(sm.R, v).translated(base);
      if (sm.sens) {
        E.equality = true;
        E.collapse = Vec(base + sm.sens->ds.transpose() * v);
      }
      E.approximate = sm.R.approximate;
    } catch (const HypothesisError& e) {
      E.log.add("coderivative of S", Verdict::Failed, e.what());
      E.log.add("s locally Lipschitz", Verdict::Asserted, "Clarke Jacobians sampled by finite differences");
      std::vector<Vec> pts;
      for (const auto& J : clarke_jacobians(P, q.xbar, opt)) pts.push_back(base + J.transpose() * v);
      E.result = ConvexHull(pts).as_polyset("clarke");
      E.approximate = true;
      E.theorem = "unperturbed-single-clarke";
      E.notes.push_back("approximate: sampled generalized Jacobians");
    }
    return E;
  }

  if (mode == SMode::Multi) {
    Verdict cc = P.concave_convex();
    if (cc == Verdict::Failed) throw HypothesisError("concave-convex", "f is not concave-convex; use the caratheodory mode");
    E.log.add("concave-convex", cc);
    E.log.add("Y convex", P.convex_in_y());
    E.theorem = "unperturbed-multi";
    for (const auto& y : select_unperturbed(P, q.xbar, S, q.xund, E)) {
      LagrangianEval ev = blocks(y);
      SolutionMap sm = solution_relation(P, q.xbar, y, S, opt, E.log, E.notes);
      E.result.append(apply(sm.R, ev.hxy * xs).translated(ev.hxx * xs).retagged("y=" + format_vec(y)));
      E.supports.push_back({y, std::nullopt, 1.0, "grad_x f(xbar, y) = xund"});
      E.approximate = E.approximate || sm.R.approximate;
    }
    if (E.supports.empty()) E.notes.push_back("no minimizer matches the selection grad_x f(xbar, y) = xund");
    return E;
  }

  E.theorem = "unperturbed-caratheodory";
  std::vector<Vec> gens;
  std::vector<std::vector<Vec>> groups;
  for (const auto& y : candidate_points(S)) {
    Vec g = P.fx(q.xbar, y);
    bool placed = false;
    for (std::size_t k = 0; k < gens.size() && !placed; ++k)
      if (close(gens[k], g, 1e-9)) {
        groups[k].push_back(y);
        placed = true;
      }
    if (!placed) {
      gens.push_back(g);
      groups.push_back({y});
    }
  }
  std::map<int, std::vector<SolutionMap>> cache;
  bool lipschitz = true;
  auto maps = [&](int k) -> const std::vector<SolutionMap>& {
    auto it = cache.find(k);
    if (it != cache.end()) return it->second;
    std::vector<SolutionMap> v;
    for (const auto& y : groups[k]) {
      v.push_back(solution_relation(P, q.xbar, y, S, opt, E.log, E.notes));
      lipschitz = lipschitz && v.back().R.lipschitz_like;
      E.approximate = E.approximate || v.back().R.approximate;
    }
    return cache.emplace(k, std::move(v)).first->second;
  };
  auto term = [&](int k, const Vec& v) {
    PolySet acc(P.n());
    const auto& ms = maps(k);
    for (std::size_t j = 0; j < groups[k].size(); ++j) {
      LagrangianEval ev = blocks(groups[k][j]);
      acc.append(apply(ms[j].R, ev.hxy * v).translated(ev.hxx * v));
    }
    return acc;
  };
  std::vector<HullSupport> used;
  E.result = hull_coderivative(gens, q.xund, xs, P.n(), term, 1e-9, &used);
  for (const auto& h : used)
    for (std::size_t s = 0; s < h.index.size(); ++s)
      for (const auto& y : groups[h.index[s]]) E.supports.push_back({y, std::nullopt, h.weight[s], "hull support"});
  E.log.add("coderivative qualification at zero", lipschitz ? Verdict::Verified : Verdict::Asserted,
            lipschitz ? "D*S(xbar|y)(0) = {0} for every support" : "zero-weight and cancellation terms assumed trivial");
  if (used.empty()) E.notes.push_back("no convex combination of generators reproduces xund");
  return E;
}

HessianEstimate hessian_single_single(const ParametricProblem& P, const HessianQuery& q, const SolveResult& S,
                                      const HessianOptions& opt) {
  const Tolerances& tol = opt.tol;
  require_singleton(S);
  HessianEstimate E = start(S, P);
  E.theorem = "single-single";
  const Vec& y = S.minimizers.front();
  LicqReport licq = check_licq(P, q.xbar, y, tol);
  if (!licq.holds) throw HypothesisError("LICQ", "multiplier not unique at y = " + format_vec(y) + "; use single-S");
  E.log.add("LICQ", Verdict::Verified);
  E.log.add("MFCQ", Verdict::Verified, "implied by LICQ");
  E.log.add("gph K compact", Verdict::Asserted);
  auto u = unique_multiplier(P, q.xbar, y, tol);
  if (!u) throw HypothesisError("KKT", "no multiplier at y = " + format_vec(y));
  KktPoint kkt = make_kkt_point(P, q.xbar, y, *u, tol);
  const LagrangianEval& ev = kkt.ev;
  E.supports.push_back({y, *u, 1.0, "s(xbar), lambda(xbar, s(xbar))"});
  Vec base = ev.hxx * q.xstar, shift = ev.hxy * q.xstar;
  Vec w = ev.gx * q.xstar;
  try {
    Sensitivity sens = sensitivity_system(P, kkt, tol);
    Vec value = base + sens.ds.transpose() * shift + sens.du.transpose() * w;
    E.log.add("differentiable s and lambda", Verdict::Verified, "condition " + format_double(sens.condition));
    E.result = PolySet::point(value, "collapse");
    E.collapse = value;
    E.equality = true;
    return E;
  } catch (const HypothesisError& e) {
    E.log.add("differentiable s and lambda", Verdict::Failed, e.what());
  }
  E.log.add("s and lambda locally Lipschitz", Verdict::Asserted);
  CoderivEstimate Z = coderivative_lambda(kkt, w, opt.flavor, tol);
  E.log.append(Z.log);
  for (const auto& n : Z.notes) E.notes.push_back(n);
  SolutionMap sm = solution_relation(P, q.xbar, y, S, opt, E.log, E.notes);
  E.result = chain(Z.result, sm.R, shift, base);
  E.approximate = sm.R.approximate;
  return E;
}

HessianEstimate hessian_single_S(const ParametricProblem& P, const HessianQuery& q, const SolveResult& S,
                                 const HessianOptions& opt) {
  const Tolerances& tol = opt.tol;
  require_singleton(S);
  HessianEstimate E = start(S, P);
  E.theorem = "single-S";
  const Vec& y = S.minimizers.front();
  MfcqReport mf = check_mfcq(P, q.xbar, y, tol);
  if (!mf.holds) throw HypothesisError("MFCQ", "fails at y = " + format_vec(y) + ", witness " + format_vec(mf.witness));
  E.log.add("MFCQ", Verdict::Verified);
  E.log.add("gph K compact", Verdict::Asserted);
  E.log.add("s locally Lipschitz", Verdict::Asserted);
  MultiplierPolyhedron M = multipliers(P, q.xbar, y, tol);
  if (M.empty()) throw HypothesisError("KKT", "empty multiplier set at y = " + format_vec(y));
  SolutionMap sm = solution_relation(P, q.xbar, y, S, opt, E.log, E.notes);
  E.approximate = sm.R.approximate;
  bool qc = true;
  for (std::size_t k = 0; k < M.vertices.size(); ++k) {
    const Vec& u = M.vertices[k];
    KktPoint kkt = make_kkt_point(P, q.xbar, y, u, tol);
    const LagrangianEval& ev = kkt.ev;
    Vec w = ev.gx * q.xstar;
    CoderivEstimate Z = coderivative_lambda(kkt, w, opt.flavor, tol);
    for (const auto& n : Z.notes) E.notes.push_back(n);
    CoderivEstimate Z0 = coderivative_lambda(kkt, Vec::Zero(P.p()), opt.flavor, tol);
    if (auto wit = qcdual_witness(Z0.result, sm.R)) {
      qc = false;
      E.log.add("dual qualification", Verdict::Failed, "u = " + format_vec(u) + ", witness " + format_vec(*wit));
    }
    PolySet part = chain(Z.result, sm.R, ev.hxy * q.xstar, ev.hxx * q.xstar);
    E.result.append(M.vertices.size() > 1 ? part.retagged("u" + std::to_string(k + 1)) : part);
    E.supports.push_back({y, u, 1.0, "multiplier vertex"});
  }
  if (qc) E.log.add("dual qualification", Verdict::Verified, "at every multiplier vertex");
  if (M.vertices.size() > 1) E.log.add("union over multiplier vertices", Verdict::Verified,
                                       std::to_string(M.vertices.size()) + " vertices");
  return E;
}

HessianEstimate hessian_single_lambda(const ParametricProblem& P, const HessianQuery& q, const SolveResult& S,
                                      const HessianOptions& opt) {
  const Tolerances& tol = opt.tol;
  HessianEstimate E = start(S, P);
  E.log.add("gph K compact", Verdict::Asserted);
  struct Sel {
    Vec y, u, grad;
  };
  std::vector<Sel> all;
  for (const auto& y : candidate_points(S)) {
    if (!check_licq(P, q.xbar, y, tol).holds) throw HypothesisError("LICQ", "fails at y = " + format_vec(y));
    auto u = unique_multiplier(P, q.xbar, y, tol);
    if (!u) throw HypothesisError("KKT", "no multiplier at y = " + format_vec(y));
    all.push_back({y, *u, P.lagrangian_grad_x(q.xbar, y, *u)});
  }
  E.log.add("LICQ", Verdict::Verified, "at every minimizer");
  E.log.add("lambda single-valued and Lipschitz near (xbar, y)", Verdict::Asserted, "checked at xbar only");

  auto piece = [&](const Sel& s, const Vec& v, SolutionMap& sm) {
    KktPoint kkt = make_kkt_point(P, q.xbar, s.y, s.u, tol);
    const LagrangianEval& ev = kkt.ev;
    CoderivEstimate Z = coderivative_lambda(kkt, Vec(ev.gx * v), opt.flavor, tol);
    for (const auto& n : Z.notes) E.notes.push_back(n);
    return chain(Z.result, sm.R, ev.hxy * v, ev.hxx * v);
  };

  Verdict cc = P.concave_convex();
  if (cc != Verdict::Failed) {
    E.theorem = "single-lambda";
    E.log.add("concave-convex", cc);
    for (const auto& s : all) {
      if (!close(s.grad, q.xund, 1e-6)) continue;
      SolutionMap sm = solution_relation(P, q.xbar, s.y, S, opt, E.log, E.notes);
      E.approximate = E.approximate || sm.R.approximate;
      E.supports.push_back({s.y, s.u, 1.0, "grad_x L(xbar, y, u) = xund"});
      if (sm.sens && S.singleton && all.size() == 1) {
        try {
          KktPoint kkt = make_kkt_point(P, q.xbar, s.y, s.u, tol);
          Sensitivity sens = sensitivity_system(P, kkt, tol);
          const LagrangianEval& ev = kkt.ev;
          Vec value = ev.hxx * q.xstar + sens.ds.transpose() * (ev.hxy * q.xstar) +
                      sens.du.transpose() * (ev.gx * q.xstar);
          E.result = PolySet::point(value, "collapse");
          E.collapse = value;
          E.equality = true;
          E.log.add("differentiable s and lambda", Verdict::Verified);
          return E;
        } catch (const HypothesisError&) {
        }
      }
      E.result.append(piece(s, q.xstar, sm).retagged("y=" + format_vec(s.y)));
    }
    if (E.supports.empty()) E.notes.push_back("no (y, u) satisfies grad_x L(xbar, y, u) = xund");
    return E;
  }

  E.theorem = "single-lambda-hull";
  E.log.add("concave-convex", Verdict::Failed, "using the convex-hull support enumeration");
  std::vector<Vec> gens;
  std::vector<std::vector<int>> groups;
  for (std::size_t i = 0; i < all.size(); ++i) {
    bool placed = false;
    for (std::size_t k = 0; k < gens.size() && !placed; ++k)
      if (close(gens[k], all[i].grad, 1e-9)) {
        groups[k].push_back(static_cast<int>(i));
        placed = true;
      }
    if (!placed) {
      gens.push_back(all[i].grad);
      groups.push_back({static_cast<int>(i)});
    }
  }
  std::map<int, SolutionMap> maps;
  bool lipschitz = true;
  auto term = [&](int k, const Vec& v) {
    PolySet acc(P.n());
    for (int i : groups[k]) {
      auto it = maps.find(i);
      if (it == maps.end()) {
        it = maps.emplace(i, solution_relation(P, q.xbar, all[i].y, S, opt, E.log, E.notes)).first;
        lipschitz = lipschitz && it->second.R.lipschitz_like;
        E.approximate = E.approximate || it->second.R.approximate;
      }
      acc.append(piece(all[i], v, it->second));
    }
    return acc;
  };
  std::vector<HullSupport> used;
  E.result = hull_coderivative(gens, q.xund, q.xstar, P.n(), term, 1e-9, &used);
  for (const auto& h : used)
    for (std::size_t s = 0; s < h.index.size(); ++s)
      for (int i : groups[h.index[s]]) E.supports.push_back({all[i].y, all[i].u, h.weight[s], "hull support"});
  E.log.add("coderivative qualification at zero", lipschitz ? Verdict::Verified : Verdict::Asserted,
            lipschitz ? "D*S(xbar|y)(0) = {0} for every support" : "zero-weight and cancellation terms assumed trivial");
  if (used.empty()) E.notes.push_back("no convex combination of generators reproduces xund");
  return E;
}

namespace {

Expr linear(const Mat& A, int row, double rhs_const) {
  Expr e;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    if (A(row, j) != 0.0) e = e + Expr::constant(A(row, j)) * Expr::y(static_cast<int>(j));
  if (rhs_const != 0.0) e = e - Expr::constant(rhs_const);
  return e;
}

void check_full_column_rank(const Mat& A) {
  int r = numeric_rank(A, 1e-9);
  if (r < A.cols())
    throw HypothesisError("A full rank", "rank " + std::to_string(r) + " < " + std::to_string(A.cols()) + " columns");
}

}  // namespace

ParametricProblem lp_lhs_problem(const Mat& A, const Vec& b) {
  const int m = static_cast<int>(A.cols()), p = static_cast<int>(A.rows());
  if (b.size() != p) throw Error("b has the wrong length");
  Expr f;
  for (int i = 0; i < m; ++i) f = f + Expr::x(i) * Expr::y(i);
  std::vector<Expr> g;
  for (int i = 0; i < p; ++i) g.push_back(linear(A, i, b(i)));
  ParametricProblem P(m, m, f, g);
  P.name = "lp-lhs";
  return P;
}

ParametricProblem lp_lhs_rhs_problem(const Mat& A) {
  const int m = static_cast<int>(A.cols()), p = static_cast<int>(A.rows());
  if (p < m) throw Error("lp-lhs-rhs needs at least as many rows as columns");
  Expr f;
  for (int i = 0; i < m; ++i) f = f + Expr::x(i) * Expr::y(i);
  std::vector<Expr> g;
  for (int i = 0; i < p; ++i) g.push_back(linear(A, i, 0.0) - Expr::x(i));
  ParametricProblem P(p, m, f, g);
  P.name = "lp-lhs-rhs";
  return P;
}

namespace {

// f = x_{1:m}^T y exactly, read off its derivative trees.
bool bilinear_objective(const ParametricProblem& P) {
  const int n = P.n(), m = P.m();
  if (n < m || !P.quadratic()) return false;
  const ExprDerivs& d = P.df();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!d.dxx[i][j].is_zero()) return false;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (!d.dyy[i][j].is_zero()) return false;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const Expr& e = d.dxy[i][j];
      if (!e.is_constant() || e.value() != (i == j ? 1.0 : 0.0)) return false;
    }
  Vec x0 = Vec::Zero(n), y0 = Vec::Zero(m);
  return P.f_value(x0, y0) == 0.0 && P.fx(x0, y0).isZero(0.0) && P.fy(x0, y0).isZero(0.0);
}

Mat constraint_matrix(const ParametricProblem& P) {
  Vec x0 = Vec::Zero(P.n()), y0 = Vec::Zero(P.m());
  return P.gy(x0, y0);
}

}  // namespace

std::optional<std::pair<Mat, Vec>> match_lp_lhs(const ParametricProblem& P) {
  if (P.n() != P.m() || P.g_depends_on_x() || !P.affine_in_y() || P.p() == 0 || !bilinear_objective(P)) return std::nullopt;
  Vec x0 = Vec::Zero(P.n()), y0 = Vec::Zero(P.m());
  return std::make_pair(constraint_matrix(P), Vec(-P.g_values(x0, y0)));
}

std::optional<Mat> match_lp_lhs_rhs(const ParametricProblem& P) {
  if (P.n() != P.p() || !P.affine_in_y() || P.p() == 0 || !bilinear_objective(P)) return std::nullopt;
  for (int i = 0; i < P.p(); ++i) {
    const ExprDerivs& d = P.dg(i);
    for (int j = 0; j < P.n(); ++j)
      if (!d.dx[j].is_constant() || d.dx[j].value() != (i == j ? -1.0 : 0.0)) return std::nullopt;
    for (int j = 0; j < P.m(); ++j)
      if (!d.dy[j].is_constant()) return std::nullopt;
  }
  Vec x0 = Vec::Zero(P.n()), y0 = Vec::Zero(P.m());
  if (!P.g_values(x0, y0).isZero(0.0)) return std::nullopt;
  return constraint_matrix(P);
}

namespace {

// {a : (a, c) in a branch at u* = 0, A^T c = -xstar} per selected vertex y
// and multiplier vertex, read off the coderivative relation of S.
HessianEstimate lp_lhs_estimate(const ParametricProblem& P, const Mat& A, const HessianQuery& q, const SolveResult& S,
                                const HessianOptions& opt) {
  check_full_column_rank(A);
  HessianEstimate E = start(S, P);
  E.theorem = "lp-lhs";
  E.log.add("A full rank", Verdict::Verified);
  E.log.add("Y compact", S.certificate == Certificate::Pinned ? Verdict::Asserted : Verdict::Verified,
            "vertex enumeration found no recession direction");
  for (const auto& y : select_unperturbed(P, q.xbar, S, q.xund, E)) {
    Relation R = coderivative_S_relation(P, q.xbar, y, opt.flavor, opt.tol);
    E.log.append(R.log);
    for (const auto& n : R.notes) E.notes.push_back(n);
    E.result.append(apply(R, q.xstar).retagged("y=" + format_vec(y)));
    E.supports.push_back({y, std::nullopt, 1.0, "grad_x f(xbar, y) = xund"});
  }
  if (E.supports.empty()) E.notes.push_back("no minimizer matches the selection y = xund");
  return E;
}

}  // namespace

HessianEstimate lp_lhs_hessian(const Mat& A, const Vec& b, const HessianQuery& q, const HessianOptions& opt) {
  check_full_column_rank(A);
  ParametricProblem P = lp_lhs_problem(A, b);
  SolveResult S = solve_value(P, q.xbar, opt.tol, opt.solve);
  HessianEstimate E = lp_lhs_estimate(P, A, q, S, opt);
  E.result = compact(E.result);
  return E;
}

HessianEstimate lp_lhs_rhs_hessian(const Mat& A, const HessianQuery& q, const HessianOptions& opt) {
  check_full_column_rank(A);
  ParametricProblem P = lp_lhs_rhs_problem(A);
  SolveResult S = solve_value(P, q.xbar, opt.tol, opt.solve);
  HessianEstimate E = hessian_single_lambda(P, q, S, opt);
  E.theorem = "lp-lhs-rhs";
  E.log.add("A full rank", Verdict::Verified);
  return E;
}

HessianCase route(const ParametricProblem& P, const HessianQuery& q, const SolveResult& S, const Tolerances& tol) {
  if (q.hint != HessianCase::Auto) return q.hint;
  if (match_lp_lhs(P)) return HessianCase::LpLhs;
  if (match_lp_lhs_rhs(P)) return HessianCase::LpLhsRhs;
  if (!P.g_depends_on_x()) return HessianCase::Unperturbed;
  if (S.singleton && S.minimizers.size() == 1) {
    const Vec& y = S.minimizers.front();
    if (check_licq(P, q.xbar, y, tol).holds) return HessianCase::SingleSingle;
    return HessianCase::SingleS;
  }
  return HessianCase::SingleLambda;
}

HessianEstimate estimate_hessian(const ParametricProblem& P, const HessianQuery& q, const HessianOptions& opt) {
  if (q.xbar.size() != P.n() || q.xund.size() != P.n() || q.xstar.size() != P.n())
    throw UsageError("xbar, xund and xstar must have length n = " + std::to_string(P.n()));
  SolveResult S = solve_value(P, q.xbar, opt.tol, opt.solve);
  SubdiffEstimate first = first_order(P, q.xbar, S, opt.tol);
  MemberResult mr = member(q.xund, first.set, 1e-6);
  if (mr.verdict == Membership::Outside) {
    std::string gens;
    for (const auto& g : first.generators) gens += (gens.empty() ? "" : ", ") + format_vec(g.value);
    throw HypothesisError("xund in the subdifferential",
                          "xund = " + format_vec(q.xund) + " is at distance " + format_double(mr.distance) + " from the " +
                              to_string(first.formula) + " estimate with generators " + gens);
  }
  HessianCase c = route(P, q, S, opt.tol);
  HessianEstimate E;
  switch (c) {
    case HessianCase::LpLhs: {
      auto ab = match_lp_lhs(P);
      if (!ab) throw HypothesisError("lp-lhs structure", "problem is not min{x^T y : A y <= b}");
      E = lp_lhs_estimate(P, ab->first, q, S, opt);
      break;
    }
    case HessianCase::LpLhsRhs: {
      auto A = match_lp_lhs_rhs(P);
      if (!A) throw HypothesisError("lp-lhs-rhs structure", "problem is not min{x_{1:m}^T y : A y <= x}");
      check_full_column_rank(*A);
      E = hessian_single_lambda(P, q, S, opt);
      E.theorem = "lp-lhs-rhs";
      E.log.add("A full rank", Verdict::Verified);
      break;
    }
    case HessianCase::Unperturbed: {
      SMode mode = SMode::Single;
      if (!S.singleton || S.minimizers.size() != 1)
        mode = P.concave_convex() != Verdict::Failed ? SMode::Multi : SMode::Caratheodory;
      E = hessian_unperturbed(P, q, S, mode, opt);
      break;
    }
    case HessianCase::SingleSingle: E = hessian_single_single(P, q, S, opt); break;
    case HessianCase::SingleS: E = hessian_single_S(P, q, S, opt); break;
    case HessianCase::SingleLambda: E = hessian_single_lambda(P, q, S, opt); break;
    case HessianCase::Auto: break;
  }
  const std::size_t before = E.result.size();
  E.result = compact(E.result);
  if (E.result.size() < before)
    E.notes.push_back("merged " + std::to_string(before - E.result.size()) + " empty or repeated piece(s)");
  std::vector<std::string> notes;
  for (const auto& n : E.notes)
    if (std::find(notes.begin(), notes.end(), n) == notes.end()) notes.push_back(n);
  E.notes = notes;
  E.log.add("xund in the first-order estimate", Verdict::Verified,
            std::string(to_string(first.formula)) + (mr.verdict == Membership::Boundary ? ", on the boundary" : ""));
  return E;
}

}  // namespace valfun
