#include "valfun/firstorder.hpp"

#include "valfun/errors.hpp"
#include "valfun/hull.hpp"

namespace valfun {

const char* to_string(Formula f) {
  switch (f) {
    case Formula::Danskin: return "danskin";
    case Formula::DanskinNoHull: return "danskin-nohull";
    case Formula::ConvexMfcq: return "convex-mfcq";
    case Formula::GauvinDubeau: return "gauvin-dubeau";
    case Formula::GauvinDubeauNoHull: return "gauvin-dubeau-nohull";
  }
  return "?";
}

namespace {

// Points of S(xbar) that generate: the optimal face's vertices when the LP
// optimum is a face, else the minimizer list.
const std::vector<Vec>& generating_points(const SolveResult& S) {
  return S.face.empty() ? S.minimizers : S.face;
}

void log_enumeration(SubdiffEstimate& E, const SolveResult& S) {
  E.log.add("S(xbar) enumerated",
            S.certificate == Certificate::Heuristic ? Verdict::Asserted : Verdict::Verified,
            std::string(to_string(S.certificate)) + ", " + std::to_string(S.minimizers.size()) + " minimizer(s)");
  if (S.certificate == Certificate::Heuristic) E.notes.push_back("under-enumeration-possible");
}

PolySet assemble(const std::vector<Generator>& gens, bool hull, bool face, int n) {
  std::vector<Vec> pts;
  for (const auto& g : gens) pts.push_back(g.value);
  // The union over a whole optimal face is its (convex) image.
  if (hull || face) return ConvexHull(pts).as_polyset(hull ? "hull" : "face-image");
  PolySet out(n);
  std::vector<Vec> kept;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    bool dup = false;
    for (const auto& q : kept)
      if ((q - pts[k]).lpNorm<Eigen::Infinity>() <= 1e-12) dup = true;
    if (dup) continue;
    kept.push_back(pts[k]);
    out.append(PolySet::point(pts[k], "y" + std::to_string(k + 1)));
  }
  return out;
}

bool nohull(const ParametricProblem& P, SubdiffEstimate& E) {
  Verdict cc = P.concave_convex();
  if (cc != Verdict::Failed) {
    E.log.add("concave-convex", cc);
    return true;
  }
  return false;
}

}  // namespace

SubdiffEstimate danskin(const ParametricProblem& P, const Vec& xbar, const SolveResult& S, const Tolerances&) {
  if (P.g_depends_on_x())
    throw HypothesisError("g independent of x", "constraints depend on x; use the gauvin-dubeau formula");
  SubdiffEstimate E;
  E.xbar = xbar;
  E.log.add("g independent of x", Verdict::Verified);
  log_enumeration(E, S);
  for (const auto& y : generating_points(S)) E.generators.push_back({P.fx(xbar, y), y, std::nullopt});
  E.hull = !nohull(P, E);
  E.formula = E.hull ? Formula::Danskin : Formula::DanskinNoHull;
  E.set = assemble(E.generators, E.hull, !S.face.empty(), P.n());
  return E;
}

SubdiffEstimate convex_mfcq_subdiff(const ParametricProblem& P, const Vec& xbar, const Vec& ybar,
                                    const MultiplierPolyhedron& Lambda, const Tolerances& tol) {
  SubdiffEstimate E;
  E.xbar = xbar;
  E.formula = Formula::ConvexMfcq;
  E.hull = false;
  Verdict cv = P.convex_in_y();
  if (cv == Verdict::Failed) throw HypothesisError("convex in y", "problem is not convex in y");
  E.log.add("convex in y", cv);
  MfcqReport mf = check_mfcq(P, xbar, ybar, tol);
  if (!mf.holds) throw HypothesisError("MFCQ", "fails at y = " + format_vec(ybar) + ", witness " + format_vec(mf.witness));
  E.log.add("MFCQ", Verdict::Verified);
  if (Lambda.empty()) throw HypothesisError("KKT", "empty multiplier set at y = " + format_vec(ybar));
  Vec fx = P.fx(xbar, ybar);
  Mat gx = P.p() > 0 ? P.gx(xbar, ybar) : Mat(0, P.n());
  for (const auto& u : Lambda.vertices) E.generators.push_back({fx + gx.transpose() * u, ybar, u});
  E.set = PolySet::image(Lambda.H, gx.transpose(), fx, "multipliers");
  return E;
}

SubdiffEstimate gauvin_dubeau(const ParametricProblem& P, const Vec& xbar, const SolveResult& S, const Tolerances& tol) {
  SubdiffEstimate E;
  E.xbar = xbar;
  log_enumeration(E, S);
  bool licq_all = true;
  std::vector<Vec> ys = S.minimizers;
  for (const auto& v : S.face) ys.push_back(v);
  std::vector<Generator> licq_gens;
  for (const auto& y : ys) {
    LicqReport lr = check_licq(P, xbar, y, tol);
    if (!lr.holds) {
      licq_all = false;
      MfcqReport mf = check_mfcq(P, xbar, y, tol);
      if (!mf.holds)
        throw HypothesisError("MFCQ", "fails at y = " + format_vec(y) + ", witness " + format_vec(mf.witness));
    }
    MultiplierPolyhedron M = multipliers(P, xbar, y, tol);
    if (M.empty()) throw HypothesisError("KKT", "no multiplier at minimizer y = " + format_vec(y));
    Vec fx = P.fx(xbar, y);
    Mat gx = P.p() > 0 ? P.gx(xbar, y) : Mat(0, P.n());
    for (const auto& u : M.vertices) E.generators.push_back({fx + gx.transpose() * u, y, u});
  }
  if (licq_all) {
    E.log.add("LICQ", Verdict::Verified, "at every minimizer");
    E.hull = !nohull(P, E);
    E.formula = E.hull ? Formula::GauvinDubeau : Formula::GauvinDubeauNoHull;
  } else {
    E.log.add("LICQ", Verdict::Failed, "downgraded to the MFCQ inclusion over multiplier vertices");
    E.log.add("MFCQ", Verdict::Verified, "at every minimizer");
    E.hull = true;
    E.inclusion_only = true;
    E.formula = Formula::GauvinDubeau;
  }
  E.set = assemble(E.generators, E.hull, !S.face.empty(), P.n());
  return E;
}

SubdiffEstimate first_order(const ParametricProblem& P, const Vec& xbar, const SolveResult& S, const Tolerances& tol) {
  if (!P.g_depends_on_x()) return danskin(P, xbar, S, tol);
  if (S.singleton && P.convex_in_y() != Verdict::Failed && !S.minimizers.empty()) {
    const Vec& y = S.minimizers.front();
    if (check_mfcq(P, xbar, y, tol).holds) {
      SubdiffEstimate E = convex_mfcq_subdiff(P, xbar, y, multipliers(P, xbar, y, tol), tol);
      SubdiffEstimate tmp;
      log_enumeration(tmp, S);
      E.log.append(tmp.log);
      E.notes = tmp.notes;
      return E;
    }
  }
  return gauvin_dubeau(P, xbar, S, tol);
}

}  // namespace valfun
