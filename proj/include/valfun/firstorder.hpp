#ifndef VALFUN_FIRSTORDER_HPP
#define VALFUN_FIRSTORDER_HPP

#include "valfun/hypothesis.hpp"
#include "valfun/kernel.hpp"
#include "valfun/polyset.hpp"

#include <optional>
#include <string>
#include <vector>

namespace valfun {

enum class Formula { Danskin, DanskinNoHull, ConvexMfcq, GauvinDubeau, GauvinDubeauNoHull };
const char* to_string(Formula f);

struct Generator {
  Vec value;
  Vec y;
  std::optional<Vec> u;
};

struct SubdiffEstimate {
  Vec xbar;
  std::vector<Generator> generators;
  bool hull = true;             // convex hull of the generators, else their union
  Formula formula = Formula::Danskin;
  bool inclusion_only = false;  // multiplier-vertex union under MFCQ only
  HypothesisLog log;
  std::vector<std::string> notes;
  PolySet set;
};

// grad_x f(xbar, y) over y in S(xbar); g must not depend on x.
SubdiffEstimate danskin(const ParametricProblem& P, const Vec& xbar, const SolveResult& S, const Tolerances& tol = {});

// grad_x L(xbar, ybar, u) over the multiplier polyhedron, for convex problems
// with a unique minimizer and MFCQ.
SubdiffEstimate convex_mfcq_subdiff(const ParametricProblem& P, const Vec& xbar, const Vec& ybar,
                                    const MultiplierPolyhedron& Lambda, const Tolerances& tol = {});

// grad_x L(xbar, y, lambda(xbar, y)) over y in S(xbar) under LICQ; unions
// over multiplier vertices when only MFCQ holds.
SubdiffEstimate gauvin_dubeau(const ParametricProblem& P, const Vec& xbar, const SolveResult& S, const Tolerances& tol = {});

// Picks the formula that matches the problem's structure.
SubdiffEstimate first_order(const ParametricProblem& P, const Vec& xbar, const SolveResult& S, const Tolerances& tol = {});

}  // namespace valfun

#endif
