#ifndef VALFUN_HESSIAN_HPP
#define VALFUN_HESSIAN_HPP

#include "valfun/coderiv.hpp"
#include "valfun/firstorder.hpp"

#include <optional>
#include <string>
#include <vector>

namespace valfun {

struct Sensitivity {
  Mat ds;  // m x n Jacobian of s
  Mat du;  // p x n Jacobian of x -> lambda(x, s(x))
  double residual = 0.0;
  double condition = 0.0;
};

// Implicit-function system of the KKT conditions. Throws HypothesisError
// for LICQ, strict complementarity or a (near) singular matrix.
Sensitivity sensitivity_system(const ParametricProblem& P, const KktPoint& kkt, const Tolerances& tol = {});

enum class HessianCase { Auto, Unperturbed, SingleSingle, SingleS, SingleLambda, LpLhs, LpLhsRhs };
const char* to_string(HessianCase c);
HessianCase parse_case(const std::string& text);

enum class SMode { Single, Multi, Caratheodory };
const char* to_string(SMode m);

struct HessianQuery {
  Vec xbar;
  Vec xund;   // element of the first-order estimate at xbar
  Vec xstar;  // test covector
  HessianCase hint = HessianCase::Auto;
};

struct HessianOptions {
  Tolerances tol;
  Flavor flavor = Flavor::M;
  SolveOptions solve;
};

// Which minimizer / multiplier pair produced pieces, and in what role.
struct SupportEntry {
  Vec y;
  std::optional<Vec> u;
  double weight = 1.0;
  std::string role;
};

struct HessianEstimate {
  PolySet result;
  std::string theorem;
  bool equality = false;     // the estimate is the exact generalized Hessian
  bool approximate = false;  // built from sampled Jacobians
  std::optional<Vec> collapse;  // closed-form value when s and lambda are differentiable
  HypothesisLog log;
  std::vector<SupportEntry> supports;
  std::vector<std::string> notes;
};

HessianEstimate hessian_unperturbed(const ParametricProblem& P, const HessianQuery& q, const SolveResult& S,
                                    SMode mode, const HessianOptions& opt = {});
HessianEstimate hessian_single_single(const ParametricProblem& P, const HessianQuery& q, const SolveResult& S,
                                      const HessianOptions& opt = {});
HessianEstimate hessian_single_S(const ParametricProblem& P, const HessianQuery& q, const SolveResult& S,
                                 const HessianOptions& opt = {});
// Concave-convex problems use the union over selected minimizers, others the
// convex-hull support enumeration.
HessianEstimate hessian_single_lambda(const ParametricProblem& P, const HessianQuery& q, const SolveResult& S,
                                      const HessianOptions& opt = {});

// phi(x) = min{x^T y : A y <= b}.
ParametricProblem lp_lhs_problem(const Mat& A, const Vec& b);
HessianEstimate lp_lhs_hessian(const Mat& A, const Vec& b, const HessianQuery& q, const HessianOptions& opt = {});

// phi(x) = min{x_{1:m}^T y : A y <= x}, x in R^p.
ParametricProblem lp_lhs_rhs_problem(const Mat& A);
HessianEstimate lp_lhs_rhs_hessian(const Mat& A, const HessianQuery& q, const HessianOptions& opt = {});

// Detects the two LP families; returns the constraint data when matched.
std::optional<std::pair<Mat, Vec>> match_lp_lhs(const ParametricProblem& P);
std::optional<Mat> match_lp_lhs_rhs(const ParametricProblem& P);

HessianCase route(const ParametricProblem& P, const HessianQuery& q, const SolveResult& S, const Tolerances& tol = {});

// Solves phi at xbar, checks xund against the first-order estimate, routes
// and evaluates.
HessianEstimate estimate_hessian(const ParametricProblem& P, const HessianQuery& q, const HessianOptions& opt = {});

}  // namespace valfun

#endif
