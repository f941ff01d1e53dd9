#ifndef VALFUN_PROBLEM_HPP
#define VALFUN_PROBLEM_HPP

#include "valfun/expr.hpp"
#include "valfun/hypothesis.hpp"
#include "valfun/linalg.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace valfun {

using Box = std::vector<std::pair<double, double>>;

// A named query point carried by a problem file. Pinned minimizers
// override the solver's enumeration of S(x).
struct NamedPoint {
  Vec x;
  std::vector<Vec> minimizers;
  std::optional<Vec> xund;
  std::optional<Vec> xstar;
  std::string case_hint;
};

struct ProblemFlags {
  bool concave_convex = false;
  bool convex_in_y = false;
};

struct ExprDerivs {
  Expr e;
  std::vector<Expr> dx, dy;
  std::vector<std::vector<Expr>> dxx;  // n x n
  std::vector<std::vector<Expr>> dxy;  // m x n, entry (i,j) = d2/dy_i dx_j
  std::vector<std::vector<Expr>> dyy;  // m x m
  bool quadratic = false;              // all second derivatives constant
};

struct LagrangianEval {
  Vec x, y, u;
  double f = 0.0;
  double L = 0.0;
  Vec g;
  Vec fx, fy;          // gradients of f
  Vec grad_x, grad_y;  // gradients of L
  Mat hxx;             // n x n
  Mat hxy;             // m x n
  Mat hyx;             // n x m, transpose of hxy
  Mat hyy;             // m x m
  Mat gx;              // p x n
  Mat gy;              // p x m
};

class ParametricProblem {
 public:
  ParametricProblem(int n, int m, Expr f, std::vector<Expr> g,
                    std::optional<Box> y_box = std::nullopt, ProblemFlags flags = {});

  int n() const { return n_; }
  int m() const { return m_; }
  int p() const { return static_cast<int>(g_.size()); }
  const Expr& f() const { return f_; }
  const std::vector<Expr>& g() const { return g_; }
  const std::optional<Box>& y_box() const { return y_box_; }
  const ProblemFlags& flags() const { return flags_; }

  std::string name;
  std::map<std::string, NamedPoint> points;

  double f_value(const Vec& x, const Vec& y) const;
  Vec g_values(const Vec& x, const Vec& y) const;
  Vec fx(const Vec& x, const Vec& y) const;
  Vec fy(const Vec& x, const Vec& y) const;
  Mat gx(const Vec& x, const Vec& y) const;
  Mat gy(const Vec& x, const Vec& y) const;
  Vec lagrangian_grad_x(const Vec& x, const Vec& y, const Vec& u) const;
  Vec lagrangian_grad_y(const Vec& x, const Vec& y, const Vec& u) const;
  Mat lagrangian_hyy(const Vec& x, const Vec& y, const Vec& u) const;

  // Structural facts read off the expression trees.
  bool g_depends_on_x() const;
  bool affine_in_y() const;      // f and every g_i affine in y
  bool quadratic() const;        // f and every g_i of degree <= 2

  // Concave-convexity / convexity in y: verified from constant Hessians
  // when the problem is quadratic, otherwise echoes the asserted flag.
  Verdict concave_convex() const;
  Verdict convex_in_y() const;

  const ExprDerivs& df() const { return *df_; }
  const ExprDerivs& dg(int i) const { return (*dg_)[i]; }

  std::vector<std::string> warnings() const;

 private:
  int n_, m_;
  Expr f_;
  std::vector<Expr> g_;
  std::optional<Box> y_box_;
  ProblemFlags flags_;
  std::shared_ptr<const ExprDerivs> df_;
  std::shared_ptr<const std::vector<ExprDerivs>> dg_;
};

LagrangianEval differentiate(const ParametricProblem& P, const Vec& x, const Vec& y, const Vec& u);

struct Partition {
  std::vector<int> eta, theta, nu;
  std::vector<int> ambiguous;  // members of theta placed there by the straddle rule
};

struct KktPoint {
  Vec x, y, u;
  Partition part;
  double residual = 0.0;
  LagrangianEval ev;
};

// Scaled KKT residual: max of stationarity (relative to 1 + |grad_y f|),
// primal and dual infeasibility, and complementarity.
double kkt_residual(const ParametricProblem& P, const Vec& x, const Vec& y, const Vec& u);

Partition classify(const ParametricProblem& P, const Vec& x, const Vec& y, const Vec& u,
                   const Tolerances& tol = {});

// Validated KKT triple; throws HypothesisError when the residual exceeds tol.kkt.
KktPoint make_kkt_point(const ParametricProblem& P, const Vec& x, const Vec& y, const Vec& u,
                        const Tolerances& tol = {});

ParametricProblem parse_problem(const std::string& text);
ParametricProblem load_problem(const std::string& path);
std::string serialize_problem(const ParametricProblem& P);
bool structurally_equal(const ParametricProblem& a, const ParametricProblem& b);

}  // namespace valfun

#endif
