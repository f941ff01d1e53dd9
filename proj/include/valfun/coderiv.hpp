#ifndef VALFUN_CODERIV_HPP
#define VALFUN_CODERIV_HPP

#include "valfun/hypothesis.hpp"
#include "valfun/kernel.hpp"
#include "valfun/polyset.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace valfun {

enum class Flavor { M, C };
const char* to_string(Flavor f);

// One branch over z = (a, c) in R^{m+p}; label lists the case taken for
// every index in theta.
struct Branch {
  Polyhedron poly;
  std::string label;
};

struct BranchFamily {
  KktPoint kkt;
  Vec ustar;
  Flavor flavor = Flavor::M;
  std::vector<Branch> branches;
  bool empty() const { return branches.empty(); }
};

// M-type: three cases per theta index; C-type: two closed cases. Strict
// M-type rows are kept open. Branches with an empty set are dropped.
// Throws Error when |theta| exceeds tol.branch_cap (M) or 12 (C).
BranchFamily mho(const KktPoint& kkt, const Vec& ustar, Flavor flavor, const Tolerances& tol = {});

// Every point of inner lies in some branch of outer. Inner branches are cut
// by the signs of c_i and u*_i + grad g_i a over theta before comparing H-forms.
bool family_covers(const BranchFamily& outer, const BranchFamily& inner, double tol = 1e-9);

// (a, c) -> (x*, y*) = (hyx a + gx^T c, hyy a + gy^T c).
Mat lambda_map(const KktPoint& kkt);

struct CqLambdaReport {
  Flavor flavor = Flavor::M;
  bool cq = true;        // branch ∩ {map = 0} = {0} for every branch at 0
  std::optional<Vec> cq_witness;
  bool holala = true;    // the map vanishes on every branch at 0
  std::optional<Vec> holala_witness;
};

CqLambdaReport check_cq_lambda(const KktPoint& kkt, const Tolerances& tol = {});

struct CoderivEstimate {
  std::string kind;  // "D*Lambda" or "D*S"
  Vec input;
  PolySet result;
  HypothesisLog log;
  std::vector<std::string> notes;
};

CoderivEstimate coderivative_lambda(const KktPoint& kkt, const Vec& ustar, Flavor flavor = Flavor::M,
                                    const Tolerances& tol = {});

// A set-valued linear relation v -> union over pieces of
// {out z + out_offset : z in domain, in z + in_offset = v}.
struct RelationPiece {
  Polyhedron domain;
  Mat in;
  Vec in_offset;
  Mat out;
  Vec out_offset;
  std::string tag;
};

struct Relation {
  int in_dim = 0;
  int out_dim = 0;
  std::string kind;
  bool approximate = false;
  bool lipschitz_like = false;  // R(0) = {0} certified
  std::vector<RelationPiece> pieces;
  HypothesisLog log;
  std::vector<std::string> notes;
};

PolySet apply(const Relation& R, const Vec& v);

// Z lives in R^{k + R.in_dim}; returns the union over (zx, zy) in Z and over
// w in R(zy + shift_in) of zx + w + shift_out, a subset of R^k.
PolySet chain(const PolySet& Z, const Relation& R, const Vec& shift_in, const Vec& shift_out);

// v -> {ds^T v}, ds the m x n Jacobian of s.
Relation jacobian_relation(const Mat& ds, const std::string& tag = "jacobian");

// v -> ds^T v + cone(normals); the coderivative of a smooth branch of s
// restricted to the polyhedral region where it is selected.
Relation region_relation(const Mat& ds, const std::vector<Vec>& normals, const std::string& tag = "region");

// D*S(xbar|ybar) from the multiplier branches, unioned over the vertices
// of the multiplier polyhedron. Needs convexity in y and MFCQ.
Relation coderivative_S_relation(const ParametricProblem& P, const Vec& xbar, const Vec& ybar,
                                 Flavor flavor = Flavor::M, const Tolerances& tol = {});

CoderivEstimate coderivative_S(const ParametricProblem& P, const Vec& xbar, const Vec& ybar, const Vec& ystar,
                               Flavor flavor = Flavor::M, const Tolerances& tol = {});

// Every affinely independent subset of the generators that writes target
// as a strictly positive convex combination.
struct HullSupport {
  std::vector<int> index;
  std::vector<double> weight;
};
std::vector<HullSupport> hull_supports(const std::vector<Vec>& generators, const Vec& target, double tol = 1e-9);

// Union over supports of the Minkowski sum over s of term(index_s, weight_s * ystar).
PolySet hull_coderivative(const std::vector<Vec>& generators, const Vec& target, const Vec& ystar, int out_dim,
                          const std::function<PolySet(int, const Vec&)>& term, double tol = 1e-9,
                          std::vector<HullSupport>* used = nullptr);

}  // namespace valfun

#endif
