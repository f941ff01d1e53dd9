#ifndef VALFUN_ORACLE_HPP
#define VALFUN_ORACLE_HPP

#include "valfun/kernel.hpp"

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

namespace valfun {

// Evaluation settings shared by the finite-difference oracles.
struct FdOptions {
  Tolerances tol;
  SolveOptions solve;  // pinned minimizers are ignored away from the base point
};

struct FdReport {
  Vec point;
  std::vector<double> steps;  // h, h / 2
  Vec gradient;
  Mat hessian;  // Richardson combination of the two steps
  Mat plain;    // second differences at step h
  double error = 0.0;  // |H(h) - H(h/2)| in the max norm
  bool stable = false;
};

double fd_value(const ParametricProblem& P, const Vec& x, const FdOptions& opt = {});
Vec fd_gradient(const ParametricProblem& P, const Vec& x, double h = 1e-5, const FdOptions& opt = {});
// One-sided derivative of phi at x along d, with one Richardson level.
double fd_directional(const ParametricProblem& P, const Vec& x, const Vec& d, double h = 1e-6,
                      const FdOptions& opt = {});
FdReport fd_hessian(const ParametricProblem& P, const Vec& x, double h = 1e-3, const FdOptions& opt = {});

struct LpOracleResult {
  mpq_class value;
  std::vector<std::vector<mpq_class>> argmin;  // every optimal vertex, sorted
  std::size_t vertex_count = 0;
};

// min c.y over {A y <= b} by enumerating every m-subset of rows in exact
// arithmetic. Throws HypothesisError for an empty or unbounded polytope.
LpOracleResult lp_value_oracle(const std::vector<std::vector<mpq_class>>& A, const std::vector<mpq_class>& b,
                               const std::vector<mpq_class>& c, const mpq_class& c0 = 0);
LpOracleResult lp_value_oracle(const Mat& A, const Vec& b, const Vec& c);
// phi(x) for a problem affine in y; data are read from the expressions in
// exact arithmetic.
LpOracleResult lp_value_oracle(const ParametricProblem& P, const Vec& x);

struct TrackSample {
  double t = 0.0;
  Vec y;
  Vec u;
};

struct Track {
  std::vector<TrackSample> samples;  // ordered by t, the base point included
  bool truncated = false;
  std::string reason;
};

// s(xbar + t d) and lambda at t = k h for k = -steps..steps. Stops in each
// direction once S stops being a singleton or the active set changes.
Track track_solution(const ParametricProblem& P, const Vec& xbar, const Vec& d, int steps = 2, double h = 1e-3,
                     const FdOptions& opt = {});

struct FdJacobian {
  Mat ds;  // m x n
  Mat du;  // p x n
  bool truncated = false;
  std::string reason;
};

// Central differences of the tracked s and lambda along each coordinate.
FdJacobian fd_solution_jacobian(const ParametricProblem& P, const Vec& xbar, double h = 1e-3,
                                const FdOptions& opt = {});

enum class ProbeMap { Lambda, S, Subdiff };
const char* to_string(ProbeMap m);

struct GraphPoint {
  Vec x;
  Vec y;  // empty for Subdiff
  Vec v;  // multiplier for Lambda, generator for Subdiff, y for S
};

// Graph points of the chosen map at parameters drawn uniformly from the
// ball of the given radius around xbar.
std::vector<GraphPoint> graph_probe(const ParametricProblem& P, ProbeMap map, const Vec& xbar, double radius,
                                    int samples, unsigned seed = 7, const FdOptions& opt = {});

}  // namespace valfun

#endif
