#ifndef VALFUN_KERNEL_HPP
#define VALFUN_KERNEL_HPP

#include "valfun/polyhedron.hpp"
#include "valfun/problem.hpp"

#include <optional>
#include <string>
#include <vector>

namespace valfun {

enum class Certificate { ExactLp, Heuristic, Pinned };
const char* to_string(Certificate c);

struct SolveResult {
  Vec x;
  double value = 0.0;
  std::vector<Vec> minimizers;
  Certificate certificate = Certificate::Heuristic;
  bool singleton = true;
  std::vector<Vec> face;     // optimal vertices when the LP optimum is not unique
  std::string exact_value;   // rational text on the exact LP path
  std::vector<std::string> notes;
};

struct SolveOptions {
  std::vector<Vec> pinned;  // user-pinned S(x), bypasses the solvers
  int grid = 5;             // multistart points per coordinate
};

// phi(x) and S(x). Exact vertex enumeration when f and g are affine in y,
// multistart penalty descent plus KKT polish otherwise.
SolveResult solve_value(const ParametricProblem& P, const Vec& x, const Tolerances& tol = {},
                        const SolveOptions& opt = {});

// y-feasible set at x when all g_i are affine in y.
Polyhedron feasible_polyhedron(const ParametricProblem& P, const Vec& x);

struct MultiplierPolyhedron {
  Vec x, y;
  std::vector<int> active;
  Polyhedron H;  // over u in R^p
  std::vector<Vec> vertices;
  bool bounded = true;
  bool empty() const { return vertices.empty(); }
  bool singleton() const { return vertices.size() == 1 && bounded; }
};

MultiplierPolyhedron multipliers(const ParametricProblem& P, const Vec& x, const Vec& y, const Tolerances& tol = {});

struct LicqReport {
  bool holds = true;
  int rank = 0;
  std::vector<int> active;
  Vec singular_values;
};

struct MfcqReport {
  bool holds = true;
  Vec witness;  // u >= 0 with grad_y g^T u = 0, max entry 1, when MFCQ fails
};

std::vector<int> active_set(const ParametricProblem& P, const Vec& x, const Vec& y, const Tolerances& tol = {});
LicqReport check_licq(const ParametricProblem& P, const Vec& x, const Vec& y, const Tolerances& tol = {});
MfcqReport check_mfcq(const ParametricProblem& P, const Vec& x, const Vec& y, const Tolerances& tol = {});

}  // namespace valfun

#endif
