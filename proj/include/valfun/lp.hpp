#ifndef VALFUN_LP_HPP
#define VALFUN_LP_HPP

#include <string>
#include <vector>

namespace valfun {

enum class LpStatus { Optimal, Infeasible, Unbounded };

// minimize c.x  subject to  A_ub x <= b_ub,  A_eq x = b_eq,
// x_j >= 0 unless free[j].  T is double or mpq_class.
template <class T>
struct LpData {
  int nvar = 0;
  std::vector<T> c;
  std::vector<std::vector<T>> A_ub;
  std::vector<T> b_ub;
  std::vector<std::vector<T>> A_eq;
  std::vector<T> b_eq;
  std::vector<bool> free;  // empty means all free

  explicit LpData(int nv = 0) : nvar(nv), c(nv, T(0)) {}
  void leq(std::vector<T> row, T rhs) {
    A_ub.push_back(std::move(row));
    b_ub.push_back(std::move(rhs));
  }
  void eq(std::vector<T> row, T rhs) {
    A_eq.push_back(std::move(row));
    b_eq.push_back(std::move(rhs));
  }
  bool is_free(int j) const { return free.empty() || free[j]; }
};

template <class T>
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<T> x;
  T objective = T(0);
};

template <class T>
LpResult<T> solve_lp(const LpData<T>& lp);

const char* to_string(LpStatus s);

}  // namespace valfun

#endif
