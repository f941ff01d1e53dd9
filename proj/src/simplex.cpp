#include "valfun/lp.hpp"

#include <gmpxx.h>

#include <cmath>
#include <stdexcept>

namespace valfun {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

namespace {

template <class T>
struct Num;

template <>
struct Num<double> {
  static double eps() { return 1e-9; }
  static double abs(double v) { return std::abs(v); }
};

template <>
struct Num<mpq_class> {
  static mpq_class eps() { return 0; }
  static mpq_class abs(const mpq_class& v) { return ::abs(v); }
};

// Dense tableau simplex; Bland's rule keeps it finite under degeneracy.
template <class T>
class Tableau {
 public:
  Tableau(int rows, int cols) : R(rows), C(cols), t((rows + 1) * (cols + 1), T(0)), basis(rows, -1) {}

  T& at(int i, int j) { return t[i * (C + 1) + j]; }
  T& rhs(int i) { return t[i * (C + 1) + C]; }
  T& obj(int j) { return t[R * (C + 1) + j]; }
  T& obj_value() { return t[R * (C + 1) + C]; }

  void pivot(int r, int s) {
    T p = at(r, s);
    for (int j = 0; j <= C; ++j) at(r, j) /= p;
    for (int i = 0; i <= R; ++i) {
      if (i == r) continue;
      T f = at(i, s);
      if (f == 0) continue;
      for (int j = 0; j <= C; ++j) {
        if (at(r, j) == 0) continue;
        at(i, j) -= f * at(r, j);
      }
      if (Num<T>::abs(at(i, s)) <= Num<T>::eps()) at(i, s) = 0;
    }
    basis[r] = s;
  }

  // Returns false when unbounded.
  bool run(const std::vector<bool>& allowed) {
    const T eps = Num<T>::eps();
    for (long guard = 0;; ++guard) {
      if (guard > 200000) throw std::runtime_error("simplex iteration limit");
      int s = -1;
      for (int j = 0; j < C; ++j)
        if (allowed[j] && obj(j) < -eps) {
          s = j;
          break;
        }
      if (s < 0) return true;
      int r = -1;
      T best = 0;
      for (int i = 0; i < R; ++i) {
        if (at(i, s) > eps) {
          T ratio = rhs(i) / at(i, s);
          if (r < 0 || ratio < best || (ratio == best && basis[i] < basis[r])) {
            r = i;
            best = ratio;
          }
        }
      }
      if (r < 0) return false;
      pivot(r, s);
    }
  }

  int R, C;
  std::vector<T> t;
  std::vector<int> basis;
};

}  // namespace

template <class T>
LpResult<T> solve_lp(const LpData<T>& lp) {
  const int nv = lp.nvar;
  // column layout: [x+ (nv)] [x- for free vars] [slacks (ub rows)] [artificials (all rows)]
  std::vector<int> neg_col(nv, -1);
  int col = nv;
  for (int j = 0; j < nv; ++j)
    if (lp.is_free(j)) neg_col[j] = col++;
  const int nub = static_cast<int>(lp.A_ub.size());
  const int neq = static_cast<int>(lp.A_eq.size());
  const int slack0 = col;
  col += nub;
  const int art0 = col;
  const int R = nub + neq;
  const int C = art0 + R;

  Tableau<T> tab(R, C);
  for (int i = 0; i < R; ++i) {
    const std::vector<T>& row = i < nub ? lp.A_ub[i] : lp.A_eq[i - nub];
    T b = i < nub ? lp.b_ub[i] : lp.b_eq[i - nub];
    bool flip = b < 0;
    auto put = [&](int j, const T& v) { tab.at(i, j) = flip ? T(-v) : v; };
    for (int j = 0; j < nv; ++j) {
      if (row[j] == 0) continue;
      put(j, row[j]);
      if (neg_col[j] >= 0) put(neg_col[j], T(-row[j]));
    }
    if (i < nub) put(slack0 + i, T(1));
    tab.at(i, art0 + i) = 1;
    tab.rhs(i) = flip ? T(-b) : b;
    tab.basis[i] = art0 + i;
  }

  // phase 1: minimize the sum of artificials
  for (int j = 0; j <= C; ++j) {
    T s = 0;
    if (j < art0 || j == C)
      for (int i = 0; i < R; ++i) s += tab.at(i, j);
    tab.obj(j) = (j == C) ? T(-s) : (j < art0 ? T(-s) : T(0));
  }
  std::vector<bool> allowed(C, true);
  tab.run(allowed);
  T scale = 1;
  for (int i = 0; i < R; ++i)
    if (Num<T>::abs(tab.rhs(i)) > scale) scale = Num<T>::abs(tab.rhs(i));
  LpResult<T> res;
  if (-tab.obj_value() > Num<T>::eps() * scale * 10) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  for (int i = 0; i < R; ++i) {
    if (tab.basis[i] < art0) continue;
    for (int j = 0; j < art0; ++j)
      if (Num<T>::abs(tab.at(i, j)) > Num<T>::eps()) {
        tab.pivot(i, j);
        break;
      }
  }
  for (int j = art0; j < C; ++j) allowed[j] = false;

  // phase 2
  std::vector<T> cost(C, T(0));
  for (int j = 0; j < nv; ++j) {
    cost[j] = lp.c[j];
    if (neg_col[j] >= 0) cost[neg_col[j]] = -lp.c[j];
  }
  for (int j = 0; j <= C; ++j) {
    T s = j < C ? cost[j] : T(0);
    for (int i = 0; i < R; ++i) {
      const T& cb = cost[tab.basis[i]];
      if (cb != 0) s -= cb * tab.at(i, j);
    }
    tab.obj(j) = s;
  }
  if (!tab.run(allowed)) {
    res.status = LpStatus::Unbounded;
    return res;
  }
  std::vector<T> z(C, T(0));
  for (int i = 0; i < R; ++i) z[tab.basis[i]] = tab.rhs(i);
  res.x.assign(nv, T(0));
  res.objective = 0;
  for (int j = 0; j < nv; ++j) {
    res.x[j] = z[j];
    if (neg_col[j] >= 0) res.x[j] -= z[neg_col[j]];
    res.objective += lp.c[j] * res.x[j];
  }
  res.status = LpStatus::Optimal;
  return res;
}

template LpResult<double> solve_lp<double>(const LpData<double>&);
template LpResult<mpq_class> solve_lp<mpq_class>(const LpData<mpq_class>&);

}  // namespace valfun
