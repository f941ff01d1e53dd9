#include "valfun/kernel.hpp"

#include "valfun/errors.hpp"
#include "valfun/lp.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace valfun {

const char* to_string(Certificate c) {
  switch (c) {
    case Certificate::ExactLp: return "exact-LP";
    case Certificate::Heuristic: return "heuristic-multistart";
    case Certificate::Pinned: return "user-pinned";
  }
  return "?";
}

namespace {

std::vector<Vec> dedup_sorted(std::vector<Vec> ys, double radius) {
  std::sort(ys.begin(), ys.end(), [](const Vec& a, const Vec& b) { return lex_less(a, b); });
  std::vector<Vec> out;
  for (auto& y : ys) {
    bool dup = false;
    for (const auto& k : out)
      if ((y - k).norm() <= radius) dup = true;
    if (!dup) out.push_back(std::move(y));
  }
  return out;
}

[[noreturn]] void infeasible(const Vec& x) {
  throw HypothesisError("S(x) nonempty", "feasible set is empty at x = " + format_vec(x) +
                                             " (standing assumption S(x) != {} violated)");
}

template <class T>
T from_double(double v) {
  return T(v);
}

SolveResult solve_exact_lp(const ParametricProblem& P, const Vec& x, const Tolerances& tol) {
  const int m = P.m(), p = P.p();
  if (p == 0) throw HypothesisError("compactness", "no constraints, the feasible set R^m is unbounded");
  SolveResult r;
  r.x = x;
  r.certificate = Certificate::ExactLp;
  std::vector<Vec> opt;
  if (tol.rational) {
    std::vector<mpq_class> xq(x.size()), y0(m, mpq_class(0));
    for (Eigen::Index j = 0; j < x.size(); ++j) xq[j] = mpq_class(x(j));
    std::vector<mpq_class> c(m);
    for (int i = 0; i < m; ++i) c[i] = P.df().dy[i].eval(xq, y0);
    mpq_class f0 = P.f().eval(xq, y0);
    std::vector<std::vector<mpq_class>> A(p, std::vector<mpq_class>(m));
    std::vector<mpq_class> b(p);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < m; ++j) A[i][j] = P.dg(i).dy[j].eval(xq, y0);
      b[i] = -P.g()[i].eval(xq, y0);
    }
    auto V = double_description<mpq_class>(m, A, b, {}, {});
    if (V.vertices.empty()) infeasible(x);
    if (!V.rays.empty() || !V.lines.empty())
      throw HypothesisError("compactness", "feasible set is unbounded at x = " + format_vec(x));
    std::vector<mpq_class> val;
    for (const auto& v : V.vertices) {
      mpq_class s = f0;
      for (int i = 0; i < m; ++i) s += c[i] * v[i];
      val.push_back(s);
    }
    mpq_class best = *std::min_element(val.begin(), val.end());
    for (std::size_t k = 0; k < val.size(); ++k)
      if (val[k] == best) {
        Vec y(m);
        for (int i = 0; i < m; ++i) y(i) = V.vertices[k][i].get_d();
        opt.push_back(y);
      }
    r.value = best.get_d();
    r.exact_value = best.get_str();
  } else {
    Polyhedron F = feasible_polyhedron(P, x);
    VForm V = vertices(F, false, 64);
    if (V.vertices.empty()) infeasible(x);
    if (!V.bounded()) throw HypothesisError("compactness", "feasible set is unbounded at x = " + format_vec(x));
    Vec y0 = Vec::Zero(m);
    Vec c = P.fy(x, y0);
    double f0 = P.f_value(x, y0);
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> val;
    for (const auto& v : V.vertices) {
      val.push_back(f0 + c.dot(v));
      best = std::min(best, val.back());
    }
    const double band = 1e-9 * (1.0 + std::abs(best));
    for (std::size_t k = 0; k < val.size(); ++k)
      if (val[k] <= best + band) opt.push_back(V.vertices[k]);
    r.value = best;
  }
  opt = dedup_sorted(opt, 0.0);
  if (opt.size() == 1) {
    r.minimizers = opt;
    r.singleton = true;
  } else {
    r.face = opt;
    Vec centroid = Vec::Zero(m);
    for (const auto& v : opt) centroid += v;
    centroid /= static_cast<double>(opt.size());
    r.minimizers = opt;
    r.minimizers.push_back(centroid);
    r.minimizers = dedup_sorted(r.minimizers, tol.dedup);
    r.singleton = false;
    r.notes.push_back("optimal face has " + std::to_string(opt.size()) + " vertices; minimizers list vertices plus centroid");
  }
  return r;
}

struct Search {
  Vec lo, hi;
};

Search search_box(const ParametricProblem& P, const Vec& x) {
  Search s;
  const int m = P.m();
  s.lo.resize(m);
  s.hi.resize(m);
  if (P.y_box()) {
    for (int i = 0; i < m; ++i) {
      s.lo(i) = (*P.y_box())[i].first;
      s.hi(i) = (*P.y_box())[i].second;
    }
    return s;
  }
  bool affine_g = true;
  for (int i = 0; i < P.p(); ++i)
    for (const auto& row : P.dg(i).dyy)
      for (const auto& e : row) affine_g = affine_g && e.is_zero();
  if (!affine_g || P.p() == 0)
    throw HypothesisError("y_box", "the NLP path needs y_box when the feasible set is not a polytope in y");
  VForm V = vertices(feasible_polyhedron(P, x), false, 64);
  if (V.vertices.empty()) infeasible(x);
  if (!V.bounded()) throw HypothesisError("compactness", "feasible set is unbounded at x = " + format_vec(x));
  s.lo = s.hi = V.vertices[0];
  for (const auto& v : V.vertices) {
    s.lo = s.lo.cwiseMin(v);
    s.hi = s.hi.cwiseMax(v);
  }
  return s;
}

double penalty(const ParametricProblem& P, const Vec& x, const Vec& y, double rho) {
  double F = P.f_value(x, y);
  if (P.p() > 0) {
    Vec g = P.g_values(x, y).cwiseMax(0.0);
    F += 0.5 * rho * g.squaredNorm();
  }
  return F;
}

Vec penalty_grad(const ParametricProblem& P, const Vec& x, const Vec& y, double rho) {
  Vec G = P.fy(x, y);
  if (P.p() > 0) {
    Vec g = P.g_values(x, y).cwiseMax(0.0);
    G += rho * P.gy(x, y).transpose() * g;
  }
  return G;
}

Vec descend(const ParametricProblem& P, const Vec& x, Vec y, const Vec& lo, const Vec& hi) {
  for (double rho = 10.0; rho <= 1e7; rho *= 10.0) {
    double step = 1.0;
    for (int it = 0; it < 400; ++it) {
      Vec G = penalty_grad(P, x, y, rho);
      double F = penalty(P, x, y, rho);
      bool moved = false;
      for (int bt = 0; bt < 60; ++bt) {
        Vec yn = (y - step * G).cwiseMax(lo).cwiseMin(hi);
        double Fn = penalty(P, x, yn, rho);
        if (Fn <= F - 1e-4 * G.dot(y - yn)) {
          double dist = (yn - y).norm();
          y = yn;
          moved = dist > 1e-14;
          step = std::min(step * 2.0, 1e3);
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
  }
  return y;
}

// Active-set Newton on the KKT system, started from a descent point.
bool kkt_polish(const ParametricProblem& P, const Vec& x, const Vec& y0, Vec& y_out) {
  const int m = P.m(), p = P.p();
  Vec y = y0;
  std::vector<int> A;
  Vec g0 = P.g_values(x, y);
  for (int i = 0; i < p; ++i)
    if (g0(i) > -1e-4) A.push_back(i);
  Vec u = Vec::Zero(p);
  for (int outer = 0; outer < 2 * p + 4; ++outer) {
    const int a = static_cast<int>(A.size());
    Vec uA = Vec::Zero(a);
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      u.setZero();
      for (int k = 0; k < a; ++k) u(A[k]) = uA(k);
      LagrangianEval ev = differentiate(P, x, y, u);
      Vec r(m + a);
      r.head(m) = ev.grad_y;
      for (int k = 0; k < a; ++k) r(m + k) = ev.g(A[k]);
      double scale = 1.0 + ev.fy.lpNorm<Eigen::Infinity>();
      if (r.lpNorm<Eigen::Infinity>() <= 1e-14 * scale) {
        converged = true;
        break;
      }
      Mat J = Mat::Zero(m + a, m + a);
      J.topLeftCorner(m, m) = ev.hyy;
      for (int k = 0; k < a; ++k) {
        J.block(0, m + k, m, 1) = ev.gy.row(A[k]).transpose();
        J.block(m + k, 0, 1, m) = ev.gy.row(A[k]);
      }
      Vec delta = J.completeOrthogonalDecomposition().solve(-r);
      y += delta.head(m);
      uA += delta.tail(a);
      if (!y.allFinite()) return false;
      if (it > 8 && r.lpNorm<Eigen::Infinity>() <= 1e-11 * scale) {
        converged = true;
        break;
      }
    }
    if (!converged) return false;
    int worst = -1;
    double wv = -1e-10;
    for (int k = 0; k < a; ++k)
      if (uA(k) < wv) {
        wv = uA(k);
        worst = k;
      }
    if (worst >= 0) {
      A.erase(A.begin() + worst);
      continue;
    }
    Vec g = P.g_values(x, y);
    int viol = -1;
    double gv = 1e-10;
    for (int i = 0; i < p; ++i)
      if (std::find(A.begin(), A.end(), i) == A.end() && g(i) > gv) {
        gv = g(i);
        viol = i;
      }
    if (viol >= 0) {
      A.push_back(viol);
      std::sort(A.begin(), A.end());
      continue;
    }
    y_out = y;
    return true;
  }
  return false;
}

SolveResult solve_nlp(const ParametricProblem& P, const Vec& x, const Tolerances& tol, const SolveOptions& opt) {
  const int m = P.m();
  Search box = search_box(P, x);
  Vec width = box.hi - box.lo;
  Vec lo = box.lo - 0.25 * width - Vec::Constant(m, 1e-3);
  Vec hi = box.hi + 0.25 * width + Vec::Constant(m, 1e-3);
  const int k = std::max(1, opt.grid);
  long total = 1;
  for (int i = 0; i < m; ++i) total *= k;
  std::vector<Vec> starts;
  if (total <= 4096) {
    for (long idx = 0; idx < total; ++idx) {
      Vec s(m);
      long rem = idx;
      for (int i = 0; i < m; ++i) {
        s(i) = box.lo(i) + width(i) * ((rem % k) + 0.5) / k;
        rem /= k;
      }
      starts.push_back(s);
    }
  } else {
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    for (int t = 0; t < 4096; ++t) {
      Vec s(m);
      for (int i = 0; i < m; ++i) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        s(i) = box.lo(i) + width(i) * (static_cast<double>(state >> 11) / 9007199254740992.0);
      }
      starts.push_back(s);
    }
  }

  struct Cand {
    Vec y;
    double f;
  };
  std::vector<Cand> cands;
  bool any_unpolished = false;
  for (const auto& s : starts) {
    Vec y = descend(P, x, s, lo, hi);
    Vec yp;
    if (kkt_polish(P, x, y, yp) && (yp - y).norm() <= 1e-2 * (1.0 + y.norm()) &&
        P.f_value(x, yp) <= P.f_value(x, y) + 1e-6) {
      y = yp;
    } else {
      any_unpolished = true;
    }
    if (P.p() > 0 && P.g_values(x, y).maxCoeff() > 1e-7) continue;
    cands.push_back({y, P.f_value(x, y)});
  }
  if (cands.empty()) infeasible(x);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : cands) best = std::min(best, c.f);
  const double band = 1e-9 * (1.0 + std::abs(best));
  std::vector<Vec> ys;
  for (const auto& c : cands)
    if (c.f <= best + band) ys.push_back(c.y);
  SolveResult r;
  r.x = x;
  r.value = best;
  r.certificate = Certificate::Heuristic;
  r.minimizers = dedup_sorted(ys, tol.dedup);
  r.singleton = r.minimizers.size() == 1;
  r.notes.push_back("S(x) from multistart descent; minimizers may be under-enumerated");
  if (any_unpolished) r.notes.push_back("some starts did not pass the KKT polish");
  for (const auto& y : r.minimizers)
    if (((y - lo).array().abs() < 1e-9).any() || ((hi - y).array().abs() < 1e-9).any())
      r.notes.push_back("minimizer " + format_vec(y) + " touches the enlarged search box; y_box may be too small");
  return r;
}

}  // namespace

Polyhedron feasible_polyhedron(const ParametricProblem& P, const Vec& x) {
  const int m = P.m();
  Vec y0 = Vec::Zero(m);
  Polyhedron F(m);
  if (P.p() > 0) F.add_le(P.gy(x, y0), -P.g_values(x, y0));
  return F;
}

SolveResult solve_value(const ParametricProblem& P, const Vec& x, const Tolerances& tol, const SolveOptions& opt) {
  if (x.size() != P.n()) throw Error("dimension mismatch: x has " + std::to_string(x.size()) + " entries, n = " + std::to_string(P.n()));
  if (!opt.pinned.empty()) {
    SolveResult r;
    r.x = x;
    r.certificate = Certificate::Pinned;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : opt.pinned) {
      if (y.size() != P.m()) throw Error("dimension mismatch: pinned minimizer size");
      if (P.p() > 0 && P.g_values(x, y).maxCoeff() > tol.act)
        throw HypothesisError("pinned minimizer", "y = " + format_vec(y) + " is infeasible at x = " + format_vec(x));
      best = std::min(best, P.f_value(x, y));
    }
    std::vector<Vec> ys;
    for (const auto& y : opt.pinned)
      if (P.f_value(x, y) <= best + 1e-9 * (1.0 + std::abs(best))) ys.push_back(y);
    if (ys.size() < opt.pinned.size()) r.notes.push_back("pinned points with larger objective were dropped");
    r.value = best;
    r.minimizers = dedup_sorted(ys, tol.dedup);
    r.singleton = r.minimizers.size() == 1;
    return r;
  }
  if (P.affine_in_y()) return solve_exact_lp(P, x, tol);
  return solve_nlp(P, x, tol, opt);
}

std::vector<int> active_set(const ParametricProblem& P, const Vec& x, const Vec& y, const Tolerances& tol) {
  std::vector<int> A;
  if (P.p() == 0) return A;
  Vec g = P.g_values(x, y);
  for (int i = 0; i < P.p(); ++i) {
    if (g(i) > tol.act)
      throw HypothesisError("feasibility", "g" + std::to_string(i + 1) + " = " + format_double(g(i)) + " > 0 at y = " + format_vec(y));
    if (g(i) >= -tol.act) A.push_back(i);
  }
  return A;
}

MultiplierPolyhedron multipliers(const ParametricProblem& P, const Vec& x, const Vec& y, const Tolerances& tol) {
  const int p = P.p(), m = P.m();
  MultiplierPolyhedron M;
  M.x = x;
  M.y = y;
  M.active = active_set(P, x, y, tol);
  const int a = static_cast<int>(M.active.size());
  Vec fy = P.fy(x, y);
  Mat Gy = p > 0 ? P.gy(x, y) : Mat(0, m);
  M.H = Polyhedron(p);
  for (int i = 0; i < p; ++i) {
    Vec e = Vec::Zero(p);
    e(i) = 1.0;
    if (std::find(M.active.begin(), M.active.end(), i) == M.active.end())
      M.H.add_eq(e, 0.0);
    else
      M.H.add_le(-e, 0.0);
  }
  if (p > 0) M.H.add_eq(Gy.transpose(), -fy);
  const double scale = 1.0 + fy.lpNorm<Eigen::Infinity>();
  if (a == 0) {
    if (fy.lpNorm<Eigen::Infinity>() <= tol.kkt * scale) M.vertices.push_back(Vec::Zero(p));
    return M;
  }
  Mat GA = select_rows(Gy, M.active);  // a x m
  Mat K = GA.transpose();               // m x a
  Vec u0 = K.completeOrthogonalDecomposition().solve(-fy);
  if ((K * u0 + fy).lpNorm<Eigen::Infinity>() > tol.kkt * scale) return M;
  Mat N = null_space(K, tol.rank);
  auto lift = [&](const Vec& uA) {
    Vec u = Vec::Zero(p);
    for (int k = 0; k < a; ++k) u(M.active[k]) = std::abs(uA(k)) < 1e-12 ? 0.0 : uA(k);
    return u;
  };
  if (N.cols() == 0) {
    if (u0.minCoeff() >= -tol.act) M.vertices.push_back(lift(u0.cwiseMax(0.0)));
    return M;
  }
  Polyhedron W(static_cast<int>(N.cols()));
  W.add_le(-N, u0);
  VForm V = vertices(W, tol.rational, 64);
  M.bounded = V.bounded();
  for (const auto& w : V.vertices) {
    Vec uA = (u0 + N * w).cwiseMax(0.0);
    M.vertices.push_back(lift(uA));
  }
  M.vertices = dedup_sorted(M.vertices, 1e-9);
  return M;
}

LicqReport check_licq(const ParametricProblem& P, const Vec& x, const Vec& y, const Tolerances& tol) {
  LicqReport r;
  r.active = active_set(P, x, y, tol);
  if (r.active.empty()) return r;
  Mat GA = select_rows(P.gy(x, y), r.active);
  Eigen::JacobiSVD<Mat> svd(GA);
  r.singular_values = svd.singularValues();
  r.rank = numeric_rank(GA, tol.rank);
  r.holds = r.rank == static_cast<int>(r.active.size());
  return r;
}

MfcqReport check_mfcq(const ParametricProblem& P, const Vec& x, const Vec& y, const Tolerances& tol) {
  MfcqReport r;
  std::vector<int> A = active_set(P, x, y, tol);
  if (A.empty()) return r;
  const int a = static_cast<int>(A.size());
  Mat GA = select_rows(P.gy(x, y), A);
  LpData<double> lp(a);
  lp.free.assign(a, false);
  for (int k = 0; k < a; ++k) lp.c[k] = -1.0;
  for (int j = 0; j < P.m(); ++j) lp.eq(to_std(GA.col(j)), 0.0);
  lp.eq(std::vector<double>(a, 1.0), 1.0);
  auto res = solve_lp(lp);
  if (res.status == LpStatus::Optimal) {
    r.holds = false;
    Vec w = Vec::Zero(P.p());
    for (int k = 0; k < a; ++k) w(A[k]) = res.x[k];
    r.witness = w / w.maxCoeff();
  }
  return r;
}

}  // namespace valfun
