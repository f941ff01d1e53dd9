#include "valfun/oracle.hpp"

#include "valfun/errors.hpp"
#include "valfun/firstorder.hpp"
#include "valfun/lp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace valfun {

namespace {

SolveOptions away(const FdOptions& opt) {
  SolveOptions s = opt.solve;
  s.pinned.clear();
  return s;
}

}  // namespace

double fd_value(const ParametricProblem& P, const Vec& x, const FdOptions& opt) {
  return solve_value(P, x, opt.tol, away(opt)).value;
}

Vec fd_gradient(const ParametricProblem& P, const Vec& x, double h, const FdOptions& opt) {
  const int n = P.n();
  Vec g(n);
  for (int j = 0; j < n; ++j) {
    Vec e = Vec::Zero(n);
    e(j) = h;
    g(j) = (fd_value(P, x + e, opt) - fd_value(P, x - e, opt)) / (2 * h);
  }
  return g;
}

double fd_directional(const ParametricProblem& P, const Vec& x, const Vec& d, double h, const FdOptions& opt) {
  const double f0 = fd_value(P, x, opt);
  const double d1 = (fd_value(P, x + h * d, opt) - f0) / h;
  const double d2 = (fd_value(P, x + 0.5 * h * d, opt) - f0) / (0.5 * h);
  return 2 * d2 - d1;
}

namespace {

Mat second_differences(const ParametricProblem& P, const Vec& x, double h, double f0, const FdOptions& opt) {
  const int n = P.n();
  Mat H(n, n);
  auto at = [&](int i, double si, int j, double sj) {
    Vec z = x;
    z(i) += si * h;
    z(j) += sj * h;
    return fd_value(P, z, opt);
  };
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e(i) = h;
    H(i, i) = (fd_value(P, x + e, opt) - 2 * f0 + fd_value(P, x - e, opt)) / (h * h);
    for (int j = 0; j < i; ++j) {
      double v = (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) / (4 * h * h);
      H(i, j) = H(j, i) = v;
    }
  }
  return H;
}

}  // namespace

FdReport fd_hessian(const ParametricProblem& P, const Vec& x, double h, const FdOptions& opt) {
  FdReport r;
  r.point = x;
  r.steps = {h, h / 2};
  r.gradient = fd_gradient(P, x, 1e-5, opt);
  const double f0 = fd_value(P, x, opt);
  r.plain = second_differences(P, x, h, f0, opt);
  Mat half = second_differences(P, x, h / 2, f0, opt);
  r.hessian = (4 * half - r.plain) / 3;
  r.error = (r.plain - half).lpNorm<Eigen::Infinity>();
  r.stable = r.error <= 1e-3 * (1.0 + r.hessian.lpNorm<Eigen::Infinity>());
  return r;
}

namespace {

using QVec = std::vector<mpq_class>;
using QMat = std::vector<QVec>;

// Solves the square system exactly; nullopt when singular.
std::optional<QVec> gauss(QMat M, QVec rhs) {
  const std::size_t k = rhs.size();
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    while (piv < k && M[piv][col] == 0) ++piv;
    if (piv == k) return std::nullopt;
    std::swap(M[piv], M[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col || M[r][col] == 0) continue;
      mpq_class f = M[r][col] / M[col][col];
      for (std::size_t c = col; c < k; ++c) M[r][c] -= f * M[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  QVec y(k);
  for (std::size_t i = 0; i < k; ++i) y[i] = rhs[i] / M[i][i];
  return y;
}

bool bounded_recession(const QMat& A, std::size_t m) {
  for (std::size_t j = 0; j < m; ++j)
    for (int sg : {1, -1}) {
      LpData<mpq_class> lp(static_cast<int>(m));
      lp.c[j] = mpq_class(-sg);
      for (const auto& row : A) lp.leq(row, 0);
      for (std::size_t k = 0; k < m; ++k) {
        QVec e(m, 0);
        e[k] = 1;
        lp.leq(e, 1);
        e[k] = -1;
        lp.leq(e, 1);
      }
      auto res = solve_lp(lp);
      if (res.status == LpStatus::Optimal && res.objective != 0) return false;
    }
  return true;
}

QVec to_q(const Vec& v) {
  QVec q(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) q[i] = mpq_class(v(i));
  return q;
}

}  // namespace

LpOracleResult lp_value_oracle(const QMat& A, const QVec& b, const QVec& c, const mpq_class& c0) {
  const std::size_t p = A.size(), m = c.size();
  if (m == 0 || m > 8) throw Error("lp_value_oracle supports 1 to 8 variables");
  if (p < m) throw HypothesisError("compactness", "fewer constraints than variables");
  if (!bounded_recession(A, m)) throw HypothesisError("compactness", "polyhedron {A y <= b} is unbounded");
  LpOracleResult r;
  std::vector<QVec> verts;
  std::vector<int> pick(m);
  for (std::size_t i = 0; i < m; ++i) pick[i] = static_cast<int>(i);
  while (true) {
    QMat M;
    QVec rhs;
    for (int i : pick) {
      M.push_back(A[i]);
      rhs.push_back(b[i]);
    }
    if (auto y = gauss(M, rhs)) {
      bool ok = true;
      for (std::size_t i = 0; i < p && ok; ++i) {
        mpq_class s = 0;
        for (std::size_t j = 0; j < m; ++j) s += A[i][j] * (*y)[j];
        ok = s <= b[i];
      }
      if (ok && std::find(verts.begin(), verts.end(), *y) == verts.end()) verts.push_back(*y);
    }
    int k = static_cast<int>(m) - 1;
    while (k >= 0 && pick[k] == static_cast<int>(p - m) + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (std::size_t i = k + 1; i < m; ++i) pick[i] = pick[i - 1] + 1;
  }
  if (verts.empty()) throw HypothesisError("S(x) nonempty", "polytope {A y <= b} is empty");
  r.vertex_count = verts.size();
  bool first = true;
  for (const auto& v : verts) {
    mpq_class val = c0;
    for (std::size_t j = 0; j < m; ++j) val += c[j] * v[j];
    if (first || val < r.value) {
      r.value = val;
      r.argmin.clear();
      first = false;
    }
    if (val == r.value) r.argmin.push_back(v);
  }
  std::sort(r.argmin.begin(), r.argmin.end());
  return r;
}

LpOracleResult lp_value_oracle(const Mat& A, const Vec& b, const Vec& c) {
  QMat Aq;
  for (Eigen::Index i = 0; i < A.rows(); ++i) Aq.push_back(to_q(A.row(i).transpose()));
  return lp_value_oracle(Aq, to_q(b), to_q(c));
}

LpOracleResult lp_value_oracle(const ParametricProblem& P, const Vec& x) {
  if (!P.affine_in_y()) throw HypothesisError("affine in y", "lp_value_oracle needs f and g affine in y");
  const int m = P.m(), p = P.p();
  QVec xq = to_q(x), y0(m, 0);
  QVec c(m), b(p);
  QMat A(p, QVec(m));
  for (int i = 0; i < m; ++i) c[i] = P.df().dy[i].eval(xq, y0);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < m; ++j) A[i][j] = P.dg(i).dy[j].eval(xq, y0);
    b[i] = -P.g()[i].eval(xq, y0);
  }
  return lp_value_oracle(A, b, c, P.f().eval(xq, y0));
}

namespace {

struct Probe {
  bool ok = false;
  Vec y, u;
  std::vector<int> active;
  std::string reason;
};

Probe probe_at(const ParametricProblem& P, const Vec& x, const Vec* near, const FdOptions& opt) {
  Probe pr;
  SolveResult S;
  try {
    S = solve_value(P, x, opt.tol, away(opt));
  } catch (const Error& e) {
    pr.reason = e.what();
    return pr;
  }
  if (S.minimizers.size() != 1) {
    pr.reason = "S not single-valued at x = " + format_vec(x);
    return pr;
  }
  pr.y = S.minimizers.front();
  if (near && (pr.y - *near).lpNorm<Eigen::Infinity>() > 0.5) {
    pr.reason = "minimizer jumped at x = " + format_vec(x);
    return pr;
  }
  MultiplierPolyhedron M = multipliers(P, x, pr.y, opt.tol);
  if (!M.singleton()) {
    pr.reason = "multiplier not unique at x = " + format_vec(x);
    return pr;
  }
  pr.u = M.vertices.front();
  pr.active = active_set(P, x, pr.y, opt.tol);
  pr.ok = true;
  return pr;
}

}  // namespace

Track track_solution(const ParametricProblem& P, const Vec& xbar, const Vec& d, int steps, double h,
                     const FdOptions& opt) {
  Track tr;
  Probe base = probe_at(P, xbar, nullptr, opt);
  if (!base.ok) {
    tr.truncated = true;
    tr.reason = base.reason;
    return tr;
  }
  std::vector<TrackSample> neg, pos;
  for (int sg : {-1, 1}) {
    Vec prev = base.y;
    for (int k = 1; k <= steps; ++k) {
      const double t = sg * k * h;
      Probe pr = probe_at(P, xbar + t * d, &prev, opt);
      if (pr.ok && pr.active != base.active) {
        pr.ok = false;
        pr.reason = "active set changes at t = " + format_double(t);
      }
      if (!pr.ok) {
        tr.truncated = true;
        if (tr.reason.empty()) tr.reason = pr.reason;
        break;
      }
      prev = pr.y;
      (sg < 0 ? neg : pos).push_back({t, pr.y, pr.u});
    }
  }
  std::reverse(neg.begin(), neg.end());
  tr.samples = neg;
  tr.samples.push_back({0.0, base.y, base.u});
  tr.samples.insert(tr.samples.end(), pos.begin(), pos.end());
  return tr;
}

FdJacobian fd_solution_jacobian(const ParametricProblem& P, const Vec& xbar, double h, const FdOptions& opt) {
  const int n = P.n();
  FdJacobian J;
  J.ds = Mat::Zero(P.m(), n);
  J.du = Mat::Zero(P.p(), n);
  for (int j = 0; j < n; ++j) {
    Vec e = Vec::Zero(n);
    e(j) = 1.0;
    Track tr = track_solution(P, xbar, e, 1, h, opt);
    if (tr.samples.size() != 3) {
      J.truncated = true;
      J.reason = tr.reason;
      continue;
    }
    J.ds.col(j) = (tr.samples[2].y - tr.samples[0].y) / (2 * h);
    J.du.col(j) = (tr.samples[2].u - tr.samples[0].u) / (2 * h);
  }
  return J;
}

const char* to_string(ProbeMap m) {
  switch (m) {
    case ProbeMap::Lambda: return "Lambda";
    case ProbeMap::S: return "S";
    case ProbeMap::Subdiff: return "subdiff";
  }
  return "?";
}

std::vector<GraphPoint> graph_probe(const ParametricProblem& P, ProbeMap map, const Vec& xbar, double radius,
                                    int samples, unsigned seed, const FdOptions& opt) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int n = P.n();
  std::vector<GraphPoint> out;
  for (int s = 0; s < samples; ++s) {
    Vec d(n);
    for (int j = 0; j < n; ++j) d(j) = N(rng);
    Vec x = xbar + radius * std::pow(U(rng), 1.0 / n) * d / d.norm();
    SolveResult S;
    try {
      S = solve_value(P, x, opt.tol, away(opt));
    } catch (const Error&) {
      continue;
    }
    if (map == ProbeMap::Subdiff) {
      SubdiffEstimate E = first_order(P, x, S, opt.tol);
      for (const auto& g : E.generators) out.push_back({x, Vec(), g.value});
      continue;
    }
    for (const auto& y : S.minimizers) {
      if (map == ProbeMap::S) {
        out.push_back({x, y, y});
        continue;
      }
      MultiplierPolyhedron M = multipliers(P, x, y, opt.tol);
      for (const auto& u : M.vertices) out.push_back({x, y, u});
    }
  }
  return out;
}

}  // namespace valfun
