#include "valfun/coderiv.hpp"

#include "valfun/errors.hpp"
#include "valfun/lp.hpp"

#include <algorithm>
#include <cmath>

namespace valfun {

const char* to_string(Flavor f) { return f == Flavor::M ? "M" : "C"; }

namespace {

constexpr int kCTypeCap = 12;

Vec unit(int dim, int j) {
  Vec e = Vec::Zero(dim);
  e(j) = 1.0;
  return e;
}

bool same_shape(const Mat& a, const Mat& b) { return a.rows() == b.rows() && a.cols() == b.cols(); }

bool same_hform(const Polyhedron& a, const Polyhedron& b) {
  if (!same_shape(a.C(), b.C()) || !same_shape(a.E(), b.E())) return false;
  return a.C() == b.C() && a.d() == b.d() && a.E() == b.E() && a.e() == b.e() && a.open_rows() == b.open_rows();
}

Polyhedron boxed(const Polyhedron& B) {
  Polyhedron Q = B.closure();
  for (int j = 0; j < Q.dim(); ++j) {
    Q.add_le(unit(Q.dim(), j), 1.0);
    Q.add_le(-unit(Q.dim(), j), 1.0);
  }
  return Q;
}

std::string index_label(int i) { return "g" + std::to_string(i + 1); }

}  // namespace

BranchFamily mho(const KktPoint& kkt, const Vec& ustar, Flavor flavor, const Tolerances& tol) {
  const LagrangianEval& ev = kkt.ev;
  const int m = static_cast<int>(ev.y.size());
  const int p = static_cast<int>(ev.u.size());
  if (ustar.size() != p) throw Error("u* has dimension " + std::to_string(ustar.size()) + ", expected " + std::to_string(p));
  const std::vector<int>& theta = kkt.part.theta;
  const int T = static_cast<int>(theta.size());
  if (flavor == Flavor::M && T > tol.branch_cap)
    throw Error("|theta| = " + std::to_string(T) + " exceeds the branch cap " + std::to_string(tol.branch_cap) +
                "; raise --branch-cap or use --flavor C");
  if (flavor == Flavor::C && T > std::max(kCTypeCap, tol.branch_cap))
    throw Error("|theta| = " + std::to_string(T) + " is too large for C-type enumeration");

  const int dim = m + p;
  auto grad_row = [&](int i) {
    Vec r = Vec::Zero(dim);
    r.head(m) = ev.gy.row(i).transpose();
    return r;
  };
  Polyhedron base(dim);
  for (int i : kkt.part.nu) base.add_eq(grad_row(i), -ustar(i));
  for (int i : kkt.part.eta) base.add_eq(unit(dim, m + i), 0.0);

  BranchFamily F;
  F.kkt = kkt;
  F.ustar = ustar;
  F.flavor = flavor;
  const int cases = flavor == Flavor::M ? 3 : 2;
  long total = 1;
  for (int k = 0; k < T; ++k) total *= cases;
  std::vector<int> digit(T, 0);
  for (long code = 0; code < total; ++code) {
    long r = code;
    for (int k = T - 1; k >= 0; --k) {
      digit[k] = static_cast<int>(r % cases);
      r /= cases;
    }
    Polyhedron B = base;
    std::string label;
    for (int k = 0; k < T; ++k) {
      const int i = theta[k];
      const Vec ci = unit(dim, m + i);
      const Vec gi = grad_row(i);
      std::string part;
      if (flavor == Flavor::M) {
        if (digit[k] == 0) {
          B.add_eq(ci, 0.0);
          part = "c=0";
        } else if (digit[k] == 1) {
          B.add_eq(gi, -ustar(i));
          part = "e=0";
        } else {
          B.add_le(-gi, ustar(i), true);
          B.add_le(-ci, 0.0, true);
          part = "e>0,c>0";
        }
      } else {
        if (digit[k] == 0) {
          B.add_le(-ci, 0.0);
          B.add_le(-gi, ustar(i));
          part = "e>=0,c>=0";
        } else {
          B.add_le(ci, 0.0);
          B.add_le(gi, -ustar(i));
          part = "e<=0,c<=0";
        }
      }
      if (!label.empty()) label += " ";
      label += index_label(i) + ":" + part;
    }
    if (label.empty()) label = "base";
    if (!feasible(B)) continue;
    if (!B.open_rows().empty() && interior_slack(B) <= 1e-12) continue;
    bool dup = false;
    for (const auto& b : F.branches)
      if (same_hform(b.poly, B)) dup = true;
    if (!dup) F.branches.push_back({std::move(B), label});
  }
  return F;
}

bool family_covers(const BranchFamily& outer, const BranchFamily& inner, double tol) {
  const KktPoint& kkt = inner.kkt;
  const int m = static_cast<int>(kkt.y.size());
  const int dim = m + static_cast<int>(kkt.u.size());
  const std::vector<int>& theta = kkt.part.theta;
  const int T = static_cast<int>(theta.size());
  long cells = 1;
  for (int k = 0; k < T; ++k) cells *= 4;
  for (const auto& b : inner.branches) {
    const Polyhedron base = b.poly.closure();
    for (long code = 0; code < cells; ++code) {
      Polyhedron cell = base;
      long r = code;
      for (int k = 0; k < T; ++k, r /= 4) {
        const int i = theta[k];
        Vec e = Vec::Zero(dim);
        e.head(m) = kkt.ev.gy.row(i).transpose();
        const double sc = (r % 4) & 1 ? 1.0 : -1.0;
        const double se = (r % 4) & 2 ? 1.0 : -1.0;
        cell.add_le(sc * unit(dim, m + i), 0.0);
        cell.add_le(se * e, -se * inner.ustar(i));
      }
      if (!feasible(cell)) continue;
      bool hit = false;
      for (const auto& o : outer.branches)
        if (includes(o.poly, cell, tol)) {
          hit = true;
          break;
        }
      if (!hit) return false;
    }
  }
  return true;
}

Mat lambda_map(const KktPoint& kkt) {
  const LagrangianEval& ev = kkt.ev;
  return vstack(hstack(ev.hyx, ev.gx.transpose()), hstack(ev.hyy, ev.gy.transpose()));
}

CqLambdaReport check_cq_lambda(const KktPoint& kkt, const Tolerances& tol) {
  CqLambdaReport R;
  const int p = static_cast<int>(kkt.u.size());
  R.flavor = static_cast<int>(kkt.part.theta.size()) > tol.branch_cap ? Flavor::C : Flavor::M;
  BranchFamily F = mho(kkt, Vec::Zero(p), R.flavor, tol);
  const Mat J = lambda_map(kkt);
  const double eps = 1e-9 * (1.0 + J.cwiseAbs().maxCoeff());
  for (const auto& b : F.branches) {
    Polyhedron box = boxed(b.poly);
    if (R.holala) {
      for (Eigen::Index r = 0; r < J.rows() && R.holala; ++r)
        for (double sgn : {1.0, -1.0}) {
          Vec c = sgn * J.row(r).transpose();
          auto z = argmax(box, c);
          if (z && c.dot(*z) > eps) {
            R.holala = false;
            R.holala_witness = *z;
            break;
          }
        }
    }
    if (R.cq) {
      Polyhedron K = box;
      K.add_eq(J, Vec::Zero(J.rows()));
      for (int j = 0; j < K.dim() && R.cq; ++j)
        for (double sgn : {1.0, -1.0}) {
          Vec c = sgn * unit(K.dim(), j);
          auto z = argmax(K, c);
          if (z && c.dot(*z) > 1e-9) {
            R.cq = false;
            R.cq_witness = *z / z->lpNorm<Eigen::Infinity>();
            break;
          }
        }
    }
  }
  return R;
}

CoderivEstimate coderivative_lambda(const KktPoint& kkt, const Vec& ustar, Flavor flavor, const Tolerances& tol) {
  CoderivEstimate E;
  E.kind = "D*Lambda";
  E.input = ustar;
  const int n = static_cast<int>(kkt.x.size());
  const int m = static_cast<int>(kkt.y.size());
  CqLambdaReport cq = check_cq_lambda(kkt, tol);
  if (cq.cq)
    E.log.add("CQ for the multiplier map", Verdict::Verified);
  else {
    E.log.add("CQ for the multiplier map", Verdict::Failed, "witness (a,c) = " + format_vec(*cq.cq_witness));
    E.notes.push_back("unverified-hypothesis");
  }
  E.log.add("Lipschitz-like multiplier map", cq.holala ? Verdict::Verified : Verdict::Failed,
            cq.holala ? "coderivative at 0 is {0}" : "map nonzero at (a,c) = " + format_vec(*cq.holala_witness));
  if (cq.flavor == Flavor::C) E.notes.push_back("qualification checked on the C-type family");
  if (cq.holala && ustar.lpNorm<Eigen::Infinity>() == 0.0) {
    E.result = PolySet::point(Vec::Zero(n + m), "lipschitz-like");
    return E;
  }
  BranchFamily F = mho(kkt, ustar, flavor, tol);
  const Mat J = lambda_map(kkt);
  E.result = PolySet(n + m);
  for (const auto& b : F.branches) E.result.add({b.poly, J, Vec::Zero(n + m), b.label});
  if (F.empty()) E.notes.push_back("empty branch family");
  return E;
}

PolySet apply(const Relation& R, const Vec& v) {
  if (v.size() != R.in_dim) throw Error("relation input has the wrong dimension");
  PolySet out(R.out_dim);
  for (const auto& pc : R.pieces) {
    Polyhedron Q = pc.domain;
    Q.add_eq(pc.in, v - pc.in_offset);
    if (!feasible(Q)) continue;
    out.add({std::move(Q), pc.out, pc.out_offset, pc.tag});
  }
  return out;
}

PolySet chain(const PolySet& Z, const Relation& R, const Vec& shift_in, const Vec& shift_out) {
  const int k = Z.dim() - R.in_dim;
  if (k != R.out_dim) throw Error("chain dimension mismatch");
  PolySet out(k);
  for (const auto& zp : Z.pieces()) {
    const int q = zp.domain.dim();
    Mat Mx = zp.map.topRows(k), My = zp.map.bottomRows(R.in_dim);
    Vec bx = zp.offset.head(k), by = zp.offset.tail(R.in_dim);
    for (const auto& rp : R.pieces) {
      const int r = rp.domain.dim();
      Polyhedron D = Polyhedron::product(zp.domain, rp.domain);
      Mat eq(R.in_dim, q + r);
      eq << -My, rp.in;
      D.add_eq(eq, by + shift_in - rp.in_offset);
      if (!feasible(D)) continue;
      std::string tag = zp.tag.empty() ? rp.tag : (rp.tag.empty() ? zp.tag : zp.tag + " | " + rp.tag);
      out.add({std::move(D), hstack(Mx, rp.out), bx + rp.out_offset + shift_out, tag});
    }
  }
  return out;
}

Relation jacobian_relation(const Mat& ds, const std::string& tag) {
  Relation R;
  R.in_dim = static_cast<int>(ds.rows());
  R.out_dim = static_cast<int>(ds.cols());
  R.kind = "jacobian";
  R.lipschitz_like = true;
  R.pieces.push_back({Polyhedron(R.in_dim), Mat::Identity(R.in_dim, R.in_dim), Vec::Zero(R.in_dim),
                      ds.transpose(), Vec::Zero(R.out_dim), tag});
  return R;
}

Relation region_relation(const Mat& ds, const std::vector<Vec>& normals, const std::string& tag) {
  Relation R;
  const int m = static_cast<int>(ds.rows()), n = static_cast<int>(ds.cols());
  const int k = static_cast<int>(normals.size());
  R.in_dim = m;
  R.out_dim = n;
  R.kind = "region";
  Polyhedron D(m + k);
  for (int j = 0; j < k; ++j) D.add_le(-unit(m + k, m + j), 0.0);
  Mat in = Mat::Zero(m, m + k);
  in.leftCols(m) = Mat::Identity(m, m);
  Mat out(n, m + k);
  out.leftCols(m) = ds.transpose();
  for (int j = 0; j < k; ++j) out.col(m + j) = normals[j];
  R.pieces.push_back({std::move(D), in, Vec::Zero(m), out, Vec::Zero(n), tag});
  return R;
}

Relation coderivative_S_relation(const ParametricProblem& P, const Vec& xbar, const Vec& ybar, Flavor flavor,
                                 const Tolerances& tol) {
  Relation R;
  R.in_dim = P.m();
  R.out_dim = P.n();
  R.kind = "multiplier-branches";
  Verdict cv = P.convex_in_y();
  if (cv == Verdict::Failed) throw HypothesisError("convex in y", "the multiplier-branch coderivative of S needs convexity in y");
  R.log.add("convex in y", cv);
  MfcqReport mf = check_mfcq(P, xbar, ybar, tol);
  if (!mf.holds) throw HypothesisError("MFCQ", "fails at y = " + format_vec(ybar) + ", witness " + format_vec(mf.witness));
  R.log.add("MFCQ", Verdict::Verified, "at y = " + format_vec(ybar));
  MultiplierPolyhedron M = multipliers(P, xbar, ybar, tol);
  if (M.empty()) throw HypothesisError("KKT", "no multiplier at y = " + format_vec(ybar));

  bool all_holala = true, all_cq = true;
  Mat J0;
  bool curvature_varies = false;
  for (std::size_t k = 0; k < M.vertices.size(); ++k) {
    KktPoint kkt = make_kkt_point(P, xbar, ybar, M.vertices[k], tol);
    Mat J = lambda_map(kkt);
    if (k == 0)
      J0 = J;
    else if ((J - J0).cwiseAbs().maxCoeff() > 1e-12)
      curvature_varies = true;
    CqLambdaReport cq = check_cq_lambda(kkt, tol);
    all_cq = all_cq && cq.cq;
    all_holala = all_holala && cq.holala;
    BranchFamily F = mho(kkt, Vec::Zero(P.p()), flavor, tol);
    Mat in = -hstack(kkt.ev.hyy, kkt.ev.gy.transpose());
    Mat out = hstack(kkt.ev.hyx, kkt.ev.gx.transpose());
    std::string prefix = M.vertices.size() > 1 ? "u" + std::to_string(k + 1) + " " : "";
    for (const auto& b : F.branches)
      R.pieces.push_back({b.poly, in, Vec::Zero(P.m()), out, Vec::Zero(P.n()), prefix + b.label});
  }
  if (M.vertices.size() > 1)
    R.log.add("union over multiplier vertices", curvature_varies ? Verdict::Asserted : Verdict::Verified,
              std::to_string(M.vertices.size()) + " vertices" +
                  (curvature_varies ? ", second derivatives vary with u" : ""));
  R.log.add("CQ for the multiplier map", all_cq ? Verdict::Verified : Verdict::Failed);
  R.log.add("Lipschitz-like S", all_holala ? Verdict::Verified : Verdict::Failed,
            all_holala ? "coderivative at 0 is {0}" : "not certified");
  R.lipschitz_like = all_holala;
  if (!all_cq) R.notes.push_back("unverified-hypothesis");
  return R;
}

CoderivEstimate coderivative_S(const ParametricProblem& P, const Vec& xbar, const Vec& ybar, const Vec& ystar,
                               Flavor flavor, const Tolerances& tol) {
  Relation R = coderivative_S_relation(P, xbar, ybar, flavor, tol);
  CoderivEstimate E;
  E.kind = "D*S";
  E.input = ystar;
  E.log = R.log;
  E.notes = R.notes;
  E.result = apply(R, ystar);
  return E;
}

std::vector<HullSupport> hull_supports(const std::vector<Vec>& generators, const Vec& target, double tol) {
  std::vector<HullSupport> out;
  const int K = static_cast<int>(generators.size());
  const int d = static_cast<int>(target.size());
  const int maxsize = std::min(K, d + 1);
  double scale = 1.0 + target.lpNorm<Eigen::Infinity>();
  for (const auto& g : generators) scale = std::max(scale, 1.0 + g.lpNorm<Eigen::Infinity>());
  Vec rhs(d + 1);
  rhs << target, 1.0;
  long visited = 0;
  for (int s = 1; s <= maxsize; ++s) {
    std::vector<int> idx(s);
    for (int j = 0; j < s; ++j) idx[j] = j;
    while (true) {
      if (++visited > 200000) throw Error("too many candidate supports for the convex-hull coderivative");
      Mat B(d + 1, s);
      for (int j = 0; j < s; ++j) B.col(j) << generators[idx[j]], 1.0;
      if (numeric_rank(B, 1e-9 * scale) == s) {
        Vec a = B.colPivHouseholderQr().solve(rhs);
        if ((B * a - rhs).lpNorm<Eigen::Infinity>() <= tol * scale && a.minCoeff() > tol)
          out.push_back({idx, to_std(a)});
      }
      int j = s - 1;
      while (j >= 0 && idx[j] == K - s + j) --j;
      if (j < 0) break;
      ++idx[j];
      for (int t = j + 1; t < s; ++t) idx[t] = idx[t - 1] + 1;
    }
  }
  return out;
}

PolySet hull_coderivative(const std::vector<Vec>& generators, const Vec& target, const Vec& ystar, int out_dim,
                          const std::function<PolySet(int, const Vec&)>& term, double tol,
                          std::vector<HullSupport>* used) {
  std::vector<HullSupport> sup = hull_supports(generators, target, tol);
  if (used) *used = sup;
  PolySet out(out_dim);
  for (const auto& h : sup) {
    PolySet acc = term(h.index[0], h.weight[0] * ystar);
    std::string tag = "support{" + std::to_string(h.index[0] + 1);
    for (std::size_t s = 1; s < h.index.size(); ++s) {
      acc = minkowski_sum(acc, term(h.index[s], h.weight[s] * ystar));
      tag += "," + std::to_string(h.index[s] + 1);
    }
    out.append(prune_empty(acc).retagged(tag + "}"));
  }
  return out;
}

}  // namespace valfun
