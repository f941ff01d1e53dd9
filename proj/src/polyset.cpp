#include "valfun/polyset.hpp"

#include "valfun/errors.hpp"
#include "valfun/lp.hpp"

#include <cmath>
#include <limits>

namespace valfun {

const char* to_string(Membership m) {
  switch (m) {
    case Membership::Inside: return "inside";
    case Membership::Boundary: return "boundary";
    case Membership::Outside: return "outside";
  }
  return "?";
}

PolySet PolySet::point(const Vec& v, const std::string& tag) {
  PolySet S(static_cast<int>(v.size()));
  S.add({Polyhedron(0), Mat::Zero(v.size(), 0), v, tag});
  return S;
}

PolySet PolySet::image(const Polyhedron& P, const Mat& M, const Vec& b, const std::string& tag) {
  PolySet S(static_cast<int>(M.rows()));
  S.add({P, M, b, tag});
  return S;
}

void PolySet::add(Piece piece) {
  if (piece.map.rows() != dim_ || piece.offset.size() != dim_ || piece.map.cols() != piece.domain.dim())
    throw Error("PolySet piece dimension mismatch");
  pieces_.push_back(std::move(piece));
}

void PolySet::append(const PolySet& other) {
  if (other.dim_ != dim_) throw Error("PolySet union dimension mismatch");
  for (const auto& p : other.pieces_) pieces_.push_back(p);
}

PolySet PolySet::translated(const Vec& v) const {
  PolySet S = *this;
  for (auto& p : S.pieces_) p.offset += v;
  return S;
}

PolySet PolySet::mapped(const Mat& M, const Vec& b) const {
  PolySet S(static_cast<int>(M.rows()));
  for (const auto& p : pieces_) S.add({p.domain, M * p.map, M * p.offset + b, p.tag});
  return S;
}

PolySet PolySet::retagged(const std::string& prefix) const {
  PolySet S = *this;
  for (auto& p : S.pieces_) p.tag = p.tag.empty() ? prefix : prefix + "/" + p.tag;
  return S;
}

PolySet scale(const PolySet& S, double t) {
  if (!(t > 0)) throw Error("scale factor must be positive");
  PolySet out(S.dim());
  for (const auto& p : S.pieces()) out.add({p.domain, t * p.map, t * p.offset, p.tag});
  return out;
}

PolySet minkowski_sum(const PolySet& a, const PolySet& b) {
  if (a.dim() != b.dim()) throw Error("Minkowski sum dimension mismatch");
  PolySet out(a.dim());
  for (const auto& pa : a.pieces())
    for (const auto& pb : b.pieces()) {
      std::string tag = pa.tag.empty() ? pb.tag : (pb.tag.empty() ? pa.tag : pa.tag + " + " + pb.tag);
      out.add({Polyhedron::product(pa.domain, pb.domain), hstack(pa.map, pb.map), pa.offset + pb.offset, tag});
    }
  return out;
}

PolySet prune_empty(const PolySet& S) {
  PolySet out(S.dim());
  for (const auto& p : S.pieces())
    if (feasible(p.domain)) out.add(p);
  return out;
}

namespace {

// Rows of the membership LP over (z, s): domain rows plus |M z + b - q| <= s.
LpData<double> distance_lp(const Piece& pc, const Vec& q) {
  const int k = pc.domain.dim();
  const int t = static_cast<int>(q.size());
  LpData<double> lp(k + 1);
  lp.free.assign(k + 1, true);
  lp.free[k] = false;
  lp.c[k] = 1.0;
  const Polyhedron& P = pc.domain;
  for (Eigen::Index i = 0; i < P.C().rows(); ++i) {
    auto row = to_std(P.C().row(i).transpose());
    row.push_back(0.0);
    lp.leq(row, P.d()(i));
  }
  for (Eigen::Index i = 0; i < P.E().rows(); ++i) {
    auto row = to_std(P.E().row(i).transpose());
    row.push_back(0.0);
    lp.eq(row, P.e()(i));
  }
  for (int i = 0; i < t; ++i) {
    std::vector<double> row(k + 1, 0.0);
    for (int j = 0; j < k; ++j) row[j] = pc.map(i, j);
    row[k] = -1.0;
    lp.leq(row, q(i) - pc.offset(i));
    for (int j = 0; j < k; ++j) row[j] = -pc.map(i, j);
    lp.leq(row, pc.offset(i) - q(i));
  }
  return lp;
}

}  // namespace

MemberResult member(const Vec& q, const Piece& pc, double tol) {
  MemberResult r;
  if (q.size() != pc.map.rows()) throw Error("membership dimension mismatch");
  auto res = solve_lp(distance_lp(pc, q));
  if (res.status != LpStatus::Optimal) {
    r.verdict = Membership::Outside;
    r.distance = std::numeric_limits<double>::infinity();
    return r;
  }
  r.distance = std::max(0.0, res.objective);
  if (r.distance > tol) {
    r.verdict = Membership::Outside;
    return r;
  }
  if (pc.domain.open_rows().empty()) {
    r.verdict = Membership::Inside;
    return r;
  }
  // strictness: maximize the slack of open rows over the nearest preimages;
  // using the attained distance (not tol) keeps the verdict monotone in tol
  const double reach = r.distance + 1e-12 * (1.0 + q.lpNorm<Eigen::Infinity>());
  const int k = pc.domain.dim();
  const int t = static_cast<int>(q.size());
  const Polyhedron& P = pc.domain;
  LpData<double> lp(k + 1);
  lp.c[k] = -1.0;
  for (Eigen::Index i = 0; i < P.C().rows(); ++i) {
    auto row = to_std(P.C().row(i).transpose());
    row.push_back(P.is_open(static_cast<int>(i)) ? 1.0 : 0.0);
    lp.leq(row, P.d()(i));
  }
  for (Eigen::Index i = 0; i < P.E().rows(); ++i) {
    auto row = to_std(P.E().row(i).transpose());
    row.push_back(0.0);
    lp.eq(row, P.e()(i));
  }
  for (int i = 0; i < t; ++i) {
    std::vector<double> row(k + 1, 0.0);
    for (int j = 0; j < k; ++j) row[j] = pc.map(i, j);
    lp.leq(row, q(i) - pc.offset(i) + reach);
    for (int j = 0; j < k; ++j) row[j] = -pc.map(i, j);
    lp.leq(row, pc.offset(i) - q(i) + reach);
  }
  std::vector<double> cap(k + 1, 0.0);
  cap[k] = 1.0;
  lp.leq(cap, 1.0);
  auto strict = solve_lp(lp);
  const bool inside = strict.status == LpStatus::Optimal && strict.x[k] > 1e-9 * (1.0 + q.lpNorm<Eigen::Infinity>());
  r.verdict = inside ? Membership::Inside : Membership::Boundary;
  return r;
}

MemberResult member(const Vec& q, const PolySet& S, double tol) {
  MemberResult best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < S.pieces().size(); ++i) {
    MemberResult r = member(q, S.pieces()[i], tol);
    r.piece = static_cast<int>(i);
    if (r.verdict == Membership::Inside) return r;
    if (r.verdict == Membership::Boundary && best.verdict != Membership::Boundary) {
      best = r;
    } else if (best.verdict == Membership::Outside && r.distance < best.distance) {
      best = r;
    }
  }
  if (best.verdict == Membership::Outside) best.piece = -1;
  return best;
}

namespace {

LpData<double> domain_lp(const Polyhedron& P) {
  LpData<double> lp(P.dim());
  for (Eigen::Index i = 0; i < P.C().rows(); ++i) lp.leq(to_std(P.C().row(i).transpose()), P.d()(i));
  for (Eigen::Index i = 0; i < P.E().rows(); ++i) lp.eq(to_std(P.E().row(i).transpose()), P.e()(i));
  return lp;
}

}  // namespace

std::optional<std::pair<Vec, Vec>> image_bounds(const Piece& pc) {
  const int t = static_cast<int>(pc.map.rows());
  Vec lo(t), hi(t);
  if (pc.domain.dim() == 0) {
    return std::make_pair(pc.offset, pc.offset);
  }
  LpData<double> base = domain_lp(pc.domain);
  for (int i = 0; i < t; ++i) {
    for (int sgn : {1, -1}) {
      LpData<double> lp = base;
      for (int j = 0; j < pc.domain.dim(); ++j) lp.c[j] = sgn * pc.map(i, j);
      auto res = solve_lp(lp);
      if (res.status == LpStatus::Infeasible) return std::nullopt;
      double v = res.status == LpStatus::Unbounded ? -std::numeric_limits<double>::infinity() : res.objective;
      if (sgn == 1)
        lo(i) = v + pc.offset(i);
      else
        hi(i) = -v + pc.offset(i);
    }
  }
  return std::make_pair(lo, hi);
}

PolySet compact(const PolySet& S, double tol) {
  PolySet out(S.dim());
  std::vector<Vec> seen;
  for (const auto& pc : S.pieces()) {
    auto b = image_bounds(pc);
    if (!b) continue;
    const double scale = 1.0 + b->first.cwiseAbs().maxCoeff();
    if (b->first.allFinite() && b->second.allFinite() &&
        (b->second - b->first).lpNorm<Eigen::Infinity>() <= tol * scale) {
      Vec v = 0.5 * (b->first + b->second);
      bool dup = false;
      for (const auto& w : seen) dup = dup || (w - v).lpNorm<Eigen::Infinity>() <= tol * scale;
      if (dup) continue;
      seen.push_back(v);
      out.add({Polyhedron(0), Mat::Zero(S.dim(), 0), v, pc.tag});
      continue;
    }
    out.add(pc);
  }
  return out;
}

std::optional<Vec> singleton_value(const PolySet& S, double tol) {
  std::optional<Vec> value;
  for (const auto& pc : S.pieces()) {
    auto b = image_bounds(pc);
    if (!b) continue;
    if (((b->second - b->first).array() > tol).any()) return std::nullopt;
    Vec mid = 0.5 * (b->first + b->second);
    if (!value)
      value = mid;
    else if ((*value - mid).lpNorm<Eigen::Infinity>() > tol)
      return std::nullopt;
  }
  return value;
}

std::vector<Vec> sample_points(const PolySet& S, std::mt19937_64& rng, int count, double radius) {
  std::vector<Vec> out;
  std::vector<const Piece*> live;
  for (const auto& pc : S.pieces())
    if (feasible(pc.domain)) live.push_back(&pc);
  if (live.empty()) return out;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int s = 0; s < count; ++s) {
    const Piece& pc = *live[rng() % live.size()];
    const int k = pc.domain.dim();
    if (k == 0) {
      out.push_back(pc.offset);
      continue;
    }
    LpData<double> lp = domain_lp(pc.domain);
    for (int j = 0; j < k; ++j) {
      std::vector<double> row(k, 0.0);
      row[j] = 1.0;
      lp.leq(row, radius);
      row[j] = -1.0;
      lp.leq(row, radius);
    }
    Vec acc = Vec::Zero(k);
    double wsum = 0.0;
    for (int corner = 0; corner < 3; ++corner) {
      for (int j = 0; j < k; ++j) lp.c[j] = gauss(rng);
      auto res = solve_lp(lp);
      if (res.status != LpStatus::Optimal) continue;
      double w = unif(rng) + 1e-3;
      acc += w * to_vec(res.x);
      wsum += w;
    }
    if (wsum == 0.0) continue;
    out.push_back(pc.map * (acc / wsum) + pc.offset);
  }
  return out;
}

}  // namespace valfun
