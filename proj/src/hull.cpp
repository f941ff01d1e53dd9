#include "valfun/hull.hpp"

#include "valfun/errors.hpp"
#include "valfun/lp.hpp"

#include <algorithm>
#include <numeric>

namespace valfun {

namespace {

// min s over a >= 0, sum a = 1, |sum a_k p_k - q|_inf <= s.
LpResult<double> hull_lp(const std::vector<Vec>& pts, const std::vector<int>& use, const Vec& q) {
  const int K = static_cast<int>(use.size());
  const int d = static_cast<int>(q.size());
  LpData<double> lp(K + 1);
  lp.free.assign(K + 1, false);
  lp.c[K] = 1.0;
  std::vector<double> ones(K + 1, 1.0);
  ones[K] = 0.0;
  lp.eq(ones, 1.0);
  for (int i = 0; i < d; ++i) {
    std::vector<double> row(K + 1, 0.0);
    for (int k = 0; k < K; ++k) row[k] = pts[use[k]](i);
    row[K] = -1.0;
    lp.leq(row, q(i));
    for (int k = 0; k < K; ++k) row[k] = -pts[use[k]](i);
    lp.leq(row, -q(i));
  }
  return solve_lp(lp);
}

}  // namespace

ConvexHull::ConvexHull(std::vector<Vec> points) : points_(std::move(points)) {
  if (points_.empty()) throw Error("convex hull of an empty list");
  dim_ = static_cast<int>(points_[0].size());
  std::vector<int> distinct;
  for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
    bool dup = false;
    for (int j : distinct)
      if ((points_[i] - points_[j]).lpNorm<Eigen::Infinity>() <= 1e-12) dup = true;
    if (!dup) distinct.push_back(i);
  }
  for (int i : distinct) {
    std::vector<int> others;
    for (int j : distinct)
      if (j != i) others.push_back(j);
    if (others.empty()) {
      generators_.push_back(i);
      continue;
    }
    auto res = hull_lp(points_, others, points_[i]);
    if (res.status != LpStatus::Optimal || res.objective > 1e-10) generators_.push_back(i);
  }
}

HullCertificate caratheodory_reduce(const std::vector<Vec>& points, std::vector<double> weights, double tol) {
  const int d = points.empty() ? 0 : static_cast<int>(points[0].size());
  std::vector<int> supp;
  for (int i = 0; i < static_cast<int>(weights.size()); ++i)
    if (weights[i] > tol) supp.push_back(i);
  while (static_cast<int>(supp.size()) > d + 1) {
    Mat M(d + 1, supp.size());
    for (std::size_t s = 0; s < supp.size(); ++s) {
      M.block(0, s, d, 1) = points[supp[s]];
      M(d, s) = 1.0;
    }
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
    Vec mu = svd.matrixV().col(supp.size() - 1);
    if (mu.maxCoeff() <= 0) mu = -mu;
    double t = std::numeric_limits<double>::infinity();
    int drop = -1;
    for (std::size_t s = 0; s < supp.size(); ++s)
      if (mu(s) > 1e-14 && weights[supp[s]] / mu(s) < t) {
        t = weights[supp[s]] / mu(s);
        drop = static_cast<int>(s);
      }
    if (drop < 0) break;
    for (std::size_t s = 0; s < supp.size(); ++s) weights[supp[s]] -= t * mu(s);
    weights[supp[drop]] = 0.0;
    std::vector<int> next;
    for (int i : supp)
      if (weights[i] > tol) next.push_back(i);
    supp = next;
  }
  HullCertificate c;
  double total = 0.0;
  for (int i : supp) total += weights[i];
  c.point = Vec::Zero(d);
  for (int i : supp) {
    c.supports.push_back(i);
    c.weights.push_back(weights[i] / total);
    c.point += (weights[i] / total) * points[i];
  }
  return c;
}

std::optional<HullCertificate> ConvexHull::certify(const Vec& q, double tol) const {
  if (q.size() != dim_) throw Error("hull membership dimension mismatch");
  auto res = hull_lp(points_, generators_, q);
  if (res.status != LpStatus::Optimal || res.objective > tol) return std::nullopt;
  std::vector<Vec> gp;
  for (int i : generators_) gp.push_back(points_[i]);
  std::vector<double> w(res.x.begin(), res.x.begin() + generators_.size());
  for (double& v : w) v = std::max(v, 0.0);
  HullCertificate c = caratheodory_reduce(gp, w);
  for (int& s : c.supports) s = generators_[s];
  return c;
}

PolySet ConvexHull::as_polyset(const std::string& tag) const {
  const int K = static_cast<int>(generators_.size());
  Mat M(dim_, K);
  for (int k = 0; k < K; ++k) M.col(k) = points_[generators_[k]];
  if (K == 1) return PolySet::point(M.col(0), tag);
  return PolySet::image(Polyhedron::simplex(K), M, Vec::Zero(dim_), tag);
}

}  // namespace valfun
