#ifndef VALFUN_HULL_HPP
#define VALFUN_HULL_HPP

#include "valfun/polyset.hpp"

#include <optional>
#include <vector>

namespace valfun {

struct HullCertificate {
  Vec point;                  // sum of weights[s] * points[supports[s]]
  std::vector<int> supports;  // at most dim + 1 indices
  std::vector<double> weights;
};

class ConvexHull {
 public:
  explicit ConvexHull(std::vector<Vec> points);

  int dim() const { return dim_; }
  const std::vector<Vec>& points() const { return points_; }
  // Indices of the extreme points (duplicates collapsed to the first copy).
  const std::vector<int>& generators() const { return generators_; }

  std::optional<HullCertificate> certify(const Vec& q, double tol = 1e-9) const;
  bool contains(const Vec& q, double tol = 1e-9) const { return certify(q, tol).has_value(); }

  PolySet as_polyset(const std::string& tag = "hull") const;

 private:
  int dim_;
  std::vector<Vec> points_;
  std::vector<int> generators_;
};

// Carathéodory reduction: rewrites a convex combination over any number of
// points as one over at most dim + 1 of them, preserving the sum.
HullCertificate caratheodory_reduce(const std::vector<Vec>& points, std::vector<double> weights, double tol = 1e-12);

}  // namespace valfun

#endif
