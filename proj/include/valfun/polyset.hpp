#ifndef VALFUN_POLYSET_HPP
#define VALFUN_POLYSET_HPP

#include "valfun/polyhedron.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace valfun {

// One piece of a union: the image {map z + offset : z in domain}.
struct Piece {
  Polyhedron domain;
  Mat map;
  Vec offset;
  std::string tag;
};

class PolySet {
 public:
  explicit PolySet(int dim = 0) : dim_(dim) {}

  static PolySet point(const Vec& v, const std::string& tag = "");
  // Image of P under z -> M z + b.
  static PolySet image(const Polyhedron& P, const Mat& M, const Vec& b, const std::string& tag = "");

  int dim() const { return dim_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  std::size_t size() const { return pieces_.size(); }
  bool empty() const { return pieces_.empty(); }

  void add(Piece piece);
  void append(const PolySet& other);

  PolySet translated(const Vec& v) const;
  PolySet mapped(const Mat& M, const Vec& b) const;
  PolySet retagged(const std::string& prefix) const;

 private:
  int dim_;
  std::vector<Piece> pieces_;
};

PolySet scale(const PolySet& S, double t);
PolySet minkowski_sum(const PolySet& a, const PolySet& b);

// Drops pieces whose domain closure is empty.
PolySet prune_empty(const PolySet& S);

enum class Membership { Inside, Boundary, Outside };
const char* to_string(Membership m);

struct MemberResult {
  Membership verdict = Membership::Outside;
  int piece = -1;
  double distance = 0.0;  // lower bound on the distance when outside
};

MemberResult member(const Vec& point, const PolySet& S, double tol);
MemberResult member(const Vec& point, const Piece& piece, double tol);

// Per-coordinate [lo, hi] of a piece image; nullopt for an empty domain.
// Unbounded directions come back as +-infinity.
std::optional<std::pair<Vec, Vec>> image_bounds(const Piece& piece);

// Drops empty pieces and repeated point pieces (first tag kept).
PolySet compact(const PolySet& S, double tol = 1e-12);

// The single point of S when every piece image is that point.
std::optional<Vec> singleton_value(const PolySet& S, double tol);

// Random points of (closures of) pieces, via LP extreme points along
// random directions inside a box of the given radius.
std::vector<Vec> sample_points(const PolySet& S, std::mt19937_64& rng, int count, double radius = 10.0);

}  // namespace valfun

#endif
