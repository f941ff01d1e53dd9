#ifndef VALFUN_POLYHEDRON_HPP
#define VALFUN_POLYHEDRON_HPP

#include "valfun/linalg.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace valfun {

struct VForm {
  std::vector<Vec> vertices;
  std::vector<Vec> rays;
  std::vector<Vec> lines;
  bool empty() const { return vertices.empty(); }
  bool bounded() const { return rays.empty() && lines.empty(); }
};

// Generators of {z : A z <= b, E z = e}. Vertices of a polyhedron with
// lineality are representatives of its minimal faces. T is double or
// mpq_class; output is sorted lexicographically.
template <class T>
struct VFormT {
  std::vector<std::vector<T>> vertices, rays, lines;
};

template <class T>
VFormT<T> double_description(int dim, const std::vector<std::vector<T>>& A, const std::vector<T>& b,
                             const std::vector<std::vector<T>>& E, const std::vector<T>& e);

// {z : C z <= d, E z = e}; rows listed in open_rows are strict (z with
// C_i z < d_i). Algorithms work on the closure.
class Polyhedron {
 public:
  Polyhedron() : Polyhedron(0) {}
  explicit Polyhedron(int dim);

  static Polyhedron box(const Vec& lo, const Vec& hi);
  static Polyhedron point(const Vec& v);
  static Polyhedron simplex(int k);  // {a >= 0, sum a = 1}
  static Polyhedron product(const Polyhedron& a, const Polyhedron& b);

  int dim() const { return dim_; }
  const Mat& C() const { return C_; }
  const Vec& d() const { return d_; }
  const Mat& E() const { return E_; }
  const Vec& e() const { return e_; }
  const std::vector<int>& open_rows() const { return open_; }
  bool is_open(int row) const;

  void add_le(const Vec& row, double rhs, bool open = false);
  void add_eq(const Vec& row, double rhs);
  void add_le(const Mat& rows, const Vec& rhs);
  void add_eq(const Mat& rows, const Vec& rhs);

  // Closure test with absolute slack tol.
  bool satisfies(const Vec& z, double tol = 1e-9) const;

  Polyhedron closure() const;

 private:
  int dim_;
  Mat C_, E_;
  Vec d_, e_;
  std::vector<int> open_;
};

// Throws Error when dim exceeds max_dim.
VForm vertices(const Polyhedron& P, bool rational = false, int max_dim = 12);

bool feasible(const Polyhedron& P);

// max c.z over the closure; -inf when empty, +inf when unbounded.
double support(const Polyhedron& P, const Vec& c);

// A maximizer of c.z over the closure; nullopt when empty or unbounded.
std::optional<Vec> argmax(const Polyhedron& P, const Vec& c);

// Closure of inner is contained in the closure of outer, row by row.
bool includes(const Polyhedron& outer, const Polyhedron& inner, double tol = 1e-9);

// Largest s with C_open z + s <= d_open on the closure (capped at 1);
// negative infinity when infeasible.
double interior_slack(const Polyhedron& P);

}  // namespace valfun

#endif
