#include "valfun/polyhedron.hpp"

#include "valfun/errors.hpp"
#include "valfun/lp.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace valfun {

namespace {

template <class T>
struct DD;

template <>
struct DD<double> {
  static double eps() { return 1e-9; }
  static double abs(double v) { return std::abs(v); }
  static double to_double(double v) { return v; }
};

template <>
struct DD<mpq_class> {
  static mpq_class eps() { return 0; }
  static mpq_class abs(const mpq_class& v) { return ::abs(v); }
  static double to_double(const mpq_class& v) { return v.get_d(); }
};

class Bits {
 public:
  explicit Bits(int n = 0) : w_((n + 63) / 64, 0) {}
  void set(int i) { w_[i / 64] |= (std::uint64_t{1} << (i % 64)); }
  void grow(int n) { w_.resize((n + 63) / 64, 0); }
  Bits operator&(const Bits& o) const {
    Bits r;
    r.w_.resize(w_.size());
    for (std::size_t k = 0; k < w_.size(); ++k) r.w_[k] = w_[k] & o.w_[k];
    return r;
  }
  bool subset_of(const Bits& o) const {
    for (std::size_t k = 0; k < w_.size(); ++k)
      if (w_[k] & ~o.w_[k]) return false;
    return true;
  }

 private:
  std::vector<std::uint64_t> w_;
};

template <class T>
using Row = std::vector<T>;

template <class T>
T dot(const Row<T>& a, const Row<T>& b) {
  T s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != 0 && b[i] != 0) s += a[i] * b[i];
  return s;
}

template <class T>
void normalize(Row<T>& r) {
  T mx = 0;
  for (const T& v : r)
    if (DD<T>::abs(v) > mx) mx = DD<T>::abs(v);
  if (mx == 0) return;
  for (T& v : r) v /= mx;
  if constexpr (std::is_same_v<T, double>)
    for (T& v : r)
      if (std::abs(v) < 1e-13) v = 0;
}

template <class T>
struct Ray {
  Row<T> v;
  Bits zero;
};

}  // namespace

template <class T>
VFormT<T> double_description(int dim, const std::vector<std::vector<T>>& A, const std::vector<T>& b,
                             const std::vector<std::vector<T>>& E, const std::vector<T>& e) {
  const int K = dim + 1;  // homogenized: w = (z, t)
  const T eps = DD<T>::eps();
  struct Cons {
    Row<T> h;
    bool equality;
  };
  std::vector<Cons> cons;
  for (std::size_t i = 0; i < E.size(); ++i) {
    Row<T> h(E[i].begin(), E[i].end());
    h.push_back(-e[i]);
    cons.push_back({h, true});
  }
  {
    Row<T> h(K, T(0));
    h[dim] = -1;
    cons.push_back({h, false});
  }
  for (std::size_t i = 0; i < A.size(); ++i) {
    Row<T> h(A[i].begin(), A[i].end());
    h.push_back(-b[i]);
    cons.push_back({h, false});
  }
  const int ncons = static_cast<int>(cons.size());

  std::vector<Row<T>> lines;
  for (int i = 0; i < K; ++i) {
    Row<T> l(K, T(0));
    l[i] = 1;
    lines.push_back(l);
  }
  std::vector<Ray<T>> rays;

  for (int ci = 0; ci < ncons; ++ci) {
    const Row<T>& h = cons[ci].h;
    int pick = -1;
    T hl = 0;
    for (std::size_t k = 0; k < lines.size(); ++k) {
      T v = dot(h, lines[k]);
      if (DD<T>::abs(v) > eps) {
        pick = static_cast<int>(k);
        hl = v;
        break;
      }
    }
    if (pick >= 0) {
      Row<T> l = lines[pick];
      if (hl > 0) {
        for (T& v : l) v = -v;
        hl = -hl;
      }
      lines.erase(lines.begin() + pick);
      for (auto& other : lines) {
        T f = dot(h, other) / hl;
        if (f != 0)
          for (int j = 0; j < K; ++j) other[j] -= f * l[j];
      }
      for (auto& r : rays) {
        T f = dot(h, r.v) / hl;
        if (f != 0)
          for (int j = 0; j < K; ++j) r.v[j] -= f * l[j];
        normalize(r.v);
        r.zero.set(ci);
      }
      if (!cons[ci].equality) {
        Ray<T> nr;
        nr.v = l;
        normalize(nr.v);
        nr.zero = Bits(ncons);
        for (int j = 0; j < ci; ++j) nr.zero.set(j);
        rays.push_back(std::move(nr));
      }
      continue;
    }
    std::vector<T> val(rays.size());
    std::vector<int> plus, minus, zero;
    for (std::size_t k = 0; k < rays.size(); ++k) {
      val[k] = dot(h, rays[k].v);
      if (val[k] > eps)
        plus.push_back(static_cast<int>(k));
      else if (val[k] < -eps)
        minus.push_back(static_cast<int>(k));
      else
        zero.push_back(static_cast<int>(k));
    }
    std::vector<Ray<T>> next;
    for (int k : zero) {
      Ray<T> r = rays[k];
      r.zero.set(ci);
      next.push_back(std::move(r));
    }
    for (int ip : plus)
      for (int im : minus) {
        Bits common = rays[ip].zero & rays[im].zero;
        bool adjacent = true;
        for (std::size_t k = 0; k < rays.size() && adjacent; ++k) {
          if (static_cast<int>(k) == ip || static_cast<int>(k) == im) continue;
          if (common.subset_of(rays[k].zero)) adjacent = false;
        }
        if (!adjacent) continue;
        Ray<T> nr;
        nr.v.assign(K, T(0));
        for (int j = 0; j < K; ++j) nr.v[j] = val[ip] * rays[im].v[j] - val[im] * rays[ip].v[j];
        normalize(nr.v);
        nr.zero = common;
        nr.zero.set(ci);
        next.push_back(std::move(nr));
      }
    if (!cons[ci].equality)
      for (int k : minus) next.push_back(rays[k]);
    rays = std::move(next);
  }

  VFormT<T> out;
  bool has_vertex = false;
  for (const auto& r : rays)
    if (r.v[dim] > eps) has_vertex = true;
  if (!has_vertex) return out;
  for (const auto& r : rays) {
    Row<T> z(r.v.begin(), r.v.begin() + dim);
    if (r.v[dim] > eps) {
      for (T& v : z) v /= r.v[dim];
      out.vertices.push_back(z);
    } else {
      normalize(z);
      out.rays.push_back(z);
    }
  }
  for (const auto& l : lines) out.lines.emplace_back(l.begin(), l.begin() + dim);
  auto cmp = [](const Row<T>& a, const Row<T>& b) { return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()); };
  auto dedup = [&](std::vector<Row<T>>& rows) {
    std::sort(rows.begin(), rows.end(), cmp);
    std::vector<Row<T>> kept;
    for (auto& r : rows) {
      bool dup = false;
      for (const auto& k : kept) {
        bool same = true;
        for (int j = 0; j < dim && same; ++j)
          if (DD<T>::abs(T(r[j] - k[j])) > eps * 100) same = false;
        if (same) {
          dup = true;
          break;
        }
      }
      if (!dup) kept.push_back(std::move(r));
    }
    rows = std::move(kept);
  };
  dedup(out.vertices);
  dedup(out.rays);
  return out;
}

template VFormT<double> double_description<double>(int, const std::vector<std::vector<double>>&, const std::vector<double>&,
                                                   const std::vector<std::vector<double>>&, const std::vector<double>&);
template VFormT<mpq_class> double_description<mpq_class>(int, const std::vector<std::vector<mpq_class>>&,
                                                         const std::vector<mpq_class>&,
                                                         const std::vector<std::vector<mpq_class>>&,
                                                         const std::vector<mpq_class>&);

Polyhedron::Polyhedron(int dim) : dim_(dim), C_(0, dim), E_(0, dim), d_(0), e_(0) {}

Polyhedron Polyhedron::box(const Vec& lo, const Vec& hi) {
  Polyhedron P(static_cast<int>(lo.size()));
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    Vec r = Vec::Zero(lo.size());
    r(i) = 1;
    P.add_le(r, hi(i));
    P.add_le(-r, -lo(i));
  }
  return P;
}

Polyhedron Polyhedron::point(const Vec& v) {
  Polyhedron P(static_cast<int>(v.size()));
  P.add_eq(Mat::Identity(v.size(), v.size()), v);
  return P;
}

Polyhedron Polyhedron::simplex(int k) {
  Polyhedron P(k);
  P.add_le(-Mat::Identity(k, k), Vec::Zero(k));
  P.add_eq(Vec::Ones(k), 1.0);
  return P;
}

Polyhedron Polyhedron::product(const Polyhedron& a, const Polyhedron& b) {
  Polyhedron P(a.dim_ + b.dim_);
  Mat C = Mat::Zero(a.C_.rows() + b.C_.rows(), P.dim_);
  C.topLeftCorner(a.C_.rows(), a.dim_) = a.C_;
  C.bottomRightCorner(b.C_.rows(), b.dim_) = b.C_;
  Mat E = Mat::Zero(a.E_.rows() + b.E_.rows(), P.dim_);
  E.topLeftCorner(a.E_.rows(), a.dim_) = a.E_;
  E.bottomRightCorner(b.E_.rows(), b.dim_) = b.E_;
  P.C_ = C;
  P.d_ = concat(a.d_, b.d_);
  P.E_ = E;
  P.e_ = concat(a.e_, b.e_);
  P.open_ = a.open_;
  for (int r : b.open_) P.open_.push_back(r + static_cast<int>(a.C_.rows()));
  return P;
}

bool Polyhedron::is_open(int row) const { return std::find(open_.begin(), open_.end(), row) != open_.end(); }

void Polyhedron::add_le(const Vec& row, double rhs, bool open) {
  C_.conservativeResize(C_.rows() + 1, dim_);
  C_.row(C_.rows() - 1) = row.transpose();
  d_.conservativeResize(d_.size() + 1);
  d_(d_.size() - 1) = rhs;
  if (open) open_.push_back(static_cast<int>(C_.rows() - 1));
}

void Polyhedron::add_eq(const Vec& row, double rhs) {
  E_.conservativeResize(E_.rows() + 1, dim_);
  E_.row(E_.rows() - 1) = row.transpose();
  e_.conservativeResize(e_.size() + 1);
  e_(e_.size() - 1) = rhs;
}

void Polyhedron::add_le(const Mat& rows, const Vec& rhs) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) add_le(Vec(rows.row(i).transpose()), rhs(i));
}

void Polyhedron::add_eq(const Mat& rows, const Vec& rhs) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) add_eq(Vec(rows.row(i).transpose()), rhs(i));
}

bool Polyhedron::satisfies(const Vec& z, double tol) const {
  if (C_.rows() > 0 && ((C_ * z - d_).array() > tol).any()) return false;
  if (E_.rows() > 0 && ((E_ * z - e_).array().abs() > tol).any()) return false;
  return true;
}

Polyhedron Polyhedron::closure() const {
  Polyhedron P = *this;
  P.open_.clear();
  return P;
}

namespace {

std::vector<std::vector<double>> rows_of(const Mat& M) {
  std::vector<std::vector<double>> out(M.rows(), std::vector<double>(M.cols()));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) out[i][j] = M(i, j);
  return out;
}

std::vector<std::vector<mpq_class>> qrows_of(const Mat& M) {
  std::vector<std::vector<mpq_class>> out(M.rows(), std::vector<mpq_class>(M.cols()));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) out[i][j] = mpq_class(M(i, j));
  return out;
}

template <class T>
std::vector<Vec> to_vecs(const std::vector<std::vector<T>>& rows) {
  std::vector<Vec> out;
  for (const auto& r : rows) {
    Vec v(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) v(j) = DD<T>::to_double(r[j]);
    out.push_back(v);
  }
  return out;
}

}  // namespace

VForm vertices(const Polyhedron& P, bool rational, int max_dim) {
  if (P.dim() > max_dim)
    throw Error("vertex enumeration dimension guard: dim " + std::to_string(P.dim()) + " > " + std::to_string(max_dim));
  VForm out;
  if (rational) {
    std::vector<mpq_class> d(P.d().size()), e(P.e().size());
    for (Eigen::Index i = 0; i < P.d().size(); ++i) d[i] = mpq_class(P.d()(i));
    for (Eigen::Index i = 0; i < P.e().size(); ++i) e[i] = mpq_class(P.e()(i));
    auto V = double_description<mpq_class>(P.dim(), qrows_of(P.C()), d, qrows_of(P.E()), e);
    out.vertices = to_vecs(V.vertices);
    out.rays = to_vecs(V.rays);
    out.lines = to_vecs(V.lines);
  } else {
    auto V = double_description<double>(P.dim(), rows_of(P.C()), to_std(P.d()), rows_of(P.E()), to_std(P.e()));
    out.vertices = to_vecs(V.vertices);
    out.rays = to_vecs(V.rays);
    out.lines = to_vecs(V.lines);
  }
  return out;
}

bool feasible(const Polyhedron& P) {
  LpData<double> lp(P.dim());
  for (Eigen::Index i = 0; i < P.C().rows(); ++i) lp.leq(to_std(P.C().row(i).transpose()), P.d()(i));
  for (Eigen::Index i = 0; i < P.E().rows(); ++i) lp.eq(to_std(P.E().row(i).transpose()), P.e()(i));
  return solve_lp(lp).status != LpStatus::Infeasible;
}

double interior_slack(const Polyhedron& P) {
  const int k = P.dim();
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
  std::vector<double> cap(k + 1, 0.0);
  cap[k] = 1.0;
  lp.leq(cap, 1.0);
  auto res = solve_lp(lp);
  if (res.status != LpStatus::Optimal) return -std::numeric_limits<double>::infinity();
  return res.x[k];
}

double support(const Polyhedron& P, const Vec& c) {
  LpData<double> lp(P.dim());
  for (int j = 0; j < P.dim(); ++j) lp.c[j] = -c(j);
  for (Eigen::Index i = 0; i < P.C().rows(); ++i) lp.leq(to_std(P.C().row(i).transpose()), P.d()(i));
  for (Eigen::Index i = 0; i < P.E().rows(); ++i) lp.eq(to_std(P.E().row(i).transpose()), P.e()(i));
  auto res = solve_lp(lp);
  if (res.status == LpStatus::Infeasible) return -std::numeric_limits<double>::infinity();
  if (res.status == LpStatus::Unbounded) return std::numeric_limits<double>::infinity();
  return -res.objective;
}

bool includes(const Polyhedron& outer, const Polyhedron& inner, double tol) {
  if (outer.dim() != inner.dim()) return false;
  if (!feasible(inner)) return true;
  for (Eigen::Index i = 0; i < outer.C().rows(); ++i)
    if (support(inner, outer.C().row(i).transpose()) > outer.d()(i) + tol) return false;
  for (Eigen::Index i = 0; i < outer.E().rows(); ++i) {
    Vec r = outer.E().row(i).transpose();
    if (support(inner, r) > outer.e()(i) + tol) return false;
    if (-support(inner, -r) < outer.e()(i) - tol) return false;
  }
  return true;
}

std::optional<Vec> argmax(const Polyhedron& P, const Vec& c) {
  LpData<double> lp(P.dim());
  for (int j = 0; j < P.dim(); ++j) lp.c[j] = -c(j);
  for (Eigen::Index i = 0; i < P.C().rows(); ++i) lp.leq(to_std(P.C().row(i).transpose()), P.d()(i));
  for (Eigen::Index i = 0; i < P.E().rows(); ++i) lp.eq(to_std(P.E().row(i).transpose()), P.e()(i));
  auto res = solve_lp(lp);
  if (res.status != LpStatus::Optimal) return std::nullopt;
  return to_vec(res.x);
}

}  // namespace valfun
