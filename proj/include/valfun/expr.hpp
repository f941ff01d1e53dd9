#ifndef VALFUN_EXPR_HPP
#define VALFUN_EXPR_HPP

#include "valfun/linalg.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace valfun {

enum class Op { Const, VarX, VarY, Add, Sub, Mul, Div, Neg, Pow };

struct ExprNode;

// Immutable expression over parameters x_j and decision variables y_i.
// Indices are 0-based internally and printed 1-based.
class Expr {
 public:
  Expr();  // the constant 0
  static Expr constant(double v);
  static Expr x(int j);
  static Expr y(int i);

  Op op() const;
  double value() const;   // Const only
  int index() const;      // VarX / VarY only
  int exponent() const;   // Pow only
  const Expr& lhs() const;
  const Expr& rhs() const;

  bool is_constant() const { return op() == Op::Const; }
  bool is_zero() const { return is_constant() && value() == 0.0; }
  bool is_one() const { return is_constant() && value() == 1.0; }

  // Works for double and mpq_class (instantiated in expr.cpp).
  template <class T>
  T eval(const std::vector<T>& x, const std::vector<T>& y) const;
  double eval(const Vec& x, const Vec& y) const;

  Expr diff_x(int j) const;
  Expr diff_y(int i) const;

  bool depends_on_x() const;
  bool depends_on_y() const;
  int max_x_index() const;  // -1 when x-free
  int max_y_index() const;

  std::string str() const;
  bool same_as(const Expr& other) const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& a, int k);

 private:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const ExprNode> node_;
};

// Parses one expression. n and m bound the admissible x/y indices;
// pass -1 to skip the range check.
Expr parse_expr(std::string_view text, int n = -1, int m = -1);

}  // namespace valfun

#endif
