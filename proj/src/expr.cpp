#include "valfun/expr.hpp"

#include "valfun/errors.hpp"

#include <gmpxx.h>

#include <cctype>
#include <charconv>
#include <cmath>

namespace valfun {

struct ExprNode {
  Op op = Op::Const;
  double value = 0.0;
  int index = 0;
  int exponent = 0;
  Expr a, b;
};

namespace {

std::shared_ptr<const ExprNode> make_node(Op op, const Expr& a = Expr(), const Expr& b = Expr()) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = a;
  n->b = b;
  return n;
}

template <class T>
T ipow(const T& base, int k) {
  T r = 1;
  T b = base;
  int e = k < 0 ? -k : k;
  while (e > 0) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  if (k < 0) {
    if (r == 0) throw EvaluationError("division by zero in negative power");
    return T(1) / r;
  }
  return r;
}

}  // namespace

Expr::Expr() = default;  // null node is the constant 0

namespace {
const Expr& zero_expr() {
  static const Expr z;
  return z;
}
}  // namespace

Expr Expr::constant(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Const;
  n->value = v == 0.0 ? 0.0 : v;
  return Expr(n);
}

Expr Expr::x(int j) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::VarX;
  n->index = j;
  return Expr(n);
}

Expr Expr::y(int i) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::VarY;
  n->index = i;
  return Expr(n);
}

Op Expr::op() const { return node_ ? node_->op : Op::Const; }
double Expr::value() const { return node_ ? node_->value : 0.0; }
int Expr::index() const { return node_ ? node_->index : 0; }
int Expr::exponent() const { return node_ ? node_->exponent : 0; }
const Expr& Expr::lhs() const { return node_ ? node_->a : zero_expr(); }
const Expr& Expr::rhs() const { return node_ ? node_->b : zero_expr(); }

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() + b.value());
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return Expr(make_node(Op::Add, a, b));
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() - b.value());
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  return Expr(make_node(Op::Sub, a, b));
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() * b.value());
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  return Expr(make_node(Op::Mul, a, b));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero()) return Expr(make_node(Op::Div, a, b));  // surfaces at evaluation
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() / b.value());
  if (a.is_zero()) return Expr();
  if (b.is_one()) return a;
  return Expr(make_node(Op::Div, a, b));
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.value());
  if (a.op() == Op::Neg) return a.lhs();
  return Expr(make_node(Op::Neg, a));
}

Expr pow(const Expr& a, int k) {
  if (k == 0) return Expr::constant(1.0);
  if (k == 1) return a;
  if (a.is_constant()) {
    if (a.is_zero() && k < 0) {
      auto n = make_node(Op::Pow, a);
      const_cast<ExprNode&>(*n).exponent = k;
      return Expr(n);
    }
    return Expr::constant(ipow(a.value(), k));
  }
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Pow;
  n->a = a;
  n->exponent = k;
  return Expr(n);
}

template <class T>
T Expr::eval(const std::vector<T>& x, const std::vector<T>& y) const {
  if (!node_) return T(0);
  const ExprNode& n = *node_;
  switch (n.op) {
    case Op::Const: return T(n.value);
    case Op::VarX: return x.at(n.index);
    case Op::VarY: return y.at(n.index);
    case Op::Add: return n.a.eval(x, y) + n.b.eval(x, y);
    case Op::Sub: return n.a.eval(x, y) - n.b.eval(x, y);
    case Op::Mul: return n.a.eval(x, y) * n.b.eval(x, y);
    case Op::Div: {
      T d = n.b.eval(x, y);
      if (d == 0) throw EvaluationError("division by zero evaluating " + str());
      return T(n.a.eval(x, y) / d);
    }
    case Op::Neg: return T(-n.a.eval(x, y));
    case Op::Pow: return ipow(n.a.eval(x, y), n.exponent);
  }
  return T(0);
}

template double Expr::eval<double>(const std::vector<double>&, const std::vector<double>&) const;
template mpq_class Expr::eval<mpq_class>(const std::vector<mpq_class>&, const std::vector<mpq_class>&) const;

double Expr::eval(const Vec& x, const Vec& y) const { return eval<double>(to_std(x), to_std(y)); }

namespace {

Expr diff(const Expr& e, Op var, int idx) {
  switch (e.op()) {
    case Op::Const: return Expr();
    case Op::VarX:
    case Op::VarY: return (e.op() == var && e.index() == idx) ? Expr::constant(1.0) : Expr();
    case Op::Add: return diff(e.lhs(), var, idx) + diff(e.rhs(), var, idx);
    case Op::Sub: return diff(e.lhs(), var, idx) - diff(e.rhs(), var, idx);
    case Op::Mul:
      return diff(e.lhs(), var, idx) * e.rhs() + e.lhs() * diff(e.rhs(), var, idx);
    case Op::Div: {
      Expr da = diff(e.lhs(), var, idx), db = diff(e.rhs(), var, idx);
      if (db.is_zero()) return da / e.rhs();
      return (da * e.rhs() - e.lhs() * db) / pow(e.rhs(), 2);
    }
    case Op::Neg: return -diff(e.lhs(), var, idx);
    case Op::Pow: {
      int k = e.exponent();
      return Expr::constant(k) * pow(e.lhs(), k - 1) * diff(e.lhs(), var, idx);
    }
  }
  return Expr();
}

int max_index(const Expr& e, Op var) {
  switch (e.op()) {
    case Op::Const: return -1;
    case Op::VarX:
    case Op::VarY: return e.op() == var ? e.index() : -1;
    case Op::Neg:
    case Op::Pow: return max_index(e.lhs(), var);
    default: return std::max(max_index(e.lhs(), var), max_index(e.rhs(), var));
  }
}

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Const: return e.value() < 0 ? 0 : 5;
    default: return 5;
  }
}

std::string print(const Expr& e);

std::string wrap(const Expr& e, int min_prec) {
  std::string s = print(e);
  return precedence(e) < min_prec ? "(" + s + ")" : s;
}

std::string print(const Expr& e) {
  switch (e.op()) {
    case Op::Const: return format_double(e.value());
    case Op::VarX: return "x" + std::to_string(e.index() + 1);
    case Op::VarY: return "y" + std::to_string(e.index() + 1);
    case Op::Add: return wrap(e.lhs(), 1) + " + " + wrap(e.rhs(), 2);
    case Op::Sub: return wrap(e.lhs(), 1) + " - " + wrap(e.rhs(), 2);
    case Op::Mul: return wrap(e.lhs(), 2) + "*" + wrap(e.rhs(), 3);
    case Op::Div: return wrap(e.lhs(), 2) + "/" + wrap(e.rhs(), 3);
    case Op::Neg: return "-" + wrap(e.lhs(), 3);
    case Op::Pow: return wrap(e.lhs(), 5) + "^" + std::to_string(e.exponent());
  }
  return "?";
}

bool same(const Expr& a, const Expr& b) {
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::Const: return a.value() == b.value();
    case Op::VarX:
    case Op::VarY: return a.index() == b.index();
    case Op::Neg: return same(a.lhs(), b.lhs());
    case Op::Pow: return a.exponent() == b.exponent() && same(a.lhs(), b.lhs());
    default: return same(a.lhs(), b.lhs()) && same(a.rhs(), b.rhs());
  }
}

class Parser {
 public:
  Parser(std::string_view text, int n, int m) : s_(text), n_(n), m_(m) {}

  Expr parse() {
    skip();
    Expr e = expr();
    skip();
    if (pos_ < s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) {
      if (s_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("syntax error: " + msg, line, col);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  Expr expr() {
    Expr e = term();
    while (true) {
      if (peek('+')) {
        ++pos_;
        e = e + term();
      } else if (peek('-')) {
        ++pos_;
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = unary();
    while (true) {
      if (peek('*')) {
        ++pos_;
        e = e * unary();
      } else if (peek('/')) {
        ++pos_;
        e = e / unary();
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (peek('-')) {
      ++pos_;
      return -unary();
    }
    return factor();
  }

  Expr factor() {
    Expr b = base();
    if (peek('^')) {
      ++pos_;
      skip();
      bool neg = false;
      if (pos_ < s_.size() && s_[pos_] == '-') {
        neg = true;
        ++pos_;
      }
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("integer exponent expected");
      int k = 0;
      auto r = std::from_chars(s_.data() + start, s_.data() + pos_, k);
      if (r.ec != std::errc()) {
        pos_ = start;
        fail("exponent out of range");
      }
      return pow(b, neg ? -k : k);
    }
    return b;
  }

  Expr base() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      if (!peek(')')) fail("')' expected");
      ++pos_;
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == 'x' || c == 'y') return ident();
    fail(std::string("unexpected '") + c + "'");
  }

  Expr number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
      ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    double v = 0.0;
    auto r = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (r.ec != std::errc() || r.ptr != s_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr::constant(v);
  }

  Expr ident() {
    std::size_t start = pos_;
    char kind = s_[pos_++];
    std::size_t digits = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (digits == pos_) {
      pos_ = start;
      fail(std::string("variable index expected after '") + kind + "'");
    }
    int idx = 0;
    std::from_chars(s_.data() + digits, s_.data() + pos_, idx);
    int bound = kind == 'x' ? n_ : m_;
    if (idx < 1 || (bound >= 0 && idx > bound)) {
      std::string name(s_.substr(start, pos_ - start));
      pos_ = start;
      fail("unknown variable " + name);
    }
    return kind == 'x' ? Expr::x(idx - 1) : Expr::y(idx - 1);
  }

  std::string_view s_;
  int n_, m_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr Expr::diff_x(int j) const { return diff(*this, Op::VarX, j); }
Expr Expr::diff_y(int i) const { return diff(*this, Op::VarY, i); }
bool Expr::depends_on_x() const { return max_x_index() >= 0; }
bool Expr::depends_on_y() const { return max_y_index() >= 0; }
int Expr::max_x_index() const { return max_index(*this, Op::VarX); }
int Expr::max_y_index() const { return max_index(*this, Op::VarY); }
std::string Expr::str() const { return print(*this); }
bool Expr::same_as(const Expr& other) const { return same(*this, other); }

Expr parse_expr(std::string_view text, int n, int m) { return Parser(text, n, m).parse(); }

}  // namespace valfun
