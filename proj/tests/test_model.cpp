#include <doctest.h>

#include "valfun/errors.hpp"
#include "valfun/problem.hpp"

#include <random>

using namespace valfun;

namespace {

ParametricProblem make(const std::string& json) { return parse_problem(json); }

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("expressions parse, print and re-parse to the same tree") {
  for (const char* s : {"(y1 - x1)^2", "x1*y1 + y1^2/2", "-y1 - 2", "x1*(y1 + y2)", "(y1^2 - 1)^2 + x1*y1",
                        "2^-1*y1", "-(x1*y2)/(3 - y1)", "1.5e-3*x2 - -y1"}) {
    Expr e = parse_expr(s);
    Expr back = parse_expr(e.str());
    CHECK_MESSAGE(e.same_as(back), s, " -> ", e.str());
  }
}

TEST_CASE("constant folding") {
  CHECK(parse_expr("2*3 + 1").is_constant());
  CHECK(parse_expr("2*3 + 1").value() == 7.0);
  CHECK(parse_expr("0*y1 + x1").same_as(Expr::x(0)));
  CHECK(parse_expr("y1^1*1").same_as(Expr::y(0)));
  CHECK(parse_expr("--y1").same_as(Expr::y(0)));
}

TEST_CASE("syntax errors report the offending column") {
  try {
    parse_expr("y1 ++ x1");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 5);
  }
  CHECK_THROWS_AS(parse_expr("y1 * (x1"), ParseError);
  CHECK_THROWS_AS(parse_expr("z1"), ParseError);
  CHECK_THROWS_AS(parse_expr("y1^x1"), ParseError);
  CHECK_THROWS_AS(parse_expr("x3", 2, 1), ParseError);
}

TEST_CASE("division by zero surfaces at evaluation") {
  Expr e = parse_expr("1/(y1 - x1)");
  CHECK_THROWS_AS(e.eval(v1(1.0), v1(1.0)), EvaluationError);
  CHECK(e.eval(v1(0.0), v1(2.0)) == doctest::Approx(0.5));
}

TEST_CASE("symbolic gradients agree with central differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (const char* s : {"(y1 - x1)^2 + y2^4/4 - x2*y1*y2", "x1*y1/(2 + y2^2)", "(y1^2 - 1)^2 + x1*y2 - x2^3"}) {
    Expr e = parse_expr(s);
    for (int trial = 0; trial < 100; ++trial) {
      Vec x = v2(U(rng), U(rng)), y = v2(U(rng), U(rng));
      const double h = 1e-6;
      for (int i = 0; i < 2; ++i) {
        Vec yp = y, ym = y;
        yp(i) += h;
        ym(i) -= h;
        double fd = (e.eval(x, yp) - e.eval(x, ym)) / (2 * h);
        double sym = e.diff_y(i).eval(x, y);
        CHECK(std::abs(fd - sym) <= 1e-6 * std::max(1.0, std::abs(sym)));
        Vec xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        fd = (e.eval(xp, y) - e.eval(xm, y)) / (2 * h);
        sym = e.diff_x(i).eval(x, y);
        CHECK(std::abs(fd - sym) <= 1e-6 * std::max(1.0, std::abs(sym)));
      }
    }
  }
}

TEST_CASE("problem files parse and round-trip") {
  auto P = make(R"({"n":1,"m":1,"f":"(y1 - x1)^2","g":["y1 - 2","-y1 - 2"],
                    "points":{"a":{"x":[0],"minimizers":[[0]],"xund":[0],"xstar":[1]}}})");
  CHECK(P.n() == 1);
  CHECK(P.m() == 1);
  CHECK(P.p() == 2);
  auto Q = parse_problem(serialize_problem(P));
  CHECK(structurally_equal(P, Q));
  auto B = make(R"({"n":1,"m":1,"f":"x1*y1","g":["y1 - 1","-y1 - 1"]})");
  CHECK(B.p() == 2);
  CHECK(B.affine_in_y());
  CHECK_FALSE(P.affine_in_y());
  CHECK_THROWS_AS(make(R"({"n":1,"m":1,"f":"y1 ++ x1"})"), ParseError);
  CHECK_THROWS_AS(make(R"({"n":1,"m":1,"f":"y2"})"), ParseError);
  CHECK_THROWS_AS(make(R"({"n":1,"m":2,"f":"y2","y_box":[[0,1]]})"), Error);
  CHECK_THROWS_AS(make(R"({"n":1,"m":1,"f":"y1","points":{"a":{"x":[0,1]}}})"), Error);
}

TEST_CASE("Lagrangian blocks at a quadratic point") {
  auto P = make(R"({"n":1,"m":1,"f":"(y1 - x1)^2","g":["y1 - 2","-y1 - 2"]})");
  auto ev = differentiate(P, v1(0), v1(0), v2(0, 0));
  CHECK(ev.hxx(0, 0) == 2.0);
  CHECK(ev.hxy(0, 0) == -2.0);
  CHECK(ev.hyy(0, 0) == 2.0);
  CHECK(ev.hyx(0, 0) == ev.hxy(0, 0));
}

TEST_CASE("bilinear KKT point: stationarity and partition") {
  auto P = make(R"({"n":1,"m":1,"f":"x1*y1","g":["y1 - 1","-y1 - 1"]})");
  auto ev = differentiate(P, v1(0.5), v1(-1), v2(0, 0.5));
  CHECK(ev.grad_y(0) == doctest::Approx(0.0));
  auto part = classify(P, v1(0.5), v1(-1), v2(0, 0.5));
  CHECK(part.nu == std::vector<int>{1});
  CHECK(part.eta == std::vector<int>{0});
  CHECK(part.theta.empty());
}

TEST_CASE("degenerate and inactive partitions") {
  auto P = make(R"({"n":1,"m":1,"f":"(y1 - x1)^2","g":["-y1"]})");
  auto part = classify(P, v1(0), v1(0), v1(0));
  CHECK(part.theta == std::vector<int>{0});
  CHECK(part.eta.empty());
  CHECK(part.nu.empty());
  auto in = classify(P, v1(1), v1(1), v1(0));
  CHECK(in.eta == std::vector<int>{0});
  auto amb = classify(P, v1(0), v1(0), v1(2e-6));
  CHECK(amb.theta == std::vector<int>{0});
  CHECK(amb.ambiguous == std::vector<int>{0});
}

TEST_CASE("mixed second derivative equals the y-difference of grad_x L") {
  auto P = make(R"({"n":2,"m":2,"f":"x1*y1^2 + x2*y1*y2 + y2^4","g":["x1*y1 + y2 - 3","y1^2 - x2"]})");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int t = 0; t < 20; ++t) {
    Vec x = v2(U(rng), U(rng)), y = v2(U(rng), U(rng)), u = v2(std::abs(U(rng)), std::abs(U(rng)));
    auto ev = differentiate(P, x, y, u);
    const double h = 1e-6;
    for (int i = 0; i < 2; ++i) {
      Vec yp = y, ym = y;
      yp(i) += h;
      ym(i) -= h;
      Vec col = (P.lagrangian_grad_x(x, yp, u) - P.lagrangian_grad_x(x, ym, u)) / (2 * h);
      for (int j = 0; j < 2; ++j) CHECK(std::abs(col(j) - ev.hxy(i, j)) <= 1e-6);
    }
  }
}

TEST_CASE("KKT validation rejects non-stationary triples") {
  auto P = make(R"({"n":1,"m":1,"f":"x1*y1","g":["y1 - 1","-y1 - 1"]})");
  CHECK_NOTHROW(make_kkt_point(P, v1(0.5), v1(-1), v2(0, 0.5)));
  CHECK_THROWS_AS(make_kkt_point(P, v1(0.5), v1(-1), v2(0, 0.4)), HypothesisError);
}

TEST_CASE("concave-convexity is verified on quadratics") {
  auto B = make(R"({"n":1,"m":1,"f":"x1*y1","g":["y1 - 1","-y1 - 1"]})");
  CHECK(B.concave_convex() == Verdict::Verified);
  auto Q = make(R"({"n":1,"m":1,"f":"(y1 - x1)^2","g":["-y1"]})");
  CHECK(Q.concave_convex() == Verdict::Failed);
  CHECK(Q.convex_in_y() == Verdict::Verified);
  auto N = make(R"({"n":1,"m":1,"f":"y1^4 + x1*y1","g":[],"assert":{"convex_in_y":true}})");
  CHECK(N.convex_in_y() == Verdict::Asserted);
}
