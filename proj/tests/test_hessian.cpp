#include <doctest.h>

#include "valfun/errors.hpp"
#include "valfun/hessian.hpp"
#include "valfun/oracle.hpp"

using namespace valfun;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

HessianQuery query(const Vec& xbar, const Vec& xund, const Vec& xstar, HessianCase hint = HessianCase::Auto) {
  return {xbar, xund, xstar, hint};
}

bool contains(const PolySet& S, const Vec& v, double tol) { return member(v, S, tol).verdict != Membership::Outside; }

}  // namespace

TEST_CASE("sensitivity system on an interior quadratic") {
  auto P = parse_problem(R"({"n":1,"m":1,"f":"(y1 - x1)^2","y_box":[[-2,2]]})");
  auto K = make_kkt_point(P, v1(0.3), v1(0.3), Vec(0));
  auto s = sensitivity_system(P, K);
  CHECK(s.ds(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.residual < 1e-9);
}

TEST_CASE("sensitivity system matches tracked minimizer and multiplier") {
  auto Q = parse_problem(R"({"n":1,"m":1,"f":"(y1 - x1)^2 + y1^4/4","y_box":[[-3,3]],"assert":{"convex_in_y":true}})");
  auto S = solve_value(Q, v1(1.0));
  auto K = make_kkt_point(Q, v1(1.0), S.minimizers.front(), Vec(0));
  auto s = sensitivity_system(Q, K);
  auto J = fd_solution_jacobian(Q, v1(1.0));
  REQUIRE_FALSE(J.truncated);
  CHECK(std::abs(s.ds(0, 0) - J.ds(0, 0)) < 1e-4);

  auto A = parse_problem(R"({"n":1,"m":2,"f":"(y1 - x1)^2 + (y2 - 2*x1)^2","g":["y1 + y2 - x1"],"y_box":[[-5,5],[-5,5]]})");
  auto SA = solve_value(A, v1(1.0));
  auto u = multipliers(A, v1(1.0), SA.minimizers.front()).vertices.front();
  CHECK(u(0) > 0.1);
  auto sa = sensitivity_system(A, make_kkt_point(A, v1(1.0), SA.minimizers.front(), u));
  auto JA = fd_solution_jacobian(A, v1(1.0));
  REQUIRE_FALSE(JA.truncated);
  CHECK((sa.ds - JA.ds).lpNorm<Eigen::Infinity>() < 1e-4);
  CHECK((sa.du - JA.du).lpNorm<Eigen::Infinity>() < 1e-4);
  // active row: grad_y g ds = grad_x g
  CHECK((sa.ds(0, 0) + sa.ds(1, 0)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("sensitivity system rejects degenerate points") {
  auto P = parse_problem(R"({"n":1,"m":1,"f":"y1^2 + x1*y1","g":["-y1"]})");
  auto K = make_kkt_point(P, v1(0.0), v1(0.0), v1(0.0));
  CHECK_THROWS_AS(sensitivity_system(P, K), HypothesisError);
  auto D = parse_problem(R"({"n":1,"m":1,"f":"y1","g":["-y1 + x1","-2*y1 + 2*x1"]})");
  auto KD = make_kkt_point(D, v1(0.0), v1(0.0), v2(1.0, 0.0));
  CHECK_THROWS_AS(sensitivity_system(D, KD), HypothesisError);
}

TEST_CASE("unperturbed single: locally constant value") {
  auto P = parse_problem(R"({"n":1,"m":1,"f":"(y1 - x1)^2","g":["y1 - 2","-y1 - 2"]})");
  auto E = estimate_hessian(P, query(v1(0.0), v1(0.0), v1(1.0)));
  CHECK(E.theorem == "unperturbed-single");
  CHECK(E.equality);
  auto v = singleton_value(E.result, 1e-12);
  REQUIRE(v);
  CHECK(std::abs((*v)(0)) < 1e-12);
}

TEST_CASE("unperturbed single: s(x) = -x") {
  auto P = parse_problem(R"({"n":1,"m":1,"f":"x1*y1 + y1^2/2","g":["y1 - 1","-y1 - 1"]})");
  for (double t : {1.0, 2.5}) {
    auto E = estimate_hessian(P, query(v1(0.5), v1(-0.5), v1(t)));
    auto v = singleton_value(E.result, 1e-12);
    REQUIRE(v);
    CHECK((*v)(0) == doctest::Approx(-t).epsilon(1e-10));
  }
  auto fd = fd_hessian(P, v1(0.5));
  CHECK(fd.stable);
  CHECK(fd.hessian(0, 0) == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(fd.gradient(0) == doctest::Approx(-0.5).epsilon(1e-4));
}

TEST_CASE("bilinear vertex minimizer gives zero curvature") {
  auto P = parse_problem(R"({"n":1,"m":1,"f":"x1*y1","g":["y1 - 1","-y1 - 1"]})");
  auto S = solve_value(P, v1(0.5));
  auto E = hessian_unperturbed(P, query(v1(0.5), v1(-1.0), v1(1.0)), S, SMode::Multi);
  auto v = singleton_value(E.result, 1e-12);
  REQUIRE(v);
  CHECK((*v)(0) == 0.0);
  auto fd = fd_hessian(P, v1(0.5));
  CHECK(fd.stable);
  CHECK(contains(E.result, fd.hessian.col(0), 1e-3));
  CHECK(route(P, query(v1(0.5), v1(-1.0), v1(1.0)), S) == HessianCase::LpLhs);
}

TEST_CASE("x-underbar outside the first-order estimate is rejected") {
  auto P = parse_problem(R"({"n":1,"m":1,"f":"x1*y1 + y1^2/2","g":["y1 - 1","-y1 - 1"]})");
  CHECK_THROWS_AS(estimate_hessian(P, query(v1(0.5), v1(3.0), v1(1.0))), HypothesisError);
}

TEST_CASE("lp with left-hand-side perturbation") {
  Mat A(2, 1);
  A << 1, -1;
  auto E = lp_lhs_hessian(A, v2(1, 1), query(v1(0.5), v1(-1.0), v1(1.0)));
  auto v = singleton_value(E.result, 0.0);
  REQUIRE(v);
  CHECK((*v)(0) == 0.0);
  CHECK(E.theorem == "lp-lhs");

  Mat B(4, 2);
  B << 1, 0, 0, 1, -1, 0, 0, -1;
  Vec b(4);
  b << 1, 1, 0, 0;
  auto F = lp_lhs_hessian(B, b, query(v2(1, 2), v2(0, 0), v2(0.3, -0.7)));
  auto w = singleton_value(F.result, 0.0);
  REQUIRE(w);
  CHECK(w->isZero(0.0));

  auto P = lp_lhs_problem(B, b);
  auto m = match_lp_lhs(P);
  REQUIRE(m);
  CHECK(m->first == B);
  CHECK(m->second == b);

  Mat R(2, 2);
  R << 1, 1, 1, 1;
  CHECK_THROWS_AS(lp_lhs_hessian(R, v2(1, 1), query(v2(1, 1), v2(0, 0), v2(1, 0))), HypothesisError);
}

TEST_CASE("lp on a normal-fan boundary") {
  Mat B(4, 2);
  B << 1, 0, 0, 1, -1, 0, 0, -1;
  Vec b(4);
  b << 1, 1, 0, 0;
  // x = (0, 1): optimal edge from (0,0) to (1,0)
  auto E = lp_lhs_hessian(B, b, query(v2(0, 1), v2(0, 0), v2(1, 0)));
  CHECK(contains(E.result, v2(0, 0), 1e-9));
  for (double s : {-1e-2, 1e-2}) {
    auto fd = fd_hessian(lp_lhs_problem(B, b), v2(s, 1));
    CHECK(fd.stable);
    CHECK(contains(E.result, fd.hessian * v2(1, 0), 1e-3));
  }
}

TEST_CASE("lp with both perturbations in one dimension") {
  Mat A(2, 1);
  A << 1, -1;
  auto P = lp_lhs_rhs_problem(A);
  REQUIRE(match_lp_lhs_rhs(P));
  // phi(x) = -x1 x2 near (0.5, 1)
  auto E = lp_lhs_rhs_hessian(A, query(v2(0.5, 1), v2(-1, -0.5), v2(1, 0)));
  auto fd = fd_hessian(P, v2(0.5, 1));
  CHECK(fd.stable);
  CHECK(fd.hessian(1, 0) == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(contains(E.result, fd.hessian * v2(1, 0), 1e-3));
  // the multiplier must be -xund_2 >= 0 on the active row
  CHECK_THROWS_AS(estimate_hessian(P, query(v2(0.5, 1), v2(-1, 0.5), v2(1, 0))), HypothesisError);
}

TEST_CASE("single-single collapse matches finite differences") {
  auto P = parse_problem(R"({"n":1,"m":2,"f":"(y1 - x1)^2 + (y2 - 2*x1)^2","g":["y1 + y2 - x1"],"y_box":[[-5,5],[-5,5]]})");
  auto S = solve_value(P, v1(1.0));
  HessianQuery q = query(v1(1.0), fd_gradient(P, v1(1.0)), v1(1.0));
  CHECK(route(P, q, S) == HessianCase::SingleSingle);
  auto E = estimate_hessian(P, q);
  REQUIRE(E.collapse);
  CHECK((*E.collapse)(0) == doctest::Approx(4.0).epsilon(1e-8));
  auto fd = fd_hessian(P, v1(1.0));
  CHECK(std::abs(fd.hessian(0, 0) - 4.0) < 1e-4);
}

TEST_CASE("single-S on a degenerate lp with a multiplier segment") {
  // y >= x and 2y >= 2x: the multiplier set is a segment
  auto P = parse_problem(R"({"n":1,"m":1,"f":"y1 + x1^2","g":["-y1 + x1","-2*y1 + 2*x1","y1 - 5"]})");
  auto S = solve_value(P, v1(0.0));
  HessianQuery q = query(v1(0.0), v1(1.0), v1(1.0));
  CHECK(route(P, q, S) == HessianCase::SingleS);
  auto E = estimate_hessian(P, q);
  CHECK(E.theorem == "single-S");
  CHECK(E.supports.size() == 2);
  auto fd = fd_hessian(P, v1(0.0));
  CHECK(fd.stable);
  CHECK(contains(E.result, fd.hessian.col(0), 1e-3));
}

TEST_CASE("single-lambda with two minimizers of equal gradient") {
  // two symmetric wells; grad_x L agrees at both minimizers
  auto P = parse_problem(
      R"({"n":1,"m":1,"f":"(y1^2 - 1)^2 + x1^2*y1^2","g":["y1 - 2 - x1","-y1 - 2 - x1"],"y_box":[[-3,3]]})");
  auto S = solve_value(P, v1(0.0));
  REQUIRE(S.minimizers.size() == 2);
  HessianQuery q = query(v1(0.0), v1(0.0), v1(1.0));
  CHECK(route(P, q, S) == HessianCase::SingleLambda);
  auto E = estimate_hessian(P, q);
  auto fd = fd_hessian(P, v1(0.0));
  CHECK(fd.stable);
  CHECK(contains(E.result, fd.hessian.col(0), 1e-3));
}

TEST_CASE("parse_case round trip") {
  for (const char* s : {"auto", "unperturbed", "single-single", "single-S", "single-lambda", "lp-lhs", "lp-lhs-rhs"})
    CHECK(std::string(to_string(parse_case(s))) == s);
  CHECK_THROWS_AS(parse_case("nope"), UsageError);
}
