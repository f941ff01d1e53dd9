#include <doctest.h>

#include "valfun/errors.hpp"
#include "valfun/kernel.hpp"

using namespace valfun;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

const char* kBilinear = R"({"n":1,"m":1,"f":"x1*y1","g":["y1 - 1","-y1 - 1"]})";

}  // namespace

TEST_CASE("exact LP value of the bilinear instance") {
  auto P = parse_problem(kBilinear);
  Tolerances tol;
  tol.rational = true;
  auto r = solve_value(P, v1(0.5), tol);
  CHECK(r.certificate == Certificate::ExactLp);
  CHECK(r.value == -0.5);
  CHECK(r.exact_value == "-1/2");
  REQUIRE(r.minimizers.size() == 1);
  CHECK(r.minimizers[0](0) == -1.0);
  auto z = solve_value(P, v1(0.0), tol);
  CHECK_FALSE(z.singleton);
  CHECK(z.face.size() == 2);
  CHECK(z.minimizers.size() == 3);
  auto f = solve_value(P, v1(0.5));
  CHECK(f.value == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("NLP value with an interior fit") {
  auto P = parse_problem(R"({"n":1,"m":1,"f":"(y1 - x1)^2","g":["y1 - 2","-y1 - 2"],"y_box":[[-2,2]]})");
  auto r = solve_value(P, v1(0.0));
  CHECK(r.certificate == Certificate::Heuristic);
  CHECK(std::abs(r.value) < 1e-14);
  REQUIRE(r.minimizers.size() == 1);
  CHECK(std::abs(r.minimizers[0](0)) < 1e-10);
}

TEST_CASE("NLP finds both wells of a symmetric double well") {
  auto P = parse_problem(R"({"n":1,"m":1,"f":"(y1^2 - 1)^2 + x1*y1","y_box":[[-2,2]]})");
  auto r = solve_value(P, v1(0.0));
  CHECK(r.minimizers.size() == 2);
  auto s = solve_value(P, v1(0.1));
  CHECK(s.minimizers.size() == 1);
  CHECK(s.minimizers[0](0) < 0);
}

TEST_CASE("NLP with an active constraint") {
  auto P = parse_problem(R"({"n":2,"m":1,"f":"(y1 - x1)^2","g":["y1 - x2"],"y_box":[[-3,3]]})");
  auto r = solve_value(P, v2(2, 1));
  REQUIRE(r.minimizers.size() == 1);
  CHECK(std::abs(r.minimizers[0](0) - 1.0) < 1e-12);
  CHECK(std::abs(r.value - 1.0) < 1e-12);
}

TEST_CASE("infeasible parameter violates the standing assumption") {
  auto P = parse_problem(R"({"n":1,"m":1,"f":"y1","g":["y1 - x1","-y1"]})");
  CHECK_THROWS_AS(solve_value(P, v1(-1.0)), HypothesisError);
  auto U = parse_problem(R"({"n":1,"m":1,"f":"y1","g":["-y1"]})");
  CHECK_THROWS_AS(solve_value(U, v1(0.0)), HypothesisError);
}

TEST_CASE("multiplier polyhedra") {
  auto P = parse_problem(kBilinear);
  auto M = multipliers(P, v1(0.5), v1(-1));
  REQUIRE(M.singleton());
  CHECK((M.vertices[0] - v2(0, 0.5)).norm() < 1e-12);

  auto Q = parse_problem(R"({"n":1,"m":1,"f":"(y1 - x1)^2","g":["-y1"]})");
  auto N = multipliers(Q, v1(0), v1(0));
  REQUIRE(N.singleton());
  CHECK(N.vertices[0](0) == 0.0);

  // active but inconsistent: grad f = 1, gradient of the active row is 1, needs u = -1
  auto R = parse_problem(R"({"n":1,"m":1,"f":"y1","g":["y1"]})");
  CHECK(multipliers(R, v1(0), v1(0)).empty());

  auto D = parse_problem(R"({"n":1,"m":1,"f":"y1","g":["-y1","-2*y1"]})");
  auto S = multipliers(D, v1(0), v1(0));
  CHECK(S.vertices.size() == 2);
  CHECK(S.bounded);
}

TEST_CASE("LICQ and MFCQ verdicts") {
  auto P = parse_problem(kBilinear);
  CHECK(check_licq(P, v1(0.5), v1(-1)).holds);
  CHECK(check_mfcq(P, v1(0.5), v1(-1)).holds);
  auto D = parse_problem(R"({"n":1,"m":1,"f":"y1","g":["-y1","-2*y1"]})");
  CHECK_FALSE(check_licq(D, v1(0), v1(0)).holds);
  CHECK(check_mfcq(D, v1(0), v1(0)).holds);
  auto E = parse_problem(R"({"n":1,"m":1,"f":"y1^2","g":["y1","-y1"]})");
  auto mf = check_mfcq(E, v1(0), v1(0));
  CHECK_FALSE(mf.holds);
  CHECK((mf.witness - v2(1, 1)).norm() < 1e-9);
  auto F = parse_problem(R"({"n":1,"m":1,"f":"y1^2","g":["y1 - 5"]})");
  CHECK(check_licq(F, v1(0), v1(0)).holds);
  CHECK(check_mfcq(F, v1(0), v1(0)).holds);
}
