#include <doctest.h>

#include "valfun/errors.hpp"
#include "valfun/oracle.hpp"

#include <random>

using namespace valfun;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

const char* kBox = R"({"n":2,"m":2,"f":"x1*y1 + x2*y2","g":["y1 - 1","y2 - 1","-y1","-y2"]})";

}  // namespace

TEST_CASE("fd of a smooth and a constant value function") {
  auto P = parse_problem(R"({"n":1,"m":1,"f":"x1*y1 + y1^2/2","g":["y1 - 1","-y1 - 1"]})");
  CHECK(fd_gradient(P, v1(0.5))(0) == doctest::Approx(-0.5).epsilon(1e-4));
  auto r = fd_hessian(P, v1(0.5));
  CHECK(r.stable);
  CHECK(r.hessian(0, 0) == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(r.steps.size() == 2);

  auto Z = parse_problem(R"({"n":1,"m":1,"f":"(y1 - x1)^2","g":["y1 - 2","-y1 - 2"]})");
  CHECK(std::abs(fd_gradient(Z, v1(0.0))(0)) < 1e-8);
  auto rz = fd_hessian(Z, v1(0.0));
  CHECK(rz.stable);
  CHECK(std::abs(rz.hessian(0, 0)) < 1e-4);
}

TEST_CASE("fd hessian at a kink is unstable") {
  auto P = parse_problem(R"({"n":1,"m":1,"f":"x1*y1","g":["y1 - 1","-y1 - 1"]})");
  CHECK_FALSE(fd_hessian(P, v1(0.0)).stable);
  CHECK(fd_directional(P, v1(0.0), v1(1.0)) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(fd_directional(P, v1(0.0), v1(-1.0)) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("lp value oracle on the unit box") {
  auto P = parse_problem(kBox);
  auto r = lp_value_oracle(P, v2(1, 2));
  CHECK(r.value == 0);
  REQUIRE(r.argmin.size() == 1);
  CHECK(r.argmin[0] == std::vector<mpq_class>{0, 0});
  CHECK(r.vertex_count == 4);
  auto e = lp_value_oracle(P, v2(0, 1));
  REQUIRE(e.argmin.size() == 2);
  CHECK(e.argmin[0] == std::vector<mpq_class>{0, 0});
  CHECK(e.argmin[1] == std::vector<mpq_class>{1, 0});
}

TEST_CASE("lp value oracle matches the exact solver") {
  auto P = parse_problem(R"({"n":2,"m":2,"f":"x1*y1 + x2*y2","g":["y1 + y2 - 2","-y1 + 2*y2 - 2","-y1 - 1","y1 - 3*y2 - 1"]})");
  Tolerances tol;
  tol.rational = true;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int k = 0; k < 25; ++k) {
    Vec x = v2(U(rng), U(rng));
    auto o = lp_value_oracle(P, x);
    auto s = solve_value(P, x, tol);
    CHECK(s.exact_value == o.value.get_str());
    std::vector<mpq_class> xq = {mpq_class(x(0)), mpq_class(x(1))};
    for (const auto& v : o.argmin) CHECK(P.f().eval(xq, v) == o.value);
  }
}

TEST_CASE("lp value oracle rejects unbounded and empty polytopes") {
  Mat A(1, 1);
  A << 1;
  CHECK_THROWS_AS(lp_value_oracle(A, v1(1), v1(1)), HypothesisError);
  Mat B(2, 1);
  B << 1, -1;
  CHECK_THROWS_AS(lp_value_oracle(B, v2(-1, 0), v1(1)), HypothesisError);
}

TEST_CASE("tracking the identity path") {
  auto P = parse_problem(R"({"n":1,"m":1,"f":"(y1 - x1)^2","y_box":[[-2,2]]})");
  auto tr = track_solution(P, v1(0.2), v1(1.0), 2, 1e-2);
  CHECK_FALSE(tr.truncated);
  REQUIRE(tr.samples.size() == 5);
  for (const auto& s : tr.samples) CHECK(s.y(0) == doctest::Approx(0.2 + s.t).epsilon(1e-7));
}

TEST_CASE("tracking stops at an active-set change") {
  auto P = parse_problem(R"({"n":1,"m":1,"f":"(y1 - x1)^2","g":["-y1"],"y_box":[[0,3]]})");
  auto tr = track_solution(P, v1(0.005), v1(-1.0), 3, 1e-2);
  CHECK(tr.truncated);
  CHECK(tr.samples.size() < 7);
}

TEST_CASE("graph probes re-solve at sampled parameters") {
  auto P = parse_problem(R"({"n":1,"m":1,"f":"x1*y1 + y1^2/2","g":["y1 - 1","-y1 - 1"]})");
  auto S = graph_probe(P, ProbeMap::S, v1(0.5), 0.1, 10);
  REQUIRE(S.size() == 10);
  for (const auto& g : S) CHECK(g.y(0) == doctest::Approx(-g.x(0)).epsilon(1e-7));

  auto B = parse_problem(R"({"n":1,"m":1,"f":"x1*y1","g":["y1 - 1","-y1 - 1"]})");
  auto L = graph_probe(B, ProbeMap::Lambda, v1(0.5), 0.1, 10);
  REQUIRE(L.size() == 10);
  for (const auto& g : L) CHECK(g.v(1) == doctest::Approx(g.x(0)).epsilon(1e-9));

  auto D = graph_probe(B, ProbeMap::Subdiff, v1(0.5), 0.1, 10);
  REQUIRE(D.size() == 10);
  for (const auto& g : D) CHECK(g.v(0) == doctest::Approx(-1.0).epsilon(1e-12));
}
