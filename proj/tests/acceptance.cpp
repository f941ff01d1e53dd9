#include "valfun/cli.hpp"
#include "valfun/coderiv.hpp"
#include "valfun/errors.hpp"
#include "valfun/firstorder.hpp"
#include "valfun/hessian.hpp"
#include "valfun/hull.hpp"
#include "valfun/lp.hpp"
#include "valfun/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

using namespace valfun;
namespace fs = std::filesystem;

namespace {

std::string g_data;
std::string g_cli;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct BatteryPoint {
  std::string file, name;
  ParametricProblem P;
  NamedPoint pt;
};

std::vector<fs::path> battery_files() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(g_data))
    if (e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

ParametricProblem load(const std::string& stem) { return load_problem(g_data + "/" + stem + ".json"); }

std::vector<BatteryPoint> battery_points() {
  std::vector<BatteryPoint> out;
  for (const auto& f : battery_files()) {
    ParametricProblem P = load_problem(f.string());
    for (const auto& [name, pt] : P.points) out.push_back({f.stem().string(), name, P, pt});
  }
  return out;
}

Vec vec(std::initializer_list<double> xs) {
  Vec v(xs.size());
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Vec unit_random(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vec d(n);
  for (int i = 0; i < n; ++i) d(i) = N(rng);
  return d / d.norm();
}

HessianOptions options_for(const NamedPoint& pt) {
  HessianOptions o;
  o.solve.pinned = pt.minimizers;
  return o;
}

// x-underbar from the point, or the unique first-order value.
Vec xund_for(const ParametricProblem& P, const NamedPoint& pt) {
  if (pt.xund) return *pt.xund;
  SolveOptions so;
  so.pinned = pt.minimizers;
  SolveResult S = solve_value(P, pt.x, {}, so);
  auto v = singleton_value(first_order(P, pt.x, S).set, 1e-6);
  if (!v) throw Error("point needs xund");
  return *v;
}

HessianCase hint_for(const NamedPoint& pt) {
  return pt.case_hint.empty() ? HessianCase::Auto : parse_case(pt.case_hint);
}

// 1. Danskin: FD directional derivatives against min over generators.
Outcome criterion1() {
  struct Inst {
    const char* stem;
    Vec x;
  };
  std::vector<Inst> insts = {{"U2_shifted", vec({0.5})},
                             {"U3_bilinear", vec({0.0})},
                             {"U5_projection", vec({1.0, 1.0})},
                             {"U6_clipped", vec({0.3, 2.0})},
                             {"U8_lp_box", vec({0.0, 1.0})}};
  std::mt19937_64 rng(11);
  double worst = 0.0;
  int count = 0;
  for (const auto& in : insts) {
    ParametricProblem P = load(in.stem);
    SolveResult S = solve_value(P, in.x);
    SubdiffEstimate E = danskin(P, in.x, S);
    for (int k = 0; k < 20; ++k) {
      Vec d = unit_random(rng, P.n());
      double best = INFINITY;
      for (const auto& g : E.generators) best = std::min(best, g.value.dot(d));
      double fd = fd_directional(P, in.x, d);
      worst = std::max(worst, std::abs(fd - best));
      ++count;
    }
  }
  std::ostringstream s;
  s << count << " directions on " << insts.size() << " instances, max error " << worst;
  return {worst <= 5e-4, s.str()};
}

// 2. Equality collapse: singleton estimate vs FD, sensitivity vs tracking.
Outcome criterion2() {
  struct Inst {
    const char* stem;
    const char* point;
  };
  std::vector<Inst> insts = {{"B1_coupled", "a"}, {"B2_moving_bound", "a"}, {"B4_two_param", "b"},
                             {"U5_projection", "a"}, {"U4_quartic", "a"}};
  double worst_h = 0.0, worst_s = 0.0, worst_c = 0.0;
  std::string bad;
  for (const auto& in : insts) {
    ParametricProblem P = load(in.stem);
    const NamedPoint& pt = P.points.at(in.point);
    HessianQuery q{pt.x, xund_for(P, pt), *pt.xstar, HessianCase::Auto};
    HessianEstimate E = estimate_hessian(P, q);
    auto single = singleton_value(E.result, 1e-12);
    if (!E.collapse || !single) {
      bad += std::string(" ") + in.stem + ":no-collapse";
      continue;
    }
    worst_c = std::max(worst_c, (*single - *E.collapse).lpNorm<Eigen::Infinity>());
    FdReport fd = fd_hessian(P, pt.x);
    if (!fd.stable) bad += std::string(" ") + in.stem + ":fd-unstable";
    worst_h = std::max(worst_h, (*E.collapse - fd.hessian * q.xstar).lpNorm<Eigen::Infinity>());
    SolveResult S = solve_value(P, pt.x);
    const Vec& y = S.minimizers.front();
    MultiplierPolyhedron M = multipliers(P, pt.x, y);
    Sensitivity sens = sensitivity_system(P, make_kkt_point(P, pt.x, y, M.vertices.front()));
    FdJacobian J = fd_solution_jacobian(P, pt.x);
    if (J.truncated) bad += std::string(" ") + in.stem + ":track-truncated";
    worst_s = std::max(worst_s, (sens.ds - J.ds).lpNorm<Eigen::Infinity>());
    if (P.p() > 0) worst_s = std::max(worst_s, (sens.du - J.du).lpNorm<Eigen::Infinity>());
  }
  std::ostringstream s;
  s << insts.size() << " instances, Hessian error " << worst_h << ", Jacobian error " << worst_s
    << ", collapse vs set " << worst_c << bad;
  return {bad.empty() && worst_h <= 1e-4 && worst_s <= 1e-4 && worst_c <= 1e-8, s.str()};
}

std::string family_of(const std::string& theorem) {
  if (theorem.rfind("unperturbed", 0) == 0 || theorem == "lp-lhs") return "unperturbed";
  if (theorem == "single-single") return "single-single";
  if (theorem == "single-S") return "single-S";
  if (theorem.rfind("single-lambda", 0) == 0 || theorem == "lp-lhs-rhs") return "single-lambda";
  return theorem;
}

// 3. FD inclusion over the whole battery.
Outcome criterion3() {
  int files = static_cast<int>(battery_files().size());
  int tested = 0, skipped = 0, violations = 0, errors = 0;
  std::vector<std::string> families;
  std::string bad;
  for (const auto& bp : battery_points()) {
    if (!bp.pt.xstar) continue;
    try {
      HessianQuery q{bp.pt.x, xund_for(bp.P, bp.pt), *bp.pt.xstar, hint_for(bp.pt)};
      HessianEstimate E = estimate_hessian(bp.P, q, options_for(bp.pt));
      std::string fam = family_of(E.theorem);
      if (std::find(families.begin(), families.end(), fam) == families.end()) families.push_back(fam);
      FdReport fd = fd_hessian(bp.P, bp.pt.x);
      if (!fd.stable) {
        ++skipped;
        continue;
      }
      ++tested;
      if (member(fd.hessian * q.xstar, E.result, 1e-3).verdict == Membership::Outside) {
        ++violations;
        bad += " " + bp.file + "/" + bp.name;
      }
    } catch (const std::exception& e) {
      ++errors;
      bad += " " + bp.file + "/" + bp.name + "(" + e.what() + ")";
    }
  }
  std::sort(families.begin(), families.end());
  std::ostringstream s;
  s << files << " instances, " << tested << " stable points checked, " << skipped << " unstable skipped, "
    << violations << " violations, " << errors << " errors, cases:";
  for (const auto& f : families) s << " " << f;
  s << bad;
  return {files >= 15 && families.size() == 4 && violations == 0 && errors == 0, s.str()};
}

// 4. LP exactness on five polytopes, 100 random parameters each.
Outcome criterion4() {
  struct Poly {
    Mat A;
    Vec b;
  };
  std::vector<Poly> polys;
  {
    Mat A(2, 1);
    A << 1, -1;
    polys.push_back({A, vec({1, 2})});
  }
  {
    Mat A(4, 2);
    A << 1, 0, 0, 1, -1, 0, 0, -1;
    polys.push_back({A, vec({1, 1, 0, 0})});
  }
  {
    Mat A(3, 2);
    A << -1, 0, 0, -1, 1, 1;
    polys.push_back({A, vec({0, 0, 1})});
  }
  {
    Mat A(5, 2);
    A << 1, 0, 0, 1, -1, 0, 0, -1, 1, 1;
    polys.push_back({A, vec({2, 2, 1, 1, 3})});
  }
  {
    Mat A(5, 3);
    A << -1, 0, 0, 0, -1, 0, 0, 0, -1, 1, 1, 1, 1, 0, 0;
    polys.push_back({A, vec({0, 0, 0, 2, 1})});
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-2, 2);
  int hess = 0, value_checks = 0, mismatches = 0, nonzero = 0, redraws = 0;
  Tolerances exact;
  exact.rational = true;
  for (const auto& poly : polys) {
    const int m = static_cast<int>(poly.A.cols());
    ParametricProblem P = lp_lhs_problem(poly.A, poly.b);
    for (int k = 0; k < 100; ++k) {
      Vec x(m);
      for (int j = 0; j < m; ++j) x(j) = U(rng);
      LpOracleResult o = lp_value_oracle(P, x);
      SolveResult S = solve_value(P, x, exact);
      ++value_checks;
      if (S.exact_value != o.value.get_str()) ++mismatches;
      if (o.argmin.size() != 1) {
        ++redraws;
        continue;
      }
      Vec y(m);
      for (int j = 0; j < m; ++j) y(j) = o.argmin[0][j].get_d();
      HessianOptions opt;
      opt.tol = exact;
      HessianEstimate E = lp_lhs_hessian(poly.A, poly.b, {x, y, unit_random(rng, m), HessianCase::LpLhs}, opt);
      ++hess;
      auto v = singleton_value(E.result, 0.0);
      if (!v || !v->isZero(0.0)) ++nonzero;
    }
  }
  std::ostringstream s;
  s << value_checks << " rational value checks with " << mismatches << " mismatches, " << hess
    << " Hessians with " << nonzero << " not exactly {0}, " << redraws << " parameters on fan boundaries";
  return {mismatches == 0 && nonzero == 0 && hess >= 450, s.str()};
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << "(" << v << ")";
  return s.str();
}

struct RandomKkt {
  ParametricProblem P;
  KktPoint K;
  Vec ustar;
};

// Quadratic problem with y = 0 a KKT point of the requested partition sizes.
RandomKkt random_kkt(std::mt19937_64& rng, int n_theta) {
  std::uniform_int_distribution<int> mdist(2, 3), nudist(0, 1), etadist(0, 2);
  std::uniform_real_distribution<double> U(-1, 1), Upos(0.5, 2);
  const int m = mdist(rng), n_nu = std::min(nudist(rng), m - 1), n_eta = etadist(rng);
  const int p = n_theta + n_nu + n_eta;
  Mat G(p, m);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < m; ++j) G(i, j) = std::round(4 * U(rng)) / 4;
  Vec u = Vec::Zero(p);
  for (int i = n_theta; i < n_theta + n_nu; ++i) u(i) = Upos(rng);
  Vec q = -G.transpose() * u;
  std::string f = "x1*y1";
  for (int j = 0; j < m; ++j)
    f += " + " + num(Upos(rng)) + "*y" + std::to_string(j + 1) + "^2 + " + num(q(j)) + "*y" + std::to_string(j + 1);
  std::string gs = "[";
  for (int i = 0; i < p; ++i) {
    std::string e = num(U(rng)) + "*x1";
    for (int j = 0; j < m; ++j) e += " + " + num(G(i, j)) + "*y" + std::to_string(j + 1);
    if (i >= n_theta + n_nu) e += " - 1";
    gs += (i ? ",\"" : "\"") + e + "\"";
  }
  gs += "]";
  std::string text = "{\"n\":1,\"m\":" + std::to_string(m) + ",\"f\":\"" + f + "\",\"g\":" + gs + "}";
  ParametricProblem P = parse_problem(text);
  KktPoint K = make_kkt_point(P, Vec::Zero(1), Vec::Zero(m), u);
  Vec a0(m);
  for (int j = 0; j < m; ++j) a0(j) = U(rng);
  Vec ustar(p);
  for (int i = 0; i < p; ++i) ustar(i) = U(rng);
  for (int i : K.part.nu) ustar(i) = -G.row(i).dot(a0);
  return {P, K, ustar};
}

// Closure-convention membership in the branch set, written from the
// defining conditions.
bool defining_conditions(const KktPoint& K, const Vec& ustar, Flavor flavor, const Vec& z, double tol) {
  const int m = static_cast<int>(K.y.size());
  const Mat& gy = K.ev.gy;
  Vec a = z.head(m), c = z.tail(z.size() - m);
  const double s = tol * (1.0 + z.lpNorm<Eigen::Infinity>() + ustar.lpNorm<Eigen::Infinity>());
  for (int i : K.part.nu)
    if (std::abs(gy.row(i).dot(a) + ustar(i)) > s) return false;
  for (int i : K.part.eta)
    if (std::abs(c(i)) > s) return false;
  for (int i : K.part.theta) {
    const double e = ustar(i) + gy.row(i).dot(a);
    bool ok = flavor == Flavor::M ? (std::abs(c(i)) <= s || std::abs(e) <= s || (e >= -s && c(i) >= -s))
                                  : ((e >= -s && c(i) >= -s) || (e <= s && c(i) <= s));
    if (!ok) return false;
  }
  return true;
}

// 5. Branch families on random KKT points with |theta| <= 4.
Outcome criterion5() {
  std::mt19937_64 rng(17);
  int checked_points = 0, bad_points = 0, zero_fail = 0, cover_fail = 0, kkts = 0, branches = 0;
  std::vector<int> thetas;
  while (kkts < 10) {
    std::optional<RandomKkt> drawn;
    try {
      drawn = random_kkt(rng, kkts % 5);
    } catch (const Error&) {
      continue;
    }
    const RandomKkt& R = *drawn;
    if (R.K.part.theta.size() > 4) continue;
    ++kkts;
    thetas.push_back(static_cast<int>(R.K.part.theta.size()));
    for (Flavor fl : {Flavor::M, Flavor::C}) {
      BranchFamily F = mho(R.K, R.ustar, fl);
      for (const auto& br : F.branches) {
        ++branches;
        VForm V = vertices(br.poly.closure());
        std::vector<Vec> pts = V.vertices;
        PolySet img = PolySet::image(br.poly, Mat::Identity(br.poly.dim(), br.poly.dim()), Vec::Zero(br.poly.dim()));
        for (const auto& s : sample_points(img, rng, 10, 5.0)) pts.push_back(s);
        for (const auto& z : pts) {
          ++checked_points;
          if (!defining_conditions(R.K, R.ustar, fl, z, 1e-9)) ++bad_points;
        }
      }
    }
    BranchFamily Z = mho(R.K, Vec::Zero(R.K.u.size()), Flavor::M);
    const int d = static_cast<int>(R.K.y.size() + R.K.u.size());
    bool zero_in = false;
    for (const auto& br : Z.branches)
      zero_in = zero_in || member(Vec::Zero(d), PolySet::image(br.poly, Mat::Identity(d, d), Vec::Zero(d)), 1e-12).verdict ==
                               Membership::Inside;
    if (!zero_in) ++zero_fail;
    if (!family_covers(mho(R.K, R.ustar, Flavor::C), mho(R.K, R.ustar, Flavor::M))) ++cover_fail;
  }
  std::ostringstream s;
  s << kkts << " KKT points (|theta| =";
  for (int t : thetas) s << " " << t;
  s << "), " << branches << " branches, " << checked_points << " branch points with " << bad_points
    << " violations, zero missing " << zero_fail << ", C-covers-M failures " << cover_fail;
  return {bad_points == 0 && zero_fail == 0 && cover_fail == 0, s.str()};
}

// 6. LICQ implies MFCQ on battery points; holala points give {0}.
Outcome criterion6() {
  int pts = 0, implication_fail = 0, holala_points = 0, holala_fail = 0;
  std::mt19937_64 rng(23);
  for (const auto& f : battery_files()) {
    ParametricProblem P = load_problem(f.string());
    for (const auto& [name, pt] : P.points) {
      std::vector<Vec> ys;
      SolveOptions so;
      so.pinned = pt.minimizers;
      try {
        ys = solve_value(P, pt.x, {}, so).minimizers;
      } catch (const Error&) {
      }
      if (P.affine_in_y()) {
        try {
          VForm V = vertices(feasible_polyhedron(P, pt.x));
          ys.insert(ys.end(), V.vertices.begin(), V.vertices.end());
        } catch (const Error&) {
        }
      }
      std::uniform_real_distribution<double> U(-3, 3);
      for (int k = 0; k < 20; ++k) {
        Vec y(P.m());
        for (int j = 0; j < P.m(); ++j) y(j) = U(rng);
        if ((P.g_values(pt.x, y).array() <= 0).all()) ys.push_back(y);
      }
      for (const auto& y : ys) {
        ++pts;
        if (check_licq(P, pt.x, y).holds && !check_mfcq(P, pt.x, y).holds) ++implication_fail;
        MultiplierPolyhedron M = multipliers(P, pt.x, y);
        for (const auto& u : M.vertices) {
          KktPoint K;
          try {
            K = make_kkt_point(P, pt.x, y, u);
          } catch (const Error&) {
            continue;
          }
          CqLambdaReport cq = check_cq_lambda(K);
          if (!cq.holala) continue;
          ++holala_points;
          CoderivEstimate E = coderivative_lambda(K, Vec::Zero(P.p()));
          auto v = singleton_value(E.result, 0.0);
          if (!v || !v->isZero(0.0)) ++holala_fail;
        }
      }
    }
  }
  std::ostringstream s;
  s << pts << " feasible points, " << implication_fail << " LICQ-without-MFCQ, " << holala_points
    << " Lipschitz-like multiplier points with " << holala_fail << " nonzero D*Lambda(0)";
  return {implication_fail == 0 && holala_points > 0 && holala_fail == 0, s.str()};
}

// Both directions of S(t v) = t S(v) on sampled points.
int homogeneity_misses(const std::function<PolySet(const Vec&)>& est, const Vec& v, std::mt19937_64& rng, int& checked) {
  int miss = 0;
  for (double t : {0.5, 3.0}) {
    PolySet a = est(v), b = est(t * v);
    for (const auto& p : sample_points(a, rng, 25, 3.0)) {
      ++checked;
      if (member(t * p, b, 1e-9).verdict == Membership::Outside) ++miss;
    }
    for (const auto& p : sample_points(b, rng, 25, 3.0)) {
      ++checked;
      if (member(p / t, a, 1e-9).verdict == Membership::Outside) ++miss;
    }
  }
  return miss;
}

// 7. Homogeneity in the input covector.
Outcome criterion7() {
  std::mt19937_64 rng(29);
  int checked = 0, misses = 0, instances = 0;
  for (const auto& bp : battery_points()) {
    if (!bp.pt.xstar) continue;
    Vec xund;
    try {
      xund = xund_for(bp.P, bp.pt);
    } catch (const Error&) {
      continue;
    }
    auto est = [&](const Vec& xs) {
      HessianQuery q{bp.pt.x, xund, xs, hint_for(bp.pt)};
      return estimate_hessian(bp.P, q, options_for(bp.pt)).result;
    };
    try {
      misses += homogeneity_misses(est, *bp.pt.xstar, rng, checked);
      ++instances;
    } catch (const HypothesisError&) {
    }
  }
  for (int k = 0; k < 5; ++k) {
    RandomKkt R = random_kkt(rng, 1 + k % 3);
    auto est = [&](const Vec& us) { return coderivative_lambda(R.K, us).result; };
    misses += homogeneity_misses(est, R.ustar, rng, checked);
    ++instances;
  }
  std::ostringstream s;
  s << instances << " estimates, " << checked << " scaled memberships, " << misses << " misses";
  return {misses == 0 && checked >= 50 * instances, s.str()};
}

// LP feasibility of q = sum l_k p_k, l in the simplex, in exact arithmetic.
bool lp_in_hull(const std::vector<Vec>& pts, const Vec& q) {
  const int K = static_cast<int>(pts.size());
  LpData<mpq_class> lp(K);
  lp.free.assign(K, false);
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    std::vector<mpq_class> row(K);
    for (int k = 0; k < K; ++k) row[k] = mpq_class(pts[k](i));
    lp.eq(row, mpq_class(q(i)));
  }
  lp.eq(std::vector<mpq_class>(K, 1), 1);
  return solve_lp(lp).status == LpStatus::Optimal;
}

// 8. Caratheodory certificates against the LP oracle.
Outcome criterion8() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(-1, 1), W(-1.3, 1.3);
  int queries = 0, disagree = 0, too_many = 0, bad_cert = 0, inside = 0;
  for (int cloud = 0; cloud < 20; ++cloud) {
    const int dim = 2 + cloud % 2;
    std::vector<Vec> pts;
    for (int k = 0; k < 10; ++k) {
      Vec p(dim);
      for (int i = 0; i < dim; ++i) p(i) = U(rng);
      pts.push_back(p);
    }
    ConvexHull H(pts);
    for (int k = 0; k < 10; ++k) {
      Vec q(dim);
      for (int i = 0; i < dim; ++i) q(i) = W(rng);
      ++queries;
      auto cert = H.certify(q);
      const bool oracle = lp_in_hull(pts, q);
      inside += oracle;
      if (cert.has_value() != oracle) ++disagree;
      if (!cert) continue;
      if (static_cast<int>(cert->supports.size()) > dim + 1) ++too_many;
      Vec sum = Vec::Zero(dim);
      double wsum = 0.0;
      bool nonneg = true;
      for (std::size_t s = 0; s < cert->supports.size(); ++s) {
        sum += cert->weights[s] * pts[cert->supports[s]];
        wsum += cert->weights[s];
        nonneg = nonneg && cert->weights[s] >= -1e-12;
      }
      if (!nonneg || std::abs(wsum - 1) > 1e-9 || (sum - q).lpNorm<Eigen::Infinity>() > 1e-9) ++bad_cert;
    }
  }
  std::ostringstream s;
  s << queries << " queries (" << inside << " inside), " << disagree << " disagreements, " << too_many
    << " certificates over dim+1, " << bad_cert << " invalid certificates";
  return {queries >= 200 && disagree == 0 && too_many == 0 && bad_cert == 0, s.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 9. Byte-identical JSON from repeated CLI runs.
Outcome criterion9() {
  if (g_cli.empty() || !fs::exists(g_cli)) return {false, "CLI binary not found: " + g_cli};
  fs::path dir = fs::temp_directory_path() / ("valfun-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  int files = 0, differ = 0, failed_runs = 0;
  for (const auto& f : battery_files()) {
    std::string outs[2];
    for (int r = 0; r < 2; ++r) {
      fs::path out = dir / (f.stem().string() + "." + std::to_string(r) + ".json");
      std::string cmd = "\"" + g_cli + "\" report --problem \"" + f.string() + "\" --json \"" + out.string() +
                        "\" > /dev/null 2>&1";
      int rc = std::system(cmd.c_str());
      if (!WIFEXITED(rc) || WEXITSTATUS(rc) == kExitUsage) ++failed_runs;
      outs[r] = slurp(out.string());
    }
    ++files;
    if (outs[0].empty() || outs[0] != outs[1]) ++differ;
  }
  fs::remove_all(dir);
  std::ostringstream s;
  s << files << " battery files run twice, " << differ << " differing reports, " << failed_runs << " failed runs";
  return {files > 0 && differ == 0 && failed_runs == 0, s.str()};
}

}  // namespace

int main(int argc, char** argv) {
  g_data = argc > 1 ? argv[1] : "data/battery";
  g_cli = argc > 2 ? argv[2] : "";
  struct Crit {
    int id;
    const char* title;
    double limit;  // seconds
    Outcome (*fn)();
  };
  const Crit crits[] = {
      {1, "Danskin consistency", 10, criterion1},      {2, "equality collapse", 30, criterion2},
      {3, "FD-inclusion soundness", 120, criterion3},  {4, "LP exactness", 30, criterion4},
      {5, "branch-family correctness", 10, criterion5}, {6, "CQ logic", 10, criterion6},
      {7, "homogeneity", 20, criterion7},              {8, "Caratheodory hull", 10, criterion8},
      {9, "determinism", 600, criterion9},
  };
  int failures = 0;
  for (const auto& c : crits) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = secs <= c.limit;
    bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s criterion %d (%s): %s; %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), secs, c.limit, in_time ? "" : ", over time");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
