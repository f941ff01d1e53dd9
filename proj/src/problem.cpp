#include "valfun/problem.hpp"

#include "valfun/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace valfun {

using nlohmann::json;

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Verified: return "verified";
    case Verdict::Asserted: return "asserted";
    case Verdict::Failed: return "failed";
  }
  return "?";
}

namespace {

ExprDerivs derive(const Expr& e, int n, int m) {
  ExprDerivs d;
  d.e = e;
  for (int j = 0; j < n; ++j) d.dx.push_back(e.diff_x(j));
  for (int i = 0; i < m; ++i) d.dy.push_back(e.diff_y(i));
  d.dxx.assign(n, std::vector<Expr>(n));
  d.dxy.assign(m, std::vector<Expr>(n));
  d.dyy.assign(m, std::vector<Expr>(m));
  bool quad = true;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      d.dxx[j][k] = d.dx[j].diff_x(k);
      quad = quad && d.dxx[j][k].is_constant();
    }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      d.dxy[i][j] = d.dy[i].diff_x(j);
      quad = quad && d.dxy[i][j].is_constant();
    }
    for (int k = 0; k < m; ++k) {
      d.dyy[i][k] = d.dy[i].diff_y(k);
      quad = quad && d.dyy[i][k].is_constant();
    }
  }
  d.quadratic = quad;
  return d;
}

Vec eval_list(const std::vector<Expr>& es, const std::vector<double>& x, const std::vector<double>& y) {
  Vec out(es.size());
  for (std::size_t i = 0; i < es.size(); ++i) out(i) = es[i].eval(x, y);
  return out;
}

Mat eval_grid(const std::vector<std::vector<Expr>>& es, int rows, int cols,
              const std::vector<double>& x, const std::vector<double>& y) {
  Mat out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = es[i][j].eval(x, y);
  return out;
}

bool second_y_zero(const ExprDerivs& d) {
  for (const auto& row : d.dyy)
    for (const auto& e : row)
      if (!e.is_zero()) return false;
  return true;
}

Mat const_grid(const std::vector<std::vector<Expr>>& es, int rows, int cols) {
  Mat out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = es[i][j].value();
  return out;
}

bool psd(const Mat& H, double tol) {
  if (H.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
  return es.eigenvalues().minCoeff() >= -tol;
}

}  // namespace

ParametricProblem::ParametricProblem(int n, int m, Expr f, std::vector<Expr> g,
                                     std::optional<Box> y_box, ProblemFlags flags)
    : n_(n), m_(m), f_(std::move(f)), g_(std::move(g)), y_box_(std::move(y_box)), flags_(flags) {
  if (n_ < 1 || m_ < 1) throw Error("problem dimensions must satisfy n, m >= 1");
  auto check = [&](const Expr& e, const std::string& what) {
    if (e.max_x_index() >= n_) throw Error(what + " uses x" + std::to_string(e.max_x_index() + 1) + " but n = " + std::to_string(n_));
    if (e.max_y_index() >= m_) throw Error(what + " uses y" + std::to_string(e.max_y_index() + 1) + " but m = " + std::to_string(m_));
  };
  check(f_, "f");
  for (std::size_t i = 0; i < g_.size(); ++i) check(g_[i], "g[" + std::to_string(i + 1) + "]");
  if (y_box_ && static_cast<int>(y_box_->size()) != m_)
    throw Error("dimension mismatch: y_box has " + std::to_string(y_box_->size()) + " entries, m = " + std::to_string(m_));
  df_ = std::make_shared<const ExprDerivs>(derive(f_, n_, m_));
  std::vector<ExprDerivs> dg;
  for (const auto& gi : g_) dg.push_back(derive(gi, n_, m_));
  dg_ = std::make_shared<const std::vector<ExprDerivs>>(std::move(dg));
}

double ParametricProblem::f_value(const Vec& x, const Vec& y) const { return f_.eval(x, y); }

Vec ParametricProblem::g_values(const Vec& x, const Vec& y) const {
  return eval_list(g_, to_std(x), to_std(y));
}

Vec ParametricProblem::fx(const Vec& x, const Vec& y) const { return eval_list(df_->dx, to_std(x), to_std(y)); }
Vec ParametricProblem::fy(const Vec& x, const Vec& y) const { return eval_list(df_->dy, to_std(x), to_std(y)); }

Mat ParametricProblem::gx(const Vec& x, const Vec& y) const {
  auto xs = to_std(x), ys = to_std(y);
  Mat out(p(), n_);
  for (int i = 0; i < p(); ++i) out.row(i) = eval_list((*dg_)[i].dx, xs, ys).transpose();
  return out;
}

Mat ParametricProblem::gy(const Vec& x, const Vec& y) const {
  auto xs = to_std(x), ys = to_std(y);
  Mat out(p(), m_);
  for (int i = 0; i < p(); ++i) out.row(i) = eval_list((*dg_)[i].dy, xs, ys).transpose();
  return out;
}

Vec ParametricProblem::lagrangian_grad_x(const Vec& x, const Vec& y, const Vec& u) const {
  Vec r = fx(x, y);
  if (p() > 0) r += gx(x, y).transpose() * u;
  return r;
}

Vec ParametricProblem::lagrangian_grad_y(const Vec& x, const Vec& y, const Vec& u) const {
  Vec r = fy(x, y);
  if (p() > 0) r += gy(x, y).transpose() * u;
  return r;
}

Mat ParametricProblem::lagrangian_hyy(const Vec& x, const Vec& y, const Vec& u) const {
  auto xs = to_std(x), ys = to_std(y);
  Mat H = eval_grid(df_->dyy, m_, m_, xs, ys);
  for (int i = 0; i < p(); ++i)
    if (u(i) != 0.0) H += u(i) * eval_grid((*dg_)[i].dyy, m_, m_, xs, ys);
  return H;
}

bool ParametricProblem::g_depends_on_x() const {
  return std::any_of(g_.begin(), g_.end(), [](const Expr& e) { return e.depends_on_x(); });
}

bool ParametricProblem::affine_in_y() const {
  if (!second_y_zero(*df_)) return false;
  return std::all_of(dg_->begin(), dg_->end(), second_y_zero);
}

bool ParametricProblem::quadratic() const {
  if (!df_->quadratic) return false;
  return std::all_of(dg_->begin(), dg_->end(), [](const ExprDerivs& d) { return d.quadratic; });
}

Verdict ParametricProblem::concave_convex() const {
  if (quadratic()) {
    auto ok = [&](const ExprDerivs& d) {
      return psd(-const_grid(d.dxx, n_, n_), 1e-12) && psd(const_grid(d.dyy, m_, m_), 1e-12);
    };
    bool all = ok(*df_) && std::all_of(dg_->begin(), dg_->end(), ok);
    return all ? Verdict::Verified : Verdict::Failed;
  }
  return flags_.concave_convex ? Verdict::Asserted : Verdict::Failed;
}

Verdict ParametricProblem::convex_in_y() const {
  if (quadratic()) {
    auto ok = [&](const ExprDerivs& d) { return psd(const_grid(d.dyy, m_, m_), 1e-12); };
    bool all = ok(*df_) && std::all_of(dg_->begin(), dg_->end(), ok);
    return all ? Verdict::Verified : Verdict::Failed;
  }
  return flags_.convex_in_y ? Verdict::Asserted : Verdict::Failed;
}

std::vector<std::string> ParametricProblem::warnings() const {
  std::vector<std::string> w;
  if (n_ > 8) w.push_back("n = " + std::to_string(n_) + " exceeds desk-scale guard 8");
  if (m_ > 8) w.push_back("m = " + std::to_string(m_) + " exceeds desk-scale guard 8");
  if (p() > 20) w.push_back("p = " + std::to_string(p()) + " exceeds desk-scale guard 20");
  return w;
}

LagrangianEval differentiate(const ParametricProblem& P, const Vec& x, const Vec& y, const Vec& u) {
  const int n = P.n(), m = P.m(), p = P.p();
  if (x.size() != n || y.size() != m || u.size() != p)
    throw Error("dimension mismatch: point sizes (" + std::to_string(x.size()) + ", " +
                std::to_string(y.size()) + ", " + std::to_string(u.size()) + ") vs (n, m, p) = (" +
                std::to_string(n) + ", " + std::to_string(m) + ", " + std::to_string(p) + ")");
  auto xs = to_std(x), ys = to_std(y);
  LagrangianEval ev;
  ev.x = x;
  ev.y = y;
  ev.u = u;
  ev.f = P.f().eval(xs, ys);
  ev.g = eval_list(P.g(), xs, ys);
  ev.L = ev.f + (p > 0 ? u.dot(ev.g) : 0.0);
  const ExprDerivs& df = P.df();
  ev.fx = eval_list(df.dx, xs, ys);
  ev.fy = eval_list(df.dy, xs, ys);
  ev.hxx = eval_grid(df.dxx, n, n, xs, ys);
  ev.hxy = eval_grid(df.dxy, m, n, xs, ys);
  ev.hyy = eval_grid(df.dyy, m, m, xs, ys);
  ev.gx = Mat::Zero(p, n);
  ev.gy = Mat::Zero(p, m);
  for (int i = 0; i < p; ++i) {
    const ExprDerivs& d = P.dg(i);
    ev.gx.row(i) = eval_list(d.dx, xs, ys).transpose();
    ev.gy.row(i) = eval_list(d.dy, xs, ys).transpose();
    if (u(i) != 0.0) {
      ev.hxx += u(i) * eval_grid(d.dxx, n, n, xs, ys);
      ev.hxy += u(i) * eval_grid(d.dxy, m, n, xs, ys);
      ev.hyy += u(i) * eval_grid(d.dyy, m, m, xs, ys);
    }
  }
  ev.hyx = ev.hxy.transpose();
  ev.grad_x = ev.fx + ev.gx.transpose() * u;
  ev.grad_y = ev.fy + ev.gy.transpose() * u;
  return ev;
}

double kkt_residual(const ParametricProblem& P, const Vec& x, const Vec& y, const Vec& u) {
  Vec fy = P.fy(x, y);
  Vec gy_u = P.p() > 0 ? Vec(P.gy(x, y).transpose() * u) : Vec::Zero(P.m());
  double r = (fy + gy_u).lpNorm<Eigen::Infinity>() / (1.0 + fy.lpNorm<Eigen::Infinity>());
  Vec g = P.g_values(x, y);
  for (int i = 0; i < P.p(); ++i) {
    r = std::max(r, -u(i));
    r = std::max(r, g(i));
    r = std::max(r, std::abs(u(i) * g(i)));
  }
  return r;
}

Partition classify(const ParametricProblem& P, const Vec& x, const Vec& y, const Vec& u, const Tolerances& tol) {
  Vec g = P.g_values(x, y);
  const double band = 100.0 * tol.act;
  Partition part;
  for (int i = 0; i < P.p(); ++i) {
    const double gi = g(i), ui = u(i);
    const bool g_zero = std::abs(gi) <= tol.act;
    const bool u_zero = std::abs(ui) <= tol.act;
    if (u_zero && gi < -band) {
      part.eta.push_back(i);
    } else if (u_zero && g_zero) {
      part.theta.push_back(i);
    } else if (ui > band && g_zero) {
      part.nu.push_back(i);
    } else {
      part.theta.push_back(i);
      part.ambiguous.push_back(i);
    }
  }
  return part;
}

KktPoint make_kkt_point(const ParametricProblem& P, const Vec& x, const Vec& y, const Vec& u, const Tolerances& tol) {
  KktPoint k;
  k.x = x;
  k.y = y;
  k.u = u;
  k.ev = differentiate(P, x, y, u);
  k.residual = kkt_residual(P, x, y, u);
  if (k.residual > tol.kkt)
    throw HypothesisError("KKT", "residual " + format_double(k.residual) + " exceeds tol_kkt " + format_double(tol.kkt) +
                                     " at y = " + format_vec(y) + ", u = " + format_vec(u));
  k.part = classify(P, x, y, u, tol);
  return k;
}

namespace {

Vec json_vec(const json& j, int expect, const std::string& what) {
  if (!j.is_array()) throw Error(what + " must be an array");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  if (expect >= 0 && v.size() != expect)
    throw Error("dimension mismatch: " + what + " has " + std::to_string(v.size()) + " entries, expected " +
                std::to_string(expect));
  return v;
}

Expr json_expr(const json& j, int n, int m, const std::string& what) {
  if (!j.is_string()) throw Error(what + " must be a string expression");
  try {
    return parse_expr(j.get<std::string>(), n, m);
  } catch (const ParseError& e) {
    throw ParseError(what + ": " + std::string(e.what()).substr(0, std::string(e.what()).find(" at line")), e.line(), e.column());
  }
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

ParametricProblem parse_problem(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("problem file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error("problem file must be a JSON object");
  for (const char* key : {"n", "m", "f"})
    if (!j.contains(key)) throw Error(std::string("problem file misses key '") + key + "'");
  const int n = j.at("n").get<int>();
  const int m = j.at("m").get<int>();
  Expr f = json_expr(j.at("f"), n, m, "f");
  std::vector<Expr> g;
  if (j.contains("g")) {
    const json& ga = j.at("g");
    if (!ga.is_array()) throw Error("g must be an array of expressions");
    for (std::size_t i = 0; i < ga.size(); ++i) g.push_back(json_expr(ga[i], n, m, "g[" + std::to_string(i + 1) + "]"));
  }
  std::optional<Box> box;
  if (j.contains("y_box")) {
    Box b;
    for (const auto& pr : j.at("y_box")) {
      if (!pr.is_array() || pr.size() != 2) throw Error("y_box entries must be [lo, hi] pairs");
      double lo = pr[0].get<double>(), hi = pr[1].get<double>();
      if (!(lo <= hi)) throw Error("y_box entry has lo > hi");
      b.emplace_back(lo, hi);
    }
    box = b;
  }
  ProblemFlags flags;
  if (j.contains("assert")) {
    const json& a = j.at("assert");
    flags.concave_convex = a.value("concave_convex", false);
    flags.convex_in_y = a.value("convex_in_y", false);
  }
  ParametricProblem P(n, m, f, g, box, flags);
  P.name = j.value("name", "");
  if (j.contains("points")) {
    for (const auto& [name, pj] : j.at("points").items()) {
      NamedPoint pt;
      if (!pj.contains("x")) throw Error("point '" + name + "' misses x");
      pt.x = json_vec(pj.at("x"), n, "points." + name + ".x");
      if (pj.contains("minimizers"))
        for (const auto& y : pj.at("minimizers")) pt.minimizers.push_back(json_vec(y, m, "points." + name + ".minimizers"));
      if (pj.contains("xund")) pt.xund = json_vec(pj.at("xund"), n, "points." + name + ".xund");
      if (pj.contains("xstar")) pt.xstar = json_vec(pj.at("xstar"), n, "points." + name + ".xstar");
      pt.case_hint = pj.value("case", "");
      P.points.emplace(name, std::move(pt));
    }
  }
  return P;
}

ParametricProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open problem file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  ParametricProblem P = parse_problem(ss.str());
  if (P.name.empty()) {
    auto slash = path.find_last_of('/');
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    P.name = base.substr(0, base.rfind('.'));
  }
  return P;
}

std::string serialize_problem(const ParametricProblem& P) {
  json j;
  if (!P.name.empty()) j["name"] = P.name;
  j["n"] = P.n();
  j["m"] = P.m();
  j["f"] = P.f().str();
  j["g"] = json::array();
  for (const auto& gi : P.g()) j["g"].push_back(gi.str());
  if (P.y_box()) {
    j["y_box"] = json::array();
    for (const auto& [lo, hi] : *P.y_box()) j["y_box"].push_back({lo, hi});
  }
  if (P.flags().concave_convex || P.flags().convex_in_y)
    j["assert"] = {{"concave_convex", P.flags().concave_convex}, {"convex_in_y", P.flags().convex_in_y}};
  if (!P.points.empty()) {
    json pts = json::object();
    for (const auto& [name, pt] : P.points) {
      json pj;
      pj["x"] = vec_json(pt.x);
      if (!pt.minimizers.empty()) {
        pj["minimizers"] = json::array();
        for (const auto& y : pt.minimizers) pj["minimizers"].push_back(vec_json(y));
      }
      if (pt.xund) pj["xund"] = vec_json(*pt.xund);
      if (pt.xstar) pj["xstar"] = vec_json(*pt.xstar);
      if (!pt.case_hint.empty()) pj["case"] = pt.case_hint;
      pts[name] = pj;
    }
    j["points"] = pts;
  }
  return j.dump(2);
}

bool structurally_equal(const ParametricProblem& a, const ParametricProblem& b) {
  if (a.n() != b.n() || a.m() != b.m() || a.p() != b.p()) return false;
  if (!a.f().same_as(b.f())) return false;
  for (int i = 0; i < a.p(); ++i)
    if (!a.g()[i].same_as(b.g()[i])) return false;
  if (a.y_box() != b.y_box()) return false;
  if (a.flags().concave_convex != b.flags().concave_convex || a.flags().convex_in_y != b.flags().convex_in_y) return false;
  if (a.points.size() != b.points.size()) return false;
  for (const auto& [name, pa] : a.points) {
    auto it = b.points.find(name);
    if (it == b.points.end()) return false;
    const NamedPoint& pb = it->second;
    if (pa.x != pb.x || pa.minimizers.size() != pb.minimizers.size() || pa.xund != pb.xund || pa.xstar != pb.xstar)
      return false;
    for (std::size_t k = 0; k < pa.minimizers.size(); ++k)
      if (pa.minimizers[k] != pb.minimizers[k]) return false;
  }
  return true;
}

}  // namespace valfun
