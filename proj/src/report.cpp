#include "valfun/report.hpp"

#include "valfun/errors.hpp"

#include <cmath>
#include <sstream>

namespace valfun {

using nlohmann::json;

namespace {

// Infinite bounds have no JSON number; they are written as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double read_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  return NAN;
}

Vec read_vec(const json& j) {
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = read_number(j[i]);
  return v;
}

Mat read_mat(const json& j, Eigen::Index cols) {
  Mat M(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) throw Error("matrix row has the wrong length");
    for (Eigen::Index c = 0; c < cols; ++c) M(i, c) = read_number(j[i][c]);
  }
  return M;
}

}  // namespace

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

json to_json(const Mat& M) {
  json a = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) a.push_back(to_json(Vec(M.row(i).transpose())));
  return a;
}

json to_json(const Polyhedron& P) {
  return {{"dim", P.dim()}, {"C", to_json(P.C())}, {"d", to_json(P.d())}, {"E", to_json(P.E())},
          {"e", to_json(P.e())}, {"open", P.open_rows()}};
}

json to_json(const PolySet& S) {
  json pieces = json::array();
  for (const auto& pc : S.pieces()) {
    json p = to_json(pc.domain);
    p["A"] = to_json(pc.map);
    p["b"] = to_json(pc.offset);
    p["provenance"] = pc.tag;
    pieces.push_back(p);
  }
  return {{"dim", S.dim()}, {"pieces", pieces}};
}

PolySet polyset_from_json(const json& j) {
  PolySet S(j.at("dim").get<int>());
  for (const auto& p : j.at("pieces")) {
    const int k = p.at("dim").get<int>();
    Polyhedron D(k);
    Mat C = read_mat(p.at("C"), k), E = read_mat(p.at("E"), k);
    Vec d = read_vec(p.at("d")), e = read_vec(p.at("e"));
    std::vector<int> open = p.at("open").get<std::vector<int>>();
    for (Eigen::Index i = 0; i < C.rows(); ++i) {
      bool is_open = std::find(open.begin(), open.end(), static_cast<int>(i)) != open.end();
      D.add_le(Vec(C.row(i).transpose()), d(i), is_open);
    }
    for (Eigen::Index i = 0; i < E.rows(); ++i) D.add_eq(Vec(E.row(i).transpose()), e(i));
    S.add({D, read_mat(p.at("A"), k), read_vec(p.at("b")), p.at("provenance").get<std::string>()});
  }
  return S;
}

json to_json(const HypothesisLog& log) {
  json a = json::array();
  for (const auto& h : log.entries())
    a.push_back({{"hypothesis", h.name}, {"status", to_string(h.status)}, {"detail", h.detail}});
  return a;
}

json to_json(const Tolerances& tol) {
  return {{"act", tol.act},   {"kkt", tol.kkt},     {"rank", tol.rank},           {"dedup", tol.dedup},
          {"singleton", tol.singleton}, {"branch_cap", tol.branch_cap}, {"rational", tol.rational}};
}

json to_json(const SolveResult& S) {
  json ys = json::array(), face = json::array();
  for (const auto& y : S.minimizers) ys.push_back(to_json(y));
  for (const auto& y : S.face) face.push_back(to_json(y));
  json j = {{"x", to_json(S.x)},          {"value", number(S.value)}, {"minimizers", ys},
            {"certificate", to_string(S.certificate)}, {"singleton", S.singleton}, {"face", face},
            {"notes", S.notes}};
  if (!S.exact_value.empty()) j["exact_value"] = S.exact_value;
  return j;
}

namespace {

json one_based(const std::vector<int>& idx) {
  json a = json::array();
  for (int i : idx) a.push_back(i + 1);
  return a;
}

}  // namespace

json to_json(const Partition& part) {
  return {{"eta", one_based(part.eta)}, {"theta", one_based(part.theta)}, {"nu", one_based(part.nu)},
          {"ambiguous", one_based(part.ambiguous)}};
}

json to_json(const SubdiffEstimate& E) {
  json gens = json::array();
  for (const auto& g : E.generators) {
    json gj = {{"value", to_json(g.value)}, {"y", to_json(g.y)}};
    if (g.u) gj["u"] = to_json(*g.u);
    gens.push_back(gj);
  }
  return {{"formula", to_string(E.formula)}, {"xbar", to_json(E.xbar)}, {"generators", gens},
          {"hull", E.hull},                   {"inclusion_only", E.inclusion_only},
          {"set", to_json(E.set)},            {"hypotheses", to_json(E.log)},
          {"notes", E.notes}};
}

json to_json(const HessianEstimate& E) {
  json sup = json::array();
  for (const auto& s : E.supports) {
    json sj = {{"y", to_json(s.y)}, {"weight", s.weight}, {"role", s.role}};
    if (s.u) sj["u"] = to_json(*s.u);
    sup.push_back(sj);
  }
  json j = {{"theorem", E.theorem},       {"equality", E.equality}, {"approximate", E.approximate},
            {"result", to_json(E.result)}, {"hypotheses", to_json(E.log)}, {"supports", sup},
            {"notes", E.notes}};
  j["collapse"] = E.collapse ? to_json(*E.collapse) : json(nullptr);
  return j;
}

json to_json(const FdReport& r) {
  return {{"point", to_json(r.point)},     {"steps", r.steps},           {"gradient", to_json(r.gradient)},
          {"hessian", to_json(r.hessian)}, {"plain", to_json(r.plain)}, {"error", number(r.error)},
          {"stable", r.stable}};
}

std::string describe(const PolySet& S) {
  std::ostringstream out;
  if (S.empty()) return "  (empty)\n";
  for (std::size_t i = 0; i < S.pieces().size(); ++i) {
    const Piece& pc = S.pieces()[i];
    out << "  [" << i + 1 << "] " << (pc.tag.empty() ? "-" : pc.tag) << ": ";
    auto b = image_bounds(pc);
    if (!b) {
      out << "empty\n";
      continue;
    }
    if ((b->first - b->second).lpNorm<Eigen::Infinity>() <= 1e-12) {
      out << "point " << format_vec(b->first) << "\n";
      continue;
    }
    out << "dim " << pc.domain.dim() << ", box";
    for (Eigen::Index k = 0; k < b->first.size(); ++k)
      out << " [" << format_double(b->first(k)) << ", " << format_double(b->second(k)) << "]";
    out << "\n";
  }
  return out.str();
}

}  // namespace valfun
