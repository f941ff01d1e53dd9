#ifndef VALFUN_REPORT_HPP
#define VALFUN_REPORT_HPP

#include "valfun/hessian.hpp"
#include "valfun/oracle.hpp"

#include <json.hpp>

#include <string>

namespace valfun {

inline constexpr const char* kSchema = "valfun-sens/1";

nlohmann::json to_json(const Vec& v);
nlohmann::json to_json(const Mat& M);
nlohmann::json to_json(const Polyhedron& P);
nlohmann::json to_json(const PolySet& S);
nlohmann::json to_json(const HypothesisLog& log);
nlohmann::json to_json(const Tolerances& tol);
nlohmann::json to_json(const SolveResult& S);
nlohmann::json to_json(const Partition& part);
nlohmann::json to_json(const SubdiffEstimate& E);
nlohmann::json to_json(const HessianEstimate& E);
nlohmann::json to_json(const FdReport& r);

// Reads a PolySet written by to_json.
PolySet polyset_from_json(const nlohmann::json& j);

// One line per piece: provenance, domain size and the image bounds.
std::string describe(const PolySet& S);

}  // namespace valfun

#endif
