#ifndef VALFUN_CLI_HPP
#define VALFUN_CLI_HPP

#include "valfun/hessian.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace valfun {

enum ExitCode { kExitOk = 0, kExitEmpty = 1, kExitHypothesis = 2, kExitUsage = 64 };

struct RunConfig {
  std::string command;
  std::string problem_path;
  std::vector<std::string> points;
  std::optional<Vec> xbar, xund, xstar;
  std::string case_hint;  // empty: the point's hint, else auto
  Flavor flavor = Flavor::M;
  Tolerances tol;
  bool oracle = true;
  std::string json_path;
};

struct RunResult {
  int exit_code = kExitOk;
  nlohmann::json report;
  std::string text;  // human-readable table
};

// Parses a comma-separated list of numbers.
Vec parse_csv(const std::string& text);

RunResult cmd_analyze(const RunConfig& cfg);
RunResult cmd_first_order(const RunConfig& cfg);
RunResult cmd_hessian(const RunConfig& cfg);
RunResult cmd_verify(const RunConfig& cfg);
// Every named point of the problem file, in name order.
RunResult cmd_report(const RunConfig& cfg);

// Dispatches on cfg.command and maps errors to exit codes.
RunResult run(const RunConfig& cfg);

}  // namespace valfun

#endif
