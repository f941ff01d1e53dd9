#ifndef VALFUN_ERRORS_HPP
#define VALFUN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace valfun {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

// A standing assumption or theorem hypothesis does not hold.
class HypothesisError : public Error {
 public:
  HypothesisError(std::string hypothesis, const std::string& detail)
      : Error(hypothesis + ": " + detail), hypothesis_(std::move(hypothesis)) {}
  const std::string& hypothesis() const { return hypothesis_; }

 private:
  std::string hypothesis_;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace valfun

#endif
