#ifndef VALFUN_HYPOTHESIS_HPP
#define VALFUN_HYPOTHESIS_HPP

#include <string>
#include <vector>

namespace valfun {

enum class Verdict { Verified, Asserted, Failed };
const char* to_string(Verdict v);

struct Hypothesis {
  std::string name;
  Verdict status;
  std::string detail;
};

class HypothesisLog {
 public:
  void add(std::string name, Verdict status, std::string detail = "") {
    entries_.push_back({std::move(name), status, std::move(detail)});
  }
  void append(const HypothesisLog& other) {
    entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
  }
  bool any_failed() const {
    for (const auto& h : entries_)
      if (h.status == Verdict::Failed) return true;
    return false;
  }
  const std::vector<Hypothesis>& entries() const { return entries_; }

 private:
  std::vector<Hypothesis> entries_;
};

}  // namespace valfun

#endif
