#pragma once

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace agnorm {

struct AuditEntry {
  std::string stage;
  std::string check;
  double lhs = 0;
  double rhs = 0;
  bool passed = true;
};

// Trace of checks made by a multi-stage construction. A failed check is
// recorded and then thrown as an AuditError naming the stage.
class AuditLog {
 public:
  void require(const std::string& stage, const std::string& check, bool ok, double lhs = 0, double rhs = 0) {
    entries_.push_back({stage, check, lhs, rhs, ok});
    if (!ok) {
      std::ostringstream msg;
      msg << check << " (" << std::setprecision(10) << lhs << " vs " << rhs << ")";
      throw AuditError(stage, msg.str());
    }
  }
  // lhs <= rhs with a small absolute slack.
  void require_le(const std::string& stage, const std::string& check, double lhs, double rhs, double tol = 1e-9) {
    require(stage, check, lhs <= rhs + tol, lhs, rhs);
  }
  void record(const std::string& stage, const std::string& what, double value) {
    entries_.push_back({stage, what, value, 0, true});
  }
  const std::vector<AuditEntry>& entries() const { return entries_; }

 private:
  std::vector<AuditEntry> entries_;
};

}  // namespace agnorm
