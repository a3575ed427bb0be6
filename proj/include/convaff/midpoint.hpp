#ifndef CONVAFF_MIDPOINT_HPP
#define CONVAFF_MIDPOINT_HPP

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "convaff/core.hpp"

namespace convaff {

enum class MidpointStatus { Satisfied, Violated };

inline const char* to_string(MidpointStatus s) {
  return s == MidpointStatus::Satisfied ? "Satisfied" : "Violated";
}

/// One pair (first, second) of set members and the candidate chosen for it.
struct PairWitness {
  Index first = 0;
  Index second = 0;
  Index candidate = -1;
  double value = 0.0;
};

/// Outcome of a pairwise "for all d1, d2 there exists d" condition scan.
/// `witnesses` holds the first passing candidate (in input order) for each
/// unordered pair when Satisfied; `worst` is the pair whose best candidate
/// fails by the most when Violated. `structural` marks conditions that hold
/// by convexity of the index set and were not scanned.
struct MidpointReport {
  MidpointStatus status = MidpointStatus::Satisfied;
  std::vector<PairWitness> witnesses;
  PairWitness worst;
  Index violated_pairs = 0;
  bool structural = false;
  std::string note;

  bool satisfied() const { return status == MidpointStatus::Satisfied; }

  static MidpointReport by_convexity(std::string why) {
    MidpointReport r;
    r.structural = true;
    r.note = std::move(why);
    return r;
  }
};

/// Raised by solvers whose hypothesis is checked on a finite set and fails.
class ConditionViolatedError : public Error {
 public:
  ConditionViolatedError(const std::string& what, MidpointReport report)
      : Error(ErrorKind::ConditionViolated, what), report_(std::move(report)) {}

  const MidpointReport& report() const { return report_; }

 private:
  MidpointReport report_;
};

/// Scans all unordered pairs i < j of an n-element set. `value(k, i, j)` is
/// the condition expression for candidate k against pair (i, j); the pair
/// passes when some candidate has value <= tol.
template <typename ValueFn>
MidpointReport scan_midpoint(Index n, ValueFn value, double tol) {
  require(n >= 1, ErrorKind::EmptySet, "midpoint scan needs a nonempty set");
  MidpointReport report;
  report.worst.value = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      PairWitness best{i, j, -1, std::numeric_limits<double>::infinity()};
      bool passed = false;
      for (Index k = 0; k < n; ++k) {
        const double v = static_cast<double>(value(k, i, j));
        if (v <= tol) {
          report.witnesses.push_back({i, j, k, v});
          passed = true;
          break;
        }
        if (v < best.value) best = {i, j, k, v};
      }
      if (!passed) {
        ++report.violated_pairs;
        if (best.value > report.worst.value) report.worst = best;
      }
    }
  }
  if (report.violated_pairs > 0) {
    report.status = MidpointStatus::Violated;
    report.witnesses.clear();
  } else {
    report.worst = {};
  }
  return report;
}

}  // namespace convaff

#endif  // CONVAFF_MIDPOINT_HPP
