#pragma once

// Result plumbing shared by the balance algorithms and the baselines.

#include <optional>
#include <string>
#include <vector>

#include "lossbal/common.hpp"

namespace lossbal {

struct GroupLossValues {
  double l0 = 0.0;
  double l1 = 0.0;
  double overall = 0.0;  // p0*l0 + p1*l1
  // Recomputed so the reported gap can never drift from the reported losses.
  double gap() const { return std::abs(l0 - l1); }
};

// One outer bisection step: interval [lo, hi], probe mid, observed value
// (the shifted group-1 loss for the level bisection, g_gamma for the
// interpolation bisection).
struct TraceEntry {
  double lo = 0.0;
  double hi = 0.0;
  double mid = 0.0;
  double value = 0.0;
};

struct SolveReport {
  Vector w;
  GroupLossValues train;                // losses under the training objective
  std::optional<GroupLossValues> test;  // filled by pipelines that hold a test split
  std::vector<TraceEntry> trace;
  std::string algorithm;
  double gamma = 0.0;
  long long wallclock_ms = 0;
};

// Bounded-group-loss view of a solution: c = max group loss is the smallest
// level c such that both group losses are <= c.
struct BglReport {
  double min_loss = 0.0;
  double max_loss = 0.0;
  double bgl_level = 0.0;
};

inline BglReport bgl_report(const SolveReport& report) {
  BglReport out;
  out.min_loss = std::min(report.train.l0, report.train.l1);
  out.max_loss = std::max(report.train.l0, report.train.l1);
  out.bgl_level = out.max_loss;
  return out;
}

}  // namespace lossbal
