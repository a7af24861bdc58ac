#pragma once

#include <vector>

#include "esdirk/dense_output.hpp"
#include "esdirk/problem.hpp"

namespace esdirk {

struct EventOptions {
  int samples = 9;  // theta = 0, 1/(samples-1), ..., 1
  double t_tol = 1e-10;      // times max(1, |t|)
  double guard_tol = 1e-12;  // times the guard scale
  int max_iterations = 100;
};

struct EventHit {
  double t_event = 0.0;
  double theta = 0.0;
  Vector x_event;
  int spec_index = 0;
  bool terminal = false;
  int iterations = 0;
};

/// Locates the guard zero crossings inside one segment.
///
/// Each guard is sampled on an equidistant theta grid; |g| <= guard_tol
/// counts as zero. A zero at the left end of a sampling interval is
/// skipped, a zero at the right end is a hit. Sign changes are filtered by
/// direction on the sampled signs, then refined on theta with the Illinois
/// variant of regula falsi until the bracket is shorter than t_tol in time
/// or |g| <= guard_tol. The reported time is the bracket end past the
/// crossing. Hits are sorted by time. Throws UnsupportedMethodError when
/// the segment has no event-safe extension.
std::vector<EventHit> scan_segment(const DenseSegment& segment,
                                   const std::vector<EventSpec>& specs,
                                   const EventOptions& options = {});

struct RestartState {
  double t = 0.0;
  Vector x;
  Vector k1;
};

/// State to resume from after a non-terminal event: the action (if any) is
/// applied and the first-stage derivative is recomputed from scratch.
/// Throws InconsistentInitialConditions when a DAE reset violates the
/// constraints.
RestartState restart_after_event(const IvpProblem& problem, const EventHit& hit,
                                 const EventSpec& spec,
                                 double consistency_tol = 1e-8);

}  // namespace esdirk
