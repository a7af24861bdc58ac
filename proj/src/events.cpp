#include "esdirk/events.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "esdirk/errors.hpp"
#include "esdirk/stage_solver.hpp"

namespace esdirk {

namespace {

int sign_of(double g, double tol) {
  if (std::abs(g) <= tol) return 0;
  return g > 0.0 ? 1 : -1;
}

bool direction_matches(Direction d, int before) {
  switch (d) {
    case Direction::Any: return true;
    case Direction::Up: return before < 0;
    case Direction::Down: return before > 0;
  }
  return false;
}

}  // namespace

std::vector<EventHit> scan_segment(const DenseSegment& segment,
                                   const std::vector<EventSpec>& specs,
                                   const EventOptions& options) {
  if (!segment.extension || !segment.event_safe) {
    throw UnsupportedMethodError(
        "event location needs an event-safe continuous extension");
  }
  if (options.samples < 2)
    throw std::invalid_argument("event scan needs at least two samples");

  const int n = options.samples;
  const double t_tol =
      options.t_tol * std::max(1.0, std::abs(segment.t_n + segment.h));
  std::vector<EventHit> hits;

  for (std::size_t spec_index = 0; spec_index < specs.size(); ++spec_index) {
    const auto& spec = specs[spec_index];
    auto guard = [&](double theta) {
      return spec.guard(segment.t_n + theta * segment.h, segment.eval(theta));
    };

    std::vector<double> theta(n), g(n);
    double scale = 1.0;
    for (int k = 0; k < n; ++k) {
      theta[k] = segment.theta_end * k / (n - 1);
      g[k] = guard(theta[k]);
      scale = std::max(scale, std::abs(g[k]));
    }
    const double g_tol = options.guard_tol * scale;

    for (int k = 0; k + 1 < n; ++k) {
      const int before = sign_of(g[k], g_tol);
      const int after = sign_of(g[k + 1], g_tol);
      if (before == 0) continue;
      if (after == before) continue;
      if (!direction_matches(spec.direction, before)) continue;

      EventHit hit;
      hit.spec_index = static_cast<int>(spec_index);
      hit.terminal = spec.terminal;
      if (after == 0) {
        hit.theta = theta[k + 1];
      } else {
        // Illinois: lo keeps the pre-crossing sign, hi the post-crossing one.
        double lo = theta[k], hi = theta[k + 1];
        double glo = g[k], ghi = g[k + 1];
        int last_side = 0;
        hit.theta = hi;
        for (int it = 0; it < options.max_iterations; ++it) {
          if ((hi - lo) * std::abs(segment.h) <= t_tol) break;
          double mid = hi - ghi * (hi - lo) / (ghi - glo);
          if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
          const double gm = guard(mid);
          ++hit.iterations;
          if (sign_of(gm, g_tol) == 0) {
            hi = mid;
            break;
          }
          if ((gm > 0.0) == (glo > 0.0)) {
            lo = mid;
            glo = gm;
            if (last_side == -1) ghi *= 0.5;
            last_side = -1;
          } else {
            hi = mid;
            ghi = gm;
            if (last_side == 1) glo *= 0.5;
            last_side = 1;
          }
        }
        hit.theta = hi;
      }
      hit.t_event = segment.t_n + hit.theta * segment.h;
      hit.x_event = segment.eval(hit.theta);
      hits.push_back(std::move(hit));
    }
  }
  std::sort(hits.begin(), hits.end(), [](const EventHit& a, const EventHit& b) {
    return a.t_event < b.t_event;
  });
  return hits;
}

RestartState restart_after_event(const IvpProblem& problem, const EventHit& hit,
                                 const EventSpec& spec, double consistency_tol) {
  RestartState state;
  state.t = hit.t_event;
  state.x = spec.action ? spec.action(hit.t_event, hit.x_event) : hit.x_event;
  state.k1 = initial_derivative(problem, state.t, state.x, consistency_tol);
  return state;
}

}  // namespace esdirk
