#pragma once

#include <cstdint>
#include <vector>

#include "crnsim/network.hpp"

namespace crnsim {

struct TrajectoryPoint {
  double time = 0.0;
  State state;

  friend bool operator==(const TrajectoryPoint&,
                         const TrajectoryPoint&) = default;
};

/// Outcome of one simulated path.
///
/// `update_count` is the cost measure: the number of jumps for exact methods,
/// the number of Poisson variates drawn for leap methods (steps x stages x R).
/// `steps` is the number of jumps (exact) or leap steps (leap methods).
struct PathResult {
  State final_state;
  std::uint64_t update_count = 0;
  std::uint64_t steps = 0;
  std::uint64_t clamp_events = 0;
  /// Empty unless requested. Starts at t = 0, time-ordered, and for leap
  /// methods also holds the intermediate weak-trapezoidal stage states.
  std::vector<TrajectoryPoint> trajectory;

  friend bool operator==(const PathResult&, const PathResult&) = default;
};

struct PathOptions {
  bool record_trajectory = false;
};

}  // namespace crnsim
