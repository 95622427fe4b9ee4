#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pulsequota {

/// One recorded point of a piecewise-continuous abundance path. A pulse is
/// stored as two rows at the same time: the pre-reset value K+ with
/// `event = true`, then the post-reset value K- with `event = false`.
struct Sample {
  double t = 0.0;
  double n = 0.0;
  bool event = false;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct StochTrajectory {
  std::vector<Sample> samples;
  std::uint64_t increments_consumed = 0;
  std::uint64_t path_id = 0;
};

}  // namespace pulsequota
