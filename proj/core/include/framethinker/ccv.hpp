#pragma once

// Rule-based consistency checks over a trajectory: no repeated actions,
// frame numbers must be used by the next frame selection, and frame numbers
// asserted in a thought must agree with the interval actually chosen.

#include <optional>
#include <string>

#include "framethinker/trajectory.hpp"

namespace framethinker {

enum class CcvReason { Redundancy, LogicalFlow, Fidelity };

std::string_view to_string(CcvReason reason);
CcvReason parse_ccv_reason(std::string_view text);

struct CcvVerdict {
  bool pass = true;
  std::optional<CcvReason> reason;
  std::optional<std::size_t> failing_turn;
  std::string detail;

  static CcvVerdict ok() { return {}; }
  static CcvVerdict fail(CcvReason reason, std::size_t turn, std::string detail) {
    return {false, reason, turn, std::move(detail)};
  }
};

struct CcvOptions {
  // Slack, in frames, when matching thought mentions against a chosen interval.
  FrameIndex fidelity_tolerance = 0;
};

namespace ccv {

CcvVerdict check_redundancy(const Trajectory& traj);
CcvVerdict check_logical_flow(const Trajectory& traj);
CcvVerdict check_fidelity(const Trajectory& traj, FrameIndex max_frame, CcvOptions options = {});

/// Runs redundancy, logical flow, then fidelity and returns the first failure.
CcvVerdict verify(const Trajectory& traj, FrameIndex max_frame, CcvOptions options = {});

inline CcvVerdict verify(const Trajectory& traj, CcvOptions options = {}) {
  return verify(traj, traj.max_frame, options);
}

}  // namespace ccv
}  // namespace framethinker
