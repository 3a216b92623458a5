#pragma once

#include "wpcn/solver.hpp"

namespace wpcn::detail {

/// Cooperative max-min program. With beamforming the covariance is a free
/// PSD variable; without it Q is fixed to (P/M) I.
SolveReport solve_cooperative(const ChannelRealization& chan, const PhyParams& phy,
                              const SolverSettings& settings, bool beamforming);

/// Common entry checks: tau0 >= 1 or all-zero HAP gains give infeasible_input.
/// Returns true and fills `report` when the instance is not solvable.
bool reject_input(const ChannelRealization& chan, const PhyParams& phy, SchemeId scheme,
                  SolveReport& report);

SolveStatus to_status(barrier::Status s) noexcept;

}  // namespace wpcn::detail
