#pragma once

#include "wpcn/solver.hpp"

namespace wpcn {

/// Cooperative protocol with the isotropic covariance Q = (P/M) I.
SolveReport solve_no_eb(const ChannelRealization& chan, const PhyParams& phy,
                        const SolverSettings& settings = {});

/// Every WD harvests and then transmits directly to the HAP.
SolveReport solve_independent(const ChannelRealization& chan, const PhyParams& phy,
                              const SolverSettings& settings = {});

/// Runs the named scheme.
SolveReport solve_scheme(SchemeId scheme, const ChannelRealization& chan, const PhyParams& phy,
                         const SolverSettings& settings = {});

/// Per-WD rates tau2_i log2(1 + eta tau1 h_i tr(A_i Q) / (N0 tau2_i)). Rejects
/// allocations violating time, power or PSD constraints beyond kAllocationSlack.
RateReport evaluate_independent(const IndependentAllocation& alloc, const ChannelRealization& chan,
                                const PhyParams& phy);

}  // namespace wpcn
