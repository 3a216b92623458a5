#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wpcn/barrier.hpp"
#include "wpcn/network.hpp"
#include "wpcn/rates.hpp"

namespace wpcn {

enum class SolveStatus { optimal, max_iterations, infeasible_input };

enum class SchemeId { proposed_eb_cooperation, cooperation_no_eb, independent_eb };

std::string_view to_string(SolveStatus s) noexcept;
std::string_view to_string(SchemeId s) noexcept;
/// Accepts "proposed-eb-cooperation", "cooperation-no-eb", "independent-eb".
SchemeId parse_scheme(std::string_view name);

struct SolveReport {
  SchemeId scheme = SchemeId::proposed_eb_cooperation;
  SolveStatus status = SolveStatus::optimal;
  double sbar_star = 0.0;
  PhyParams phy;
  /// Cooperative schemes: recovered operating point and its convex image.
  Allocation allocation;
  ConvexVars convex;
  /// Independent scheme only.
  IndependentAllocation independent;
  RateReport rates;
  int newton_iterations = 0;
  int outer_iterations = 0;
  /// Duality-gap bound on sbar_star, in rate units.
  double gap_bound = 0.0;
  /// Squared Newton decrement / 2 at the last centering step.
  double stationarity = 0.0;
  std::string message;
};

struct KktResiduals {
  /// Signed residual lhs - rhs of every constraint written as lhs <= rhs
  /// (equalities as absolute differences). Positive means violated.
  std::vector<std::pair<std::string, double>> primal;
  double max_primal = 0.0;
  double stationarity = 0.0;

  double residual(std::string_view name) const;
};

/// Max-min throughput of the cooperative protocol with energy beamforming.
SolveReport solve_p3(const ChannelRealization& chan, const PhyParams& phy,
                     const SolverSettings& settings = {});

/// Physical allocation from the report's convex variables. Slots below 1e-12
/// are snapped to zero together with their powers.
Allocation recover_primal(const SolveReport& report);

KktResiduals kkt_residuals(const SolveReport& report, const ChannelRealization& chan,
                           const PhyParams& phy);

}  // namespace wpcn
