#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "wpcn/network.hpp"

namespace wpcn {

/// Operating point of one block in the physical parameterisation.
///
/// Index conventions follow the network's internal order: WD 0 is the
/// cluster head. `tau2[j - 1]` is cluster member j's slot towards the CH;
/// `tau3[i]` and `p3[i]` are the CH's slot and power for WD i's message.
struct Allocation {
  double tau1 = 0.0;
  std::vector<double> tau2;  // N-1
  std::vector<double> tau3;  // N
  std::vector<double> p3;    // N, watts
  Eigen::MatrixXcd Q;        // M x M energy covariance
};

/// Operating point of the non-cooperative scheme: every WD sends its own
/// message straight to the HAP in its slot tau2[i], i = 0..N-1.
struct IndependentAllocation {
  double tau1 = 0.0;
  std::vector<double> tau2;  // N
  Eigen::MatrixXcd Q;
};

/// SNR coefficients: rho_i = eta h_i / N0, rho_bar_j = eta g_j / N0.
struct RateCoefficients {
  std::vector<double> rho;      // N
  std::vector<double> rho_bar;  // N-1, member j at [j - 1]
};

RateCoefficients rate_coefficients(const ChannelRealization& chan, const PhyParams& phy);

/// The same operating point after the change of variables W = tau1 Q,
/// z_i = tr(A_i W), theta_i = tau3_i p3_i / eta.
struct ConvexVars {
  double tau1 = 0.0;
  std::vector<double> tau2;   // N-1
  std::vector<double> tau3;   // N
  std::vector<double> z;      // N
  std::vector<double> theta;  // N
  Eigen::MatrixXcd W;
  double sbar = 0.0;
};

struct RateReport {
  std::vector<double> rates;  // R_i, i = 0..N-1
  double min_rate = 0.0;
  double sum_rate = 0.0;
  // Per-member terms, member j at [j - 1].
  std::vector<double> r2;
  std::vector<double> v2;
  std::vector<double> v3;
};

/// Slack tolerated by evaluate() before an allocation is rejected.
inline constexpr double kAllocationSlack = 1e-9;

namespace rates {

/// x log2(1 + w / x), extended by continuity to 0 at x = 0.
double perspective_rate(double x, double w);

struct PerspectiveDerivatives {
  double value = 0.0;
  double dx = 0.0;
  double dw = 0.0;
  double dxx = 0.0;
  double dxw = 0.0;
  double dww = 0.0;
};

/// ln(1 + r) - r / (1 + r), accurate for small r. This is ln 2 times the
/// time-derivative of the perspective rate at w / x = r.
double log1p_excess(double r);

/// Value, gradient and Hessian of perspective_rate for x > 0, w >= 0.
PerspectiveDerivatives perspective_derivatives(double x, double w);

/// a^H Q a (real part; Q Hermitian).
double quadratic_form(const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& a);

/// eta tau1 tr(A_i Q).
double harvested_energy(double tau1, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& a,
                        double eta);

/// CH decoding rate of a member, convex form: tau2 log2(1 + rho_bar z / tau2).
double intra_rate(double tau2, double z, double rho_bar);
/// Same rate from the physical variables: the member spends its harvested
/// energy over tau2 at power E / tau2 towards a CH with gain g.
double intra_rate(double tau2, double tau1, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& a,
                  double g, const PhyParams& phy);

/// Information the HAP extracts from a member's intra-cluster slot.
double overheard_rate(double tau2, double z, double rho);
double overheard_rate(double tau2, double tau1, const Eigen::MatrixXcd& Q,
                      const Eigen::VectorXcd& a, const PhyParams& phy);

/// CH -> HAP rates for all N messages; element 0 is R_0, element i >= 1 is
/// V_i^(3). Every message sees the CH's own channel, so one coefficient rho0.
std::vector<double> relay_rates(const std::vector<double>& tau3, const std::vector<double>& theta,
                                double rho0);
/// Physical form using the CH powers p3 and gain h0.
std::vector<double> relay_rates_from_power(const std::vector<double>& tau3,
                                           const std::vector<double>& p3, double h0,
                                           const PhyParams& phy);

/// Joint-decoding rate of a member: min(R2, V2 + V3).
double cm_rate(double r2, double v2, double v3);

/// All per-WD rates of a physical allocation. Rejects allocations violating
/// the time budget, power, PSD or energy-causality constraints by more than
/// kAllocationSlack with Error(infeasible_allocation) naming the constraint.
RateReport evaluate(const Allocation& alloc, const ChannelRealization& chan, const PhyParams& phy);

/// Same rates through the convex parameterisation (uses vars.z as given).
RateReport evaluate_convex(const ConvexVars& vars, const ChannelRealization& chan,
                           const PhyParams& phy);

/// Change of variables from a physical allocation; z is computed from W.
ConvexVars to_convex(const Allocation& alloc, const ChannelRealization& chan, const PhyParams& phy);

}  // namespace rates
}  // namespace wpcn
