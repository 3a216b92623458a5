#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wpcn/network.hpp"
#include "wpcn/rates.hpp"

namespace wpcn {

/// Brute-force search for desk-scale instances (N <= 3, M <= 2).
struct OracleSettings {
  /// Coarse grid step on every search coordinate (rounded to 1/K).
  double resolution = 0.05;
  /// Each round shrinks the step by 10 around the incumbent.
  int refine_rounds = 3;
  /// Half-width of a refinement window, in steps of that round.
  int refine_window = 5;
  bool parallel = true;
};

struct OracleResult {
  /// Max-min rate of `allocation` (or `independent`) as certified by the
  /// rates module.
  double s = 0.0;
  /// Grid step of the last refinement round.
  double final_resolution = 0.0;
  Allocation allocation;
  IndependentAllocation independent;
  std::size_t evaluations = 0;
};

OracleResult grid_maxmin_coop(const ChannelRealization& chan, const PhyParams& phy,
                              const OracleSettings& settings = {});
OracleResult grid_maxmin_independent(const ChannelRealization& chan, const PhyParams& phy,
                                     const OracleSettings& settings = {});

/// Closed-form Hessian of x log2(1 + y / x).
Eigen::Matrix2d perspective_hessian(double x, double y);

struct HessianCheck {
  Eigen::Matrix2d hessian;
  double max_eigenvalue = 0.0;
  /// Largest deviation from central differences of the gradient, relative
  /// to the largest Hessian entry.
  double fd_error = 0.0;
  bool concave = false;
  bool matches_fd = false;

  bool passed() const noexcept { return concave && matches_fd; }
};

HessianCheck check_perspective_hessian(double x, double y);

/// True when the closed-form Hessian at (x, y) is negative semidefinite
/// (eigenvalues <= 1e-9) and agrees with finite differences within 1e-4.
bool hessian_psd_check(double x, double y);

namespace oracle {

/// One search coordinate: tau1 as a fraction of the usable block, and the
/// rank-one beam v = (cos(pi polar / 2), exp(2 pi i azimuth) sin(pi polar / 2))
/// or the isotropic covariance.
struct GridPoint {
  double tau1_fraction = 0.5;
  double polar = 0.0;
  double azimuth = 0.0;
  bool isotropic = false;
};

enum class Problem { cooperative, independent };

/// Best max-min rate at each point, or a negative value for points that
/// cannot reach `threshold`. Serial reference and OpenMP versions return
/// identical vectors.
std::vector<double> evaluate_serial(Problem problem, const ChannelRealization& chan,
                                    const PhyParams& phy, std::span<const GridPoint> points,
                                    double threshold);
std::vector<double> evaluate_parallel(Problem problem, const ChannelRealization& chan,
                                      const PhyParams& phy, std::span<const GridPoint> points,
                                      double threshold);

/// The coarse grid the search starts from.
std::vector<GridPoint> coarse_grid(int antennas, double resolution);

}  // namespace oracle
}  // namespace wpcn
