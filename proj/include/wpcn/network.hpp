#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "wpcn/rng.hpp"

namespace wpcn {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b) noexcept;

/// Physical constants of one network. Defaults are the simulation setup the
/// model was calibrated against (3 W Powercast transmitter, 51% harvester,
/// 1e-10 W noise, 5 antennas, 915 MHz, path-loss exponent 3).
struct PhyParams {
  double tx_power_watts = 3.0;
  double harvest_efficiency = 0.51;
  double noise_watts = 1e-10;
  int antennas = 5;
  double antenna_gain = 2.0;
  double pathloss_exponent = 3.0;
  double carrier_hz = 915e6;
  /// Channel-estimation overhead as a fraction of the unit block.
  double ce_overhead = 0.0;

  /// Throws Error(invalid_parameter) naming the offending field.
  void validate() const;
};

/// Pairwise distances below this are treated as colocated nodes.
inline constexpr double kMinNodeDistance = 0.01;

/// A placed network with its cluster head chosen.
///
/// Internally the WDs are reordered so the cluster head is index 0 and the
/// cluster members follow in their original placement order; the original
/// placement index of every internal slot is retained for reporting.
class NetworkInstance {
 public:
  NetworkInstance(Point hap, std::vector<Point> wd_positions, std::size_t ch_index, PhyParams phy);

  std::size_t size() const noexcept { return positions_.size(); }
  Point hap() const noexcept { return hap_; }
  const PhyParams& phy() const noexcept { return phy_; }

  /// Position of internal WD i (i = 0 is the cluster head).
  Point wd(std::size_t i) const { return positions_.at(i); }
  std::size_t original_index(std::size_t i) const { return original_.at(i); }
  /// Cluster head's index in the original placement list.
  std::size_t ch_index() const noexcept { return original_.front(); }

  double hap_distance(std::size_t i) const;
  /// Distance between cluster member j (1..N-1) and the cluster head.
  double intra_distance(std::size_t j) const;

 private:
  Point hap_;
  std::vector<Point> positions_;
  std::vector<std::size_t> original_;
  PhyParams phy_;
};

/// One block's fading state, in the owning NetworkInstance's internal order.
class ChannelRealization {
 public:
  /// hap_channels: N vectors a_i of equal length M; intra_channels: c_j for
  /// the N-1 cluster members j = 1..N-1, stored in that order.
  ChannelRealization(std::vector<Eigen::VectorXcd> hap_channels,
                     std::vector<std::complex<double>> intra_channels, std::uint64_t rng_seed = 0);

  std::size_t size() const noexcept { return hap_channels_.size(); }
  int antennas() const noexcept { return static_cast<int>(hap_channels_.front().size()); }
  std::uint64_t rng_seed() const noexcept { return rng_seed_; }

  const Eigen::VectorXcd& hap_channel(std::size_t i) const { return hap_channels_.at(i); }
  /// h_i = |a_i|^2.
  double hap_gain(std::size_t i) const { return hap_gains_.at(i); }
  std::complex<double> intra_channel(std::size_t j) const;
  /// g_j = |c_j|^2 for cluster member j = 1..N-1.
  double intra_gain(std::size_t j) const;

  std::span<const double> hap_gains() const noexcept { return hap_gains_; }

 private:
  std::vector<Eigen::VectorXcd> hap_channels_;
  std::vector<std::complex<double>> intra_channels_;
  std::vector<double> hap_gains_;
  std::vector<double> intra_gains_;
  std::uint64_t rng_seed_;
};

enum class ChStrategy { closest_to_center, closest_to_hap, random };

std::string_view to_string(ChStrategy s) noexcept;
ChStrategy parse_ch_strategy(std::string_view name);

/// n points uniform over the disc of radius r centred at (d, 0).
std::vector<Point> place_wds(std::size_t n, double d, double r, Rng& rng);

/// Mean channel gain G_A (c / (4 pi dist f_c))^alpha.
double path_loss_gain(double distance, const PhyParams& phy);

/// Rayleigh draw of every HAP<->WD vector and CM<->CH scalar.
///
/// HAP vectors are drawn first in original placement order, then the
/// intra-cluster scalars in original order of the members. Both choices keep
/// the HAP channels identical for every cluster-head choice under one seed.
ChannelRealization draw_channels(const NetworkInstance& net, Rng& rng);

/// Index into `positions` of the cluster head. Ties go to the lowest index.
std::size_t select_ch(std::span<const Point> positions, ChStrategy strategy, Rng& rng,
                      Point hap = {});

}  // namespace wpcn
