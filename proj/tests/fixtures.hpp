#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "wpcn/network.hpp"
#include "wpcn/rates.hpp"
#include "wpcn/rng.hpp"

namespace fixtures {

// A placed network with its channels, CH closest to the cluster center.
struct Instance {
  wpcn::PhyParams phy;
  wpcn::ChannelRealization chan;
};

inline Instance placed(std::uint64_t seed, std::size_t n, int m, double d = 6.0, double r = 3.0,
                       wpcn::PhyParams phy = {}) {
  phy.antennas = m;
  wpcn::Rng place(seed, wpcn::streams::placement);
  const auto pos = wpcn::place_wds(n, d, r, place);
  wpcn::Rng pick(seed, wpcn::streams::cluster_head);
  const auto ch = wpcn::select_ch(pos, wpcn::ChStrategy::closest_to_center, pick);
  const wpcn::NetworkInstance net({0, 0}, pos, ch, phy);
  wpcn::Rng rng(seed, wpcn::streams::channels);
  return {phy, wpcn::draw_channels(net, rng)};
}

// Channels with explicit gains: every entry of a_i has magnitude sqrt(h / M).
inline wpcn::ChannelRealization flat(const std::vector<double>& h, const std::vector<double>& g,
                                     int m) {
  std::vector<Eigen::VectorXcd> hap;
  for (double v : h) hap.push_back(Eigen::VectorXcd::Constant(m, std::sqrt(v / m)));
  std::vector<std::complex<double>> intra;
  for (double v : g) intra.emplace_back(std::sqrt(v), 0.0);
  return wpcn::ChannelRealization(hap, intra);
}

inline Eigen::MatrixXcd random_psd(wpcn::Rng& rng, int m, double trace) {
  Eigen::MatrixXcd b(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) b(r, c) = rng.complex_normal(1.0);
  const Eigen::MatrixXcd q = b * b.adjoint();
  return q * (trace / q.trace().real());
}

// Random allocation satisfying every constraint of the cooperative protocol.
inline wpcn::Allocation random_allocation(wpcn::Rng& rng, const wpcn::ChannelRealization& chan,
                                          const wpcn::PhyParams& phy) {
  const std::size_t n = chan.size();
  std::vector<double> w(2 * n);
  double total = 0.0;
  for (double& v : w) total += (v = 0.05 + rng.uniform());
  const double scale = (1.0 - phy.ce_overhead) * (0.8 + 0.2 * rng.uniform()) / total;
  wpcn::Allocation a;
  a.tau1 = w[0] * scale;
  for (std::size_t j = 1; j < n; ++j) a.tau2.push_back(w[j] * scale);
  for (std::size_t i = 0; i < n; ++i) a.tau3.push_back(w[n + i] * scale);
  a.Q = random_psd(rng, chan.antennas(), phy.tx_power_watts * (0.5 + 0.5 * rng.uniform()));
  const double energy =
      wpcn::rates::harvested_energy(a.tau1, a.Q, chan.hap_channel(0), phy.harvest_efficiency);
  const double budget = energy * rng.uniform();
  std::vector<double> share(n);
  double s = 0.0;
  for (double& v : share) s += (v = rng.uniform());
  for (std::size_t i = 0; i < n; ++i) a.p3.push_back(budget * share[i] / s / a.tau3[i]);
  return a;
}

}  // namespace fixtures
