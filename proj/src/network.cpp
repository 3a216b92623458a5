#include "wpcn/network.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "wpcn/error.hpp"

namespace wpcn {

namespace {

constexpr double kSpeedOfLight = 3e8;

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorCode::invalid_parameter, msg);
}

bool finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace

double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

void PhyParams::validate() const {
  if (!(tx_power_watts > 0.0)) invalid("tx_power_watts must be > 0");
  if (!(harvest_efficiency > 0.0 && harvest_efficiency <= 1.0))
    invalid("harvest_efficiency must lie in (0, 1]");
  if (!(noise_watts > 0.0)) invalid("noise_watts must be > 0");
  if (antennas < 1) invalid("antennas must be >= 1");
  if (!(antenna_gain > 0.0)) invalid("antenna_gain must be > 0");
  if (!(pathloss_exponent > 0.0)) invalid("pathloss_exponent must be > 0");
  if (!(carrier_hz > 0.0)) invalid("carrier_hz must be > 0");
  if (!(ce_overhead >= 0.0 && ce_overhead < 1.0)) invalid("ce_overhead must lie in [0, 1)");
}

NetworkInstance::NetworkInstance(Point hap, std::vector<Point> wd_positions, std::size_t ch_index,
                                 PhyParams phy)
    : hap_(hap), phy_(phy) {
  phy_.validate();
  if (wd_positions.size() < 2) invalid("a network needs at least 2 WDs");
  if (ch_index >= wd_positions.size()) invalid("ch_index out of range");
  if (!finite(hap)) invalid("HAP position must be finite");
  for (const Point& p : wd_positions)
    if (!finite(p)) invalid("WD positions must be finite");

  positions_.reserve(wd_positions.size());
  original_.reserve(wd_positions.size());
  positions_.push_back(wd_positions[ch_index]);
  original_.push_back(ch_index);
  for (std::size_t k = 0; k < wd_positions.size(); ++k) {
    if (k == ch_index) continue;
    positions_.push_back(wd_positions[k]);
    original_.push_back(k);
  }
}

double NetworkInstance::hap_distance(std::size_t i) const { return distance(hap_, wd(i)); }

double NetworkInstance::intra_distance(std::size_t j) const {
  if (j == 0 || j >= size()) invalid("intra_distance: cluster member index must be in 1..N-1");
  return distance(positions_[0], positions_[j]);
}

ChannelRealization::ChannelRealization(std::vector<Eigen::VectorXcd> hap_channels,
                                       std::vector<std::complex<double>> intra_channels,
                                       std::uint64_t rng_seed)
    : hap_channels_(std::move(hap_channels)),
      intra_channels_(std::move(intra_channels)),
      rng_seed_(rng_seed) {
  if (hap_channels_.size() < 2) invalid("channel realization needs at least 2 WDs");
  if (intra_channels_.size() + 1 != hap_channels_.size())
    invalid("channel realization needs exactly N-1 intra-cluster channels");
  const auto m = hap_channels_.front().size();
  if (m < 1) invalid("HAP channel vectors must be non-empty");
  hap_gains_.reserve(hap_channels_.size());
  for (const auto& a : hap_channels_) {
    if (a.size() != m) invalid("HAP channel vectors must share one antenna count");
    hap_gains_.push_back(a.squaredNorm());
  }
  intra_gains_.reserve(intra_channels_.size());
  for (auto c : intra_channels_) intra_gains_.push_back(std::norm(c));
}

std::complex<double> ChannelRealization::intra_channel(std::size_t j) const {
  if (j == 0 || j > intra_channels_.size()) invalid("intra_channel: member index must be in 1..N-1");
  return intra_channels_[j - 1];
}

double ChannelRealization::intra_gain(std::size_t j) const {
  if (j == 0 || j > intra_gains_.size()) invalid("intra_gain: member index must be in 1..N-1");
  return intra_gains_[j - 1];
}

std::string_view to_string(ChStrategy s) noexcept {
  switch (s) {
    case ChStrategy::closest_to_center: return "closest-to-center";
    case ChStrategy::closest_to_hap: return "closest-to-hap";
    case ChStrategy::random: return "random";
  }
  return "unknown";
}

ChStrategy parse_ch_strategy(std::string_view name) {
  if (name == "closest-to-center") return ChStrategy::closest_to_center;
  if (name == "closest-to-hap") return ChStrategy::closest_to_hap;
  if (name == "random") return ChStrategy::random;
  throw Error(ErrorCode::invalid_parameter, "unknown CH strategy '" + std::string(name) + "'");
}

std::vector<Point> place_wds(std::size_t n, double d, double r, Rng& rng) {
  if (n < 2) invalid("place_wds: n must be >= 2");
  if (!(r >= 0.0)) invalid("place_wds: r must be >= 0");
  if (!(d > 0.0)) invalid("place_wds: d must be > 0");
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double radius = r * std::sqrt(rng.uniform());
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    out.push_back({d + radius * std::cos(angle), radius * std::sin(angle)});
  }
  return out;
}

double path_loss_gain(double dist, const PhyParams& phy) {
  if (!(dist > 0.0)) invalid("path_loss_gain: distance must be > 0");
  const double ratio = kSpeedOfLight / (4.0 * std::numbers::pi * dist * phy.carrier_hz);
  return phy.antenna_gain * std::pow(ratio, phy.pathloss_exponent);
}

ChannelRealization draw_channels(const NetworkInstance& net, Rng& rng) {
  const std::size_t n = net.size();
  const int m = net.phy().antennas;

  auto check = [](double dist, const char* what, std::size_t k) {
    if (dist < kMinNodeDistance) {
      std::ostringstream os;
      os << "draw_channels: " << what << " distance " << dist << " m for WD " << k
         << " is below " << kMinNodeDistance << " m";
      throw Error(ErrorCode::degenerate_geometry, os.str());
    }
  };

  // Original placement order, so that the draws do not depend on the CH.
  std::vector<std::size_t> internal_of(n);
  for (std::size_t i = 0; i < n; ++i) internal_of[net.original_index(i)] = i;

  std::vector<Eigen::VectorXcd> hap(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = internal_of[k];
    const double dist = net.hap_distance(i);
    check(dist, "HAP", k);
    const double variance = path_loss_gain(dist, net.phy());
    Eigen::VectorXcd a(m);
    for (int e = 0; e < m; ++e) a(e) = rng.complex_normal(variance);
    hap[i] = std::move(a);
  }

  std::vector<std::complex<double>> intra;
  intra.reserve(n - 1);
  for (std::size_t j = 1; j < n; ++j) {
    const double dist = net.intra_distance(j);
    check(dist, "intra-cluster", net.original_index(j));
    intra.push_back(rng.complex_normal(path_loss_gain(dist, net.phy())));
  }
  return ChannelRealization(std::move(hap), std::move(intra), rng.seed());
}

std::size_t select_ch(std::span<const Point> positions, ChStrategy strategy, Rng& rng, Point hap) {
  if (positions.size() < 2) invalid("select_ch: need at least 2 positions");
  if (strategy == ChStrategy::random) return rng.index(positions.size());

  Point target = hap;
  if (strategy == ChStrategy::closest_to_center) {
    target = {};
    for (const Point& p : positions) {
      target.x += p.x;
      target.y += p.y;
    }
    target.x /= static_cast<double>(positions.size());
    target.y /= static_cast<double>(positions.size());
  }
  std::size_t best = 0;
  double best_dist = distance(positions[0], target);
  for (std::size_t k = 1; k < positions.size(); ++k) {
    const double dist = distance(positions[k], target);
    if (dist < best_dist) {
      best = k;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace wpcn
