#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wpcn/error.hpp"
#include "wpcn/network.hpp"
#include "wpcn/rng.hpp"

using namespace wpcn;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected wpcn::Error";
  return ErrorCode::io_error;
}

}  // namespace

TEST(Rng, SameSeedAndStreamRepeat) {
  Rng a(42, 7), b(42, 7);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(Rng, StreamsDiffer) {
  Rng a(42, 1), b(42, 2);
  int same = 0;
  for (int k = 0; k < 100; ++k) same += a.uniform() == b.uniform();
  EXPECT_EQ(same, 0);
}

TEST(Rng, UniformInUnitInterval) {
  Rng r(3);
  for (int k = 0; k < 10000; ++k) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, ComplexNormalVariance) {
  Rng r(5);
  const int n = 200000;
  double re2 = 0.0, im2 = 0.0, mean = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto z = r.complex_normal(2.0);
    re2 += z.real() * z.real();
    im2 += z.imag() * z.imag();
    mean += z.real();
  }
  EXPECT_NEAR(re2 / n, 1.0, 0.02);
  EXPECT_NEAR(im2 / n, 1.0, 0.02);
  EXPECT_NEAR(mean / n, 0.0, 0.01);
}

TEST(Rng, TrialSeedIsXor) { EXPECT_EQ(trial_seed(0b1100, 0b1010), 0b0110u); }

TEST(PlaceWds, ZeroRadiusCollapsesToCenter) {
  Rng r(1);
  for (const Point& p : place_wds(3, 6.0, 0.0, r)) {
    EXPECT_EQ(p.x, 6.0);
    EXPECT_EQ(p.y, 0.0);
  }
}

TEST(PlaceWds, MeanRadiusIsTwoThirdsR) {
  Rng r(2024);
  const auto pts = place_wds(10000, 6.0, 3.0, r);
  double mean = 0.0;
  for (const Point& p : pts) {
    const double rad = distance(p, {6.0, 0.0});
    ASSERT_LE(rad, 3.0);
    mean += rad;
  }
  EXPECT_NEAR(mean / pts.size(), 2.0, 0.05);
}

TEST(PlaceWds, QuadrantsBalanced) {
  Rng r(9);
  const auto pts = place_wds(20000, 6.0, 3.0, r);
  int upper = 0, right = 0;
  for (const Point& p : pts) {
    upper += p.y > 0.0;
    right += p.x > 6.0;
  }
  // 3 sigma of a fair binomial is about 212.
  EXPECT_NEAR(upper, 10000, 212);
  EXPECT_NEAR(right, 10000, 212);
}

TEST(PlaceWds, Deterministic) {
  Rng a(77), b(77);
  const auto p = place_wds(15, 6.0, 3.0, a);
  const auto q = place_wds(15, 6.0, 3.0, b);
  for (std::size_t k = 0; k < p.size(); ++k) {
    EXPECT_EQ(p[k].x, q[k].x);
    EXPECT_EQ(p[k].y, q[k].y);
  }
}

TEST(PlaceWds, RejectsBadArguments) {
  Rng r(1);
  EXPECT_EQ(code_of([&] { place_wds(1, 6.0, 1.0, r); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(code_of([&] { place_wds(3, 6.0, -1.0, r); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(code_of([&] { place_wds(3, 0.0, 1.0, r); }), ErrorCode::invalid_parameter);
}

TEST(PathLoss, SpecValues) {
  PhyParams phy;
  EXPECT_NEAR(path_loss_gain(6.0, phy) / 1.644e-7, 1.0, 1e-3);
  phy.pathloss_exponent = 2.0;
  EXPECT_NEAR(path_loss_gain(6.0, phy) / 3.782e-5, 1.0, 1e-3);
}

TEST(PathLoss, DoublingDistanceDividesByEight) {
  PhyParams phy;
  EXPECT_NEAR(path_loss_gain(3.0, phy) / path_loss_gain(6.0, phy), 8.0, 1e-12);
}

TEST(PathLoss, MonotoneInDistanceAndGain) {
  PhyParams phy;
  double prev = path_loss_gain(0.5, phy);
  for (double d = 0.6; d < 20.0; d += 0.1) {
    const double g = path_loss_gain(d, phy);
    EXPECT_LT(g, prev);
    prev = g;
  }
  PhyParams hi = phy;
  hi.antenna_gain = 2.5;
  EXPECT_GT(path_loss_gain(6.0, hi), path_loss_gain(6.0, phy));
}

TEST(PathLoss, RejectsNonpositiveDistance) {
  EXPECT_EQ(code_of([] { path_loss_gain(0.0, PhyParams{}); }), ErrorCode::invalid_parameter);
}

TEST(PhyParams, ValidateNamesField) {
  PhyParams phy;
  phy.harvest_efficiency = 1.5;
  try {
    phy.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("harvest_efficiency"), std::string::npos);
  }
}

TEST(NetworkInstance, ChIsInternalZero) {
  const std::vector<Point> pos{{5, 0}, {6, 0}, {7, 0}};
  const NetworkInstance net({0, 0}, pos, 1, PhyParams{});
  EXPECT_EQ(net.wd(0).x, 6.0);
  EXPECT_EQ(net.ch_index(), 1u);
  EXPECT_EQ(net.original_index(1), 0u);
  EXPECT_EQ(net.original_index(2), 2u);
  EXPECT_DOUBLE_EQ(net.intra_distance(2), 1.0);
}

TEST(NetworkInstance, RejectsInvalid) {
  const std::vector<Point> one{{5, 0}};
  EXPECT_EQ(code_of([&] { NetworkInstance({0, 0}, one, 0, PhyParams{}); }),
            ErrorCode::invalid_parameter);
  const std::vector<Point> two{{5, 0}, {6, 0}};
  EXPECT_EQ(code_of([&] { NetworkInstance({0, 0}, two, 2, PhyParams{}); }),
            ErrorCode::invalid_parameter);
  const std::vector<Point> nan{{5, 0}, {std::nan(""), 0}};
  EXPECT_EQ(code_of([&] { NetworkInstance({0, 0}, nan, 0, PhyParams{}); }),
            ErrorCode::invalid_parameter);
}

TEST(DrawChannels, Dimensions) {
  PhyParams phy;
  Rng rp(1, streams::placement);
  const NetworkInstance net({0, 0}, place_wds(6, 6.0, 3.0, rp), 2, phy);
  Rng rc(1, streams::channels);
  const auto chan = draw_channels(net, rc);
  EXPECT_EQ(chan.size(), 6u);
  EXPECT_EQ(chan.antennas(), 5);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_DOUBLE_EQ(chan.hap_gain(i), chan.hap_channel(i).squaredNorm());
    EXPECT_GE(chan.hap_gain(i), 0.0);
  }
  for (std::size_t j = 1; j < 6; ++j) EXPECT_DOUBLE_EQ(chan.intra_gain(j), std::norm(chan.intra_channel(j)));
}

TEST(DrawChannels, Deterministic) {
  PhyParams phy;
  const std::vector<Point> pos{{5, 1}, {6, -1}, {7, 0.5}};
  const NetworkInstance net({0, 0}, pos, 0, phy);
  Rng a(99, streams::channels), b(99, streams::channels);
  const auto x = draw_channels(net, a);
  const auto y = draw_channels(net, b);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(x.hap_channel(i), y.hap_channel(i));
  for (std::size_t j = 1; j < 3; ++j) EXPECT_EQ(x.intra_channel(j), y.intra_channel(j));
}

TEST(DrawChannels, HapChannelsIndependentOfChChoice) {
  PhyParams phy;
  const std::vector<Point> pos{{5, 1}, {6, -1}, {7, 0.5}, {6.5, 2}};
  const NetworkInstance n0({0, 0}, pos, 0, phy);
  const NetworkInstance n2({0, 0}, pos, 2, phy);
  Rng a(5, streams::channels), b(5, streams::channels);
  const auto c0 = draw_channels(n0, a);
  const auto c2 = draw_channels(n2, b);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& v0 = c0.hap_channel(i);
    // Internal slot of the same original WD under CH = 2.
    std::size_t k = 0;
    while (n2.original_index(k) != n0.original_index(i)) ++k;
    EXPECT_EQ(v0, c2.hap_channel(k));
  }
}

TEST(DrawChannels, GainsMatchPathLoss) {
  PhyParams phy;
  const std::vector<Point> pos{{5, 1}, {6, -1}, {7, 0.5}};
  const NetworkInstance net({0, 0}, pos, 1, phy);
  const int draws = 10000;
  std::vector<double> h(3, 0.0), g(3, 0.0);
  Rng r(31, streams::channels);
  for (int k = 0; k < draws; ++k) {
    const auto c = draw_channels(net, r);
    for (std::size_t i = 0; i < 3; ++i) h[i] += c.hap_gain(i) / phy.antennas;
    for (std::size_t j = 1; j < 3; ++j) g[j] += c.intra_gain(j);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const double sigma2 = path_loss_gain(net.hap_distance(i), phy);
    // h/M averages M exponentials, so the sample mean has relative sd
    // 1 / sqrt(M draws), about 0.45%.
    EXPECT_NEAR(h[i] / draws / sigma2, 1.0, 0.03);
  }
  for (std::size_t j = 1; j < 3; ++j) {
    const double delta2 = path_loss_gain(net.intra_distance(j), phy);
    // Relative sd 1 / sqrt(draws) = 1%, so 3% is the 3 sigma band.
    EXPECT_NEAR(g[j] / draws / delta2, 1.0, 0.03);
  }
}

TEST(DrawChannels, ColocatedNodesAreDegenerate) {
  PhyParams phy;
  const std::vector<Point> pos{{5, 0}, {5, 0}, {7, 0}};
  const NetworkInstance net({0, 0}, pos, 0, phy);
  Rng r(1);
  EXPECT_EQ(code_of([&] { draw_channels(net, r); }), ErrorCode::degenerate_geometry);
  const std::vector<Point> at_hap{{0, 0}, {5, 0}};
  const NetworkInstance net2({0, 0}, at_hap, 1, phy);
  EXPECT_EQ(code_of([&] { draw_channels(net2, r); }), ErrorCode::degenerate_geometry);
}

TEST(SelectCh, SpecLayout) {
  const std::vector<Point> pos{{5, 0}, {6, 0}, {7, 0}};
  Rng r(1);
  EXPECT_EQ(select_ch(pos, ChStrategy::closest_to_center, r), 1u);
  EXPECT_EQ(select_ch(pos, ChStrategy::closest_to_hap, r), 0u);
}

TEST(SelectCh, TieGoesToLowerIndex) {
  const std::vector<Point> pos{{5, 0}, {7, 0}};
  Rng r(1);
  EXPECT_EQ(select_ch(pos, ChStrategy::closest_to_center, r), 0u);
}

TEST(SelectCh, RandomIsUniform) {
  const std::vector<Point> pos{{5, 0}, {6, 0}, {7, 0}, {8, 0}};
  std::vector<int> hits(4, 0);
  for (std::uint64_t s = 0; s < 4000; ++s) {
    Rng r(s, streams::cluster_head);
    ++hits[select_ch(pos, ChStrategy::random, r)];
  }
  // 3 sigma of Binomial(4000, 1/4) is about 82.
  for (int h : hits) EXPECT_NEAR(h, 1000, 82);
}

TEST(SelectCh, CenterInvariantUnderRigidMotion) {
  Rng gen(12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pos = place_wds(15, 6.0, 3.0, gen);
    const double angle = 2.0 * std::numbers::pi * gen.uniform();
    const double dx = 10.0 * gen.uniform() - 5.0, dy = 10.0 * gen.uniform() - 5.0;
    std::vector<Point> moved;
    for (const Point& p : pos)
      moved.push_back({std::cos(angle) * p.x - std::sin(angle) * p.y + dx,
                       std::sin(angle) * p.x + std::cos(angle) * p.y + dy});
    Rng r(1);
    EXPECT_EQ(select_ch(pos, ChStrategy::closest_to_center, r),
              select_ch(moved, ChStrategy::closest_to_center, r));
  }
}

TEST(ChStrategy, NamesRoundTrip) {
  for (ChStrategy s : {ChStrategy::closest_to_center, ChStrategy::closest_to_hap, ChStrategy::random})
    EXPECT_EQ(parse_ch_strategy(to_string(s)), s);
  EXPECT_EQ(code_of([] { parse_ch_strategy("nearest"); }), ErrorCode::invalid_parameter);
}
