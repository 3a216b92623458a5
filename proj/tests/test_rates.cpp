#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "wpcn/error.hpp"
#include "wpcn/rates.hpp"
#include "fixtures.hpp"
#include "wpcn/rng.hpp"

using namespace wpcn;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

ChannelRealization make_channels(Rng& rng, std::size_t n, int m, double var) {
  std::vector<VectorXcd> hap;
  for (std::size_t i = 0; i < n; ++i) {
    VectorXcd a(m);
    for (int e = 0; e < m; ++e) a(e) = rng.complex_normal(var);
    hap.push_back(a);
  }
  std::vector<std::complex<double>> intra;
  for (std::size_t j = 1; j < n; ++j) intra.push_back(rng.complex_normal(var));
  return ChannelRealization(hap, intra);
}

}  // namespace

TEST(PerspectiveRate, SpecExamples) {
  EXPECT_DOUBLE_EQ(rates::perspective_rate(1.0, 3.0), 2.0);
  EXPECT_EQ(rates::perspective_rate(0.0, 5.0), 0.0);
  EXPECT_EQ(rates::perspective_rate(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(rates::perspective_rate(2.0, 6.0), 4.0);
}

TEST(PerspectiveRate, NegativeInputsAreDomainErrors) {
  EXPECT_THROW(rates::perspective_rate(-1.0, 1.0), Error);
  EXPECT_THROW(rates::perspective_rate(1.0, -1e-300), Error);
  try {
    rates::perspective_rate(-1.0, 1.0);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::domain_error);
  }
}

TEST(PerspectiveRate, PositiveHomogeneity) {
  Rng rng(4);
  for (int k = 0; k < 1000; ++k) {
    const double x = 10.0 * rng.uniform() + 1e-6, w = 10.0 * rng.uniform();
    const double t = 0.01 + 100.0 * rng.uniform();
    const double base = rates::perspective_rate(x, w);
    EXPECT_NEAR(rates::perspective_rate(t * x, t * w), t * base, 1e-12 * t * base + 1e-300);
  }
}

TEST(PerspectiveRate, MonotoneInBothArguments) {
  Rng rng(5);
  for (int k = 0; k < 1000; ++k) {
    const double x = 10.0 * rng.uniform() + 1e-6, w = 10.0 * rng.uniform();
    const double dx = rng.uniform(), dw = rng.uniform();
    EXPECT_GE(rates::perspective_rate(x + dx, w), rates::perspective_rate(x, w));
    EXPECT_GE(rates::perspective_rate(x, w + dw), rates::perspective_rate(x, w));
  }
}

TEST(PerspectiveRate, MidpointConcavity) {
  Rng rng(6);
  for (int k = 0; k < 1000; ++k) {
    const double x1 = 10.0 * (1.0 - rng.uniform()), w1 = 10.0 * (1.0 - rng.uniform());
    const double x2 = 10.0 * (1.0 - rng.uniform()), w2 = 10.0 * (1.0 - rng.uniform());
    const double mid = rates::perspective_rate(0.5 * (x1 + x2), 0.5 * (w1 + w2));
    const double avg = 0.5 * (rates::perspective_rate(x1, w1) + rates::perspective_rate(x2, w2));
    EXPECT_GE(mid, avg - 1e-12);
  }
}

TEST(PerspectiveRate, GradientMatchesFiniteDifferences) {
  Rng rng(7);
  const double h = 1e-6;
  for (int k = 0; k < 500; ++k) {
    const double x = 0.01 + 10.0 * rng.uniform(), w = 0.01 + 10.0 * rng.uniform();
    const auto d = rates::perspective_derivatives(x, w);
    const double fx = (rates::perspective_rate(x + h, w) - rates::perspective_rate(x - h, w)) / (2 * h);
    const double fw = (rates::perspective_rate(x, w + h) - rates::perspective_rate(x, w - h)) / (2 * h);
    EXPECT_NEAR(d.dx, fx, 1e-5 * std::max(std::abs(fx), 1e-3));
    EXPECT_NEAR(d.dw, fw, 1e-5 * std::max(std::abs(fw), 1e-3));
    EXPECT_NEAR(d.value, rates::perspective_rate(x, w), 1e-14 * d.value);
  }
}

TEST(PerspectiveRate, SecondDerivativesMatchFiniteDifferences) {
  Rng rng(8);
  const double h = 1e-5;
  for (int k = 0; k < 200; ++k) {
    const double x = 0.1 + 5.0 * rng.uniform(), w = 0.1 + 5.0 * rng.uniform();
    const auto d = rates::perspective_derivatives(x, w);
    const auto px = rates::perspective_derivatives(x + h, w);
    const auto mx = rates::perspective_derivatives(x - h, w);
    const auto pw = rates::perspective_derivatives(x, w + h);
    const auto mw = rates::perspective_derivatives(x, w - h);
    const double scale = std::max({std::abs(d.dxx), std::abs(d.dxw), std::abs(d.dww)});
    EXPECT_NEAR(d.dxx, (px.dx - mx.dx) / (2 * h), 1e-5 * scale);
    EXPECT_NEAR(d.dxw, (pw.dx - mw.dx) / (2 * h), 1e-5 * scale);
    EXPECT_NEAR(d.dww, (pw.dw - mw.dw) / (2 * h), 1e-5 * scale);
  }
}

TEST(Log1pExcess, SeriesMatchesDirectFormula) {
  for (double r : {1e-9, 1e-6, 1e-4, 5e-3, 9.9e-3, 1e-2, 0.5, 10.0}) {
    // Direct evaluation in long double is accurate to about 1e-19 absolute.
    const long double lr = r;
    const long double ref = std::log1p(lr) - lr / (1.0L + lr);
    EXPECT_NEAR(rates::log1p_excess(r), static_cast<double>(ref),
                1e-12 * static_cast<double>(ref) + 1e-18);
  }
}

TEST(HarvestedEnergy, IsotropicClosedForm) {
  // eta tau1 P h / M with eta 0.51, tau1 0.5, P 3, M 5, h 1e-6.
  VectorXcd a = VectorXcd::Zero(5);
  a(0) = std::sqrt(1e-6);
  const MatrixXcd q = MatrixXcd::Identity(5, 5) * (3.0 / 5.0);
  EXPECT_NEAR(rates::harvested_energy(0.5, q, a, 0.51), 1.53e-7, 1e-19);
  Rng rng(3);
  VectorXcd b(5);
  for (int e = 0; e < 5; ++e) b(e) = rng.complex_normal(1e-6);
  EXPECT_NEAR(rates::harvested_energy(0.5, q, b, 0.51), 0.51 * 0.5 * 3.0 * b.squaredNorm() / 5.0,
              1e-12 * b.squaredNorm());
}

TEST(HarvestedEnergy, FullBeamTowardsDevice) {
  Rng rng(11);
  VectorXcd a(4);
  for (int e = 0; e < 4; ++e) a(e) = rng.complex_normal(2e-6);
  const double h = a.squaredNorm();
  const MatrixXcd q = 3.0 * a * a.adjoint() / h;
  EXPECT_NEAR(rates::harvested_energy(0.4, q, a, 0.51), 0.51 * 0.4 * 3.0 * h, 1e-12 * h);
  EXPECT_EQ(rates::harvested_energy(0.0, q, a, 0.51), 0.0);
}

TEST(IntraRate, SpecExamples) {
  EXPECT_DOUBLE_EQ(rates::intra_rate(0.3, 0.9, 1.0), 0.6);
  EXPECT_EQ(rates::intra_rate(0.0, 0.9, 1.0), 0.0);
}

TEST(IntraRate, PhysicalAndConvexFormsAgree) {
  Rng rng(12);
  PhyParams phy;
  phy.antennas = 3;
  for (int k = 0; k < 200; ++k) {
    VectorXcd a(3);
    for (int e = 0; e < 3; ++e) a(e) = rng.complex_normal(1e-6);
    const double g = 1e-6 * rng.uniform();
    const MatrixXcd q = fixtures::random_psd(rng, 3, 3.0);
    const double tau1 = rng.uniform(), tau2 = 0.01 + 0.2 * rng.uniform();
    const double z = tau1 * rates::quadratic_form(q, a);
    const double rho_bar = phy.harvest_efficiency * g / phy.noise_watts;
    const double physical = rates::intra_rate(tau2, tau1, q, a, g, phy);
    EXPECT_NEAR(rates::intra_rate(tau2, z, rho_bar), physical, 1e-12 * physical);
    const double rho = phy.harvest_efficiency * a.squaredNorm() / phy.noise_watts;
    const double overheard = rates::overheard_rate(tau2, tau1, q, a, phy);
    EXPECT_NEAR(rates::overheard_rate(tau2, z, rho), overheard, 1e-12 * overheard);
  }
}

TEST(OverheardRate, SpecExamples) {
  EXPECT_DOUBLE_EQ(rates::overheard_rate(0.25, 0.5, 0.5), 0.25);
  EXPECT_EQ(rates::overheard_rate(0.25, 0.5, 0.0), 0.0);
  // Equal coefficients give equal rates.
  EXPECT_EQ(rates::overheard_rate(0.25, 0.7, 3.0), rates::intra_rate(0.25, 0.7, 3.0));
}

TEST(RelayRates, SpecExamples) {
  const auto r = rates::relay_rates({0.2, 0.0, 0.1}, {0.6, 0.4, 0.0}, 1.0);
  EXPECT_DOUBLE_EQ(r[0], 0.4);
  EXPECT_EQ(r[1], 0.0);
  EXPECT_EQ(r[2], 0.0);
}

TEST(RelayRates, PowerAndEnergyFormsAgree) {
  Rng rng(13);
  PhyParams phy;
  for (int k = 0; k < 200; ++k) {
    const double h0 = 1e-6 * rng.uniform();
    std::vector<double> tau3, p3, theta;
    for (int i = 0; i < 4; ++i) {
      tau3.push_back(rng.uniform());
      p3.push_back(1e-3 * rng.uniform());
      theta.push_back(tau3.back() * p3.back() / phy.harvest_efficiency);
    }
    const auto a = rates::relay_rates_from_power(tau3, p3, h0, phy);
    const auto b = rates::relay_rates(tau3, theta, phy.harvest_efficiency * h0 / phy.noise_watts);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(a[i], b[i], 1e-12 * a[i]);
  }
}

TEST(CmRate, SpecExamples) {
  EXPECT_EQ(rates::cm_rate(2, 1, 2), 2);
  EXPECT_EQ(rates::cm_rate(2, 1, 0.5), 1.5);
  EXPECT_EQ(rates::cm_rate(0, 4, 5), 0);
}

TEST(Evaluate, AllTimeHarvestingGivesZeroRates) {
  Rng rng(1);
  const auto chan = make_channels(rng, 4, 2, 1e-6);
  PhyParams phy;
  phy.antennas = 2;
  Allocation a;
  a.tau1 = 1.0;
  a.tau2.assign(3, 0.0);
  a.tau3.assign(4, 0.0);
  a.p3.assign(4, 0.0);
  a.Q = MatrixXcd::Identity(2, 2) * 1.5;
  const auto rep = rates::evaluate(a, chan, phy);
  EXPECT_EQ(rep.min_rate, 0.0);
  EXPECT_EQ(rep.sum_rate, 0.0);
}

TEST(Evaluate, HandComputedTwoDevices) {
  // N = 2, M = 1, h0 = h1 = g1 = 1e-6, Q = P = 3.
  const double amp = 1e-3;
  const ChannelRealization chan({VectorXcd::Constant(1, amp), VectorXcd::Constant(1, amp)},
                                {std::complex<double>(amp, 0.0)});
  PhyParams phy;
  phy.antennas = 1;
  Allocation a;
  a.tau1 = 0.5;
  a.tau2 = {0.2};
  a.tau3 = {0.15, 0.15};
  a.Q = MatrixXcd::Constant(1, 1, 3.0);
  // Harvested energy eta tau1 P h = 0.51 * 0.5 * 3 * 1e-6 = 7.65e-7 J per device.
  const double e = 7.65e-7;
  const double p3 = 0.9 * e / 0.3;
  a.p3 = {p3, p3};
  const auto rep = rates::evaluate(a, chan, phy);

  const double p2 = e / 0.2;                       // member transmit power
  const double snr2 = 1e-6 * p2 / 1e-10;           // same gain to CH and HAP
  const double r2 = 0.2 * std::log2(1.0 + snr2);
  const double relay = 0.15 * std::log2(1.0 + 1e-6 * p3 / 1e-10);
  EXPECT_NEAR(rep.rates[0], relay, 1e-15);
  EXPECT_NEAR(rep.r2[0], r2, 1e-15);
  EXPECT_NEAR(rep.v2[0], r2, 1e-15);
  EXPECT_NEAR(rep.v3[0], relay, 1e-15);
  EXPECT_NEAR(rep.rates[1], std::min(r2, r2 + relay), 1e-15);
  EXPECT_EQ(rep.min_rate, std::min(rep.rates[0], rep.rates[1]));
}

TEST(Evaluate, MinRateIsMinimumOfRates) {
  Rng rng(21);
  PhyParams phy;
  phy.antennas = 3;
  for (int k = 0; k < 100; ++k) {
    const auto chan = make_channels(rng, 5, 3, 1e-6);
    const auto a = fixtures::random_allocation(rng, chan, phy);
    const auto rep = rates::evaluate(a, chan, phy);
    EXPECT_EQ(rep.min_rate, *std::min_element(rep.rates.begin(), rep.rates.end()));
    double sum = 0.0;
    for (double r : rep.rates) {
      EXPECT_GE(r, 0.0);
      sum += r;
    }
    EXPECT_DOUBLE_EQ(rep.sum_rate, sum);
  }
}

TEST(Evaluate, ParameterizationEquivalence) {
  Rng rng(22);
  PhyParams phy;
  phy.antennas = 2;
  for (int k = 0; k < 200; ++k) {
    const auto chan = make_channels(rng, 4, 2, 1e-6);
    const auto a = fixtures::random_allocation(rng, chan, phy);
    const auto physical = rates::evaluate(a, chan, phy);
    const auto convex = rates::evaluate_convex(rates::to_convex(a, chan, phy), chan, phy);
    for (std::size_t i = 0; i < 4; ++i)
      EXPECT_NEAR(physical.rates[i], convex.rates[i], 1e-10 * physical.rates[i]);
  }
}

TEST(Evaluate, RejectsViolations) {
  Rng rng(23);
  PhyParams phy;
  phy.antennas = 2;
  const auto chan = make_channels(rng, 3, 2, 1e-6);
  const auto good = fixtures::random_allocation(rng, chan, phy);
  const auto expect_named = [&](Allocation a, const char* name) {
    try {
      rates::evaluate(a, chan, phy);
      ADD_FAILURE() << "accepted allocation violating " << name;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::infeasible_allocation);
      EXPECT_NE(std::string(e.what()).find(name), std::string::npos) << e.what();
    }
  };
  Allocation a = good;
  a.tau1 += 1.0;
  expect_named(a, "time budget");
  a = good;
  a.Q *= 3.0 / a.Q.trace().real() * 1.01;
  expect_named(a, "tr(Q)");
  a = good;
  a.Q(0, 0) = -1.0;
  a.Q(1, 1) = 1.0;
  a.Q(0, 1) = a.Q(1, 0) = 0.0;
  expect_named(a, "semidefinite");
  a = good;
  a.p3[0] *= 1e6;
  expect_named(a, "energy causality");
  a = good;
  a.tau2[0] = -1e-3;
  expect_named(a, "tau2[1]");
  // Slack below 1e-9 is tolerated.
  a = good;
  double used = phy.ce_overhead + a.tau1;
  for (double t : a.tau2) used += t;
  for (double t : a.tau3) used += t;
  a.tau1 += 1.0 - used + 5e-10;
  EXPECT_NO_THROW(rates::evaluate(a, chan, phy));
}

TEST(Evaluate, RatesMonotoneInEnergy) {
  Rng rng(24);
  PhyParams phy;
  phy.antennas = 2;
  for (int k = 0; k < 50; ++k) {
    const auto chan = make_channels(rng, 3, 2, 1e-6);
    Allocation a = fixtures::random_allocation(rng, chan, phy);
    const auto before = rates::evaluate(a, chan, phy);
    // Halve the transferred power; zeroed CH powers keep causality.
    a.Q *= 0.5;
    a.p3.assign(a.p3.size(), 0.0);
    const auto after = rates::evaluate(a, chan, phy);
    for (std::size_t j = 0; j < before.r2.size(); ++j) {
      EXPECT_LE(after.r2[j], before.r2[j]);
      EXPECT_LE(after.v2[j], before.v2[j]);
    }
  }
}
