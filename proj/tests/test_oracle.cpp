#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "wpcn/baselines.hpp"
#include "wpcn/error.hpp"
#include "wpcn/harness.hpp"
#include "wpcn/oracle.hpp"

using namespace wpcn;

TEST(PerspectiveHessian, UnitPoint) {
  const Eigen::Matrix2d h = perspective_hessian(1.0, 1.0);
  const double k = 1.0 / (4.0 * std::numbers::ln2);
  EXPECT_NEAR(h(0, 0), -k, 1e-15);
  EXPECT_NEAR(h(0, 1), k, 1e-15);
  EXPECT_NEAR(h(1, 0), k, 1e-15);
  EXPECT_NEAR(h(1, 1), -k, 1e-15);
  EXPECT_TRUE(hessian_psd_check(1.0, 1.0));
}

TEST(PerspectiveHessian, NullDirectionIsAlongTheArguments) {
  // The quadratic form -(d1 y / sqrt(x) - d2 sqrt(x))^2 / (ln2 (x + y)^2)
  // vanishes for d proportional to (x, y).
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const double x = 10.0 * (1.0 - rng.uniform()), y = 10.0 * (1.0 - rng.uniform());
    const Eigen::Matrix2d h = perspective_hessian(x, y);
    const Eigen::Vector2d d(x, y);
    const double scale = h.cwiseAbs().maxCoeff() * d.squaredNorm();
    EXPECT_NEAR(d.dot(h * d), 0.0, 1e-13 * scale);
    // The proof's closed form agrees with the matrix on a generic direction.
    const Eigen::Vector2d e(rng.uniform() - 0.5, rng.uniform() - 0.5);
    const double closed = -std::pow(e[0] * y / std::sqrt(x) - e[1] * std::sqrt(x), 2) /
                          (std::numbers::ln2 * (x + y) * (x + y));
    EXPECT_NEAR(e.dot(h * e), closed, 1e-12 * h.cwiseAbs().maxCoeff());
  }
  // (y, x) is not a null direction unless x = y.
  const Eigen::Matrix2d h = perspective_hessian(1.0, 3.0);
  EXPECT_LT(Eigen::Vector2d(3.0, 1.0).dot(h * Eigen::Vector2d(3.0, 1.0)), -1.0);
}

TEST(PerspectiveHessian, RandomSweepPasses) {
  Rng rng(2);
  for (int k = 0; k < 1000; ++k) {
    const double x = 10.0 * (1.0 - rng.uniform()), y = 10.0 * (1.0 - rng.uniform());
    const HessianCheck c = check_perspective_hessian(x, y);
    EXPECT_TRUE(c.concave) << x << ' ' << y;
    EXPECT_TRUE(c.matches_fd) << x << ' ' << y << " fd " << c.fd_error;
    EXPECT_LE(c.max_eigenvalue, 1e-9);
  }
}

TEST(PerspectiveHessian, MatchesRatesModuleDerivatives) {
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    const double x = 0.1 + 5.0 * rng.uniform(), y = 0.1 + 5.0 * rng.uniform();
    const Eigen::Matrix2d h = perspective_hessian(x, y);
    const auto d = rates::perspective_derivatives(x, y);
    EXPECT_NEAR(h(0, 0), d.dxx, 1e-12 * std::abs(d.dxx));
    EXPECT_NEAR(h(0, 1), d.dxw, 1e-12 * std::abs(d.dxw));
    EXPECT_NEAR(h(1, 1), d.dww, 1e-12 * std::abs(d.dww));
  }
}

TEST(PerspectiveHessian, RejectsNonpositiveInputs) {
  for (auto [x, y] : {std::pair{0.0, 1.0}, {1.0, 0.0}, {-1.0, 2.0}}) {
    try {
      hessian_psd_check(x, y);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::domain_error);
    }
  }
}

TEST(GridOracle, ZeroChannelsGiveZero) {
  PhyParams phy;
  phy.antennas = 2;
  const auto chan = fixtures::flat({0.0, 0.0}, {0.0}, 2);
  EXPECT_EQ(grid_maxmin_coop(chan, phy).s, 0.0);
  EXPECT_EQ(grid_maxmin_independent(chan, phy).s, 0.0);
}

TEST(GridOracle, TooLargeInstancesRejected) {
  const auto big_n = fixtures::placed(1, 4, 1);
  const auto big_m = fixtures::placed(1, 2, 3);
  for (const auto* inst : {&big_n, &big_m}) {
    try {
      grid_maxmin_coop(inst->chan, inst->phy);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::instance_too_large);
    }
    EXPECT_THROW(grid_maxmin_independent(inst->chan, inst->phy), Error);
  }
}

TEST(GridOracle, ResultIsCertifiedByRatesModule) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto inst = desk_instance(seed);
    const auto c = grid_maxmin_coop(inst.chan, inst.phy);
    EXPECT_EQ(rates::evaluate(c.allocation, inst.chan, inst.phy).min_rate, c.s);
    const auto i = grid_maxmin_independent(inst.chan, inst.phy);
    EXPECT_EQ(evaluate_independent(i.independent, inst.chan, inst.phy).min_rate, i.s);
  }
}

TEST(GridOracle, FinerResolutionNeverWorse) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto inst = desk_instance(seed);
    OracleSettings coarse;
    coarse.resolution = 0.1;
    coarse.refine_rounds = 0;
    OracleSettings fine = coarse;
    fine.resolution = 0.05;
    EXPECT_GE(grid_maxmin_coop(inst.chan, inst.phy, fine).s,
              grid_maxmin_coop(inst.chan, inst.phy, coarse).s);
    EXPECT_GE(grid_maxmin_independent(inst.chan, inst.phy, fine).s,
              grid_maxmin_independent(inst.chan, inst.phy, coarse).s);
    OracleSettings refined = coarse;
    refined.refine_rounds = 2;
    EXPECT_GE(grid_maxmin_coop(inst.chan, inst.phy, refined).s,
              grid_maxmin_coop(inst.chan, inst.phy, coarse).s);
  }
}

TEST(GridOracle, Deterministic) {
  const auto inst = desk_instance(2);
  const auto a = grid_maxmin_coop(inst.chan, inst.phy);
  const auto b = grid_maxmin_coop(inst.chan, inst.phy);
  EXPECT_EQ(a.s, b.s);
  EXPECT_EQ(a.evaluations, b.evaluations);
  OracleSettings serial;
  serial.parallel = false;
  EXPECT_EQ(grid_maxmin_coop(inst.chan, inst.phy, serial).s, a.s);
}

TEST(GridOracle, SerialAndParallelEvaluationAgree) {
  const auto inst = desk_instance(3);
  const auto pts = oracle::coarse_grid(inst.phy.antennas, 0.1);
  for (auto problem : {oracle::Problem::cooperative, oracle::Problem::independent}) {
    const auto s = oracle::evaluate_serial(problem, inst.chan, inst.phy, pts, 0.0);
    const auto p = oracle::evaluate_parallel(problem, inst.chan, inst.phy, pts, 0.0);
    EXPECT_EQ(s, p);
  }
}

TEST(GridOracle, AgreesWithSolverOnDeskInstances) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto inst = desk_instance(seed);
    const auto orc = grid_maxmin_coop(inst.chan, inst.phy);
    const auto rep = solve_p3(inst.chan, inst.phy);
    const double s = rep.sbar_star;
    EXPECT_LE(std::abs(s - orc.s), std::max(1e-3 * orc.s, orc.final_resolution)) << "seed " << seed;
    // The oracle is a feasible point, so only the certified gap separates them.
    EXPECT_GE(s, orc.s - rep.gap_bound);
  }
}
