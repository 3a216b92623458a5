#include "wpcn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "cooperative.hpp"
#include "wpcn/error.hpp"

namespace wpcn {

namespace {

constexpr double kSnap = 1e-12;

double snap(double v) { return v > kSnap ? v : 0.0; }

[[noreturn]] void infeasible(const std::string& constraint, double excess) {
  std::ostringstream os;
  os << "infeasible allocation: " << constraint << " violated by " << excess;
  throw Error(ErrorCode::infeasible_allocation, os.str());
}

RateReport summarize(std::vector<double> r) {
  RateReport rep;
  rep.rates = std::move(r);
  rep.min_rate = *std::min_element(rep.rates.begin(), rep.rates.end());
  for (double v : rep.rates) rep.sum_rate += v;
  return rep;
}

}  // namespace

SolveReport solve_no_eb(const ChannelRealization& chan, const PhyParams& phy,
                        const SolverSettings& settings) {
  return detail::solve_cooperative(chan, phy, settings, false);
}

RateReport evaluate_independent(const IndependentAllocation& alloc, const ChannelRealization& chan,
                                const PhyParams& phy) {
  const std::size_t n = chan.size();
  const int m = chan.antennas();
  if (alloc.tau2.size() != n)
    throw Error(ErrorCode::invalid_parameter, "independent allocation: tau2 must have N entries");
  if (alloc.Q.rows() != m || alloc.Q.cols() != m)
    throw Error(ErrorCode::invalid_parameter, "independent allocation: Q must be M x M");
  const double slack = kAllocationSlack;
  const double power = phy.tx_power_watts;

  if (alloc.tau1 < -slack) infeasible("tau1 >= 0", -alloc.tau1);
  double time = phy.ce_overhead + alloc.tau1;
  for (std::size_t i = 0; i < n; ++i) {
    if (alloc.tau2[i] < -slack) infeasible("tau2[" + std::to_string(i) + "] >= 0", -alloc.tau2[i]);
    time += alloc.tau2[i];
  }
  if (time > 1.0 + slack) infeasible("time budget", time - 1.0);
  const double hermitian_err = (alloc.Q - alloc.Q.adjoint()).cwiseAbs().maxCoeff();
  if (hermitian_err > slack * power) infeasible("Q Hermitian", hermitian_err);
  const double trace = alloc.Q.trace().real();
  if (trace > power * (1.0 + slack)) infeasible("tr(Q) <= P", trace - power);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(alloc.Q, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < -slack * power) infeasible("Q positive semidefinite", -min_eig);

  const RateCoefficients coef = rate_coefficients(chan, phy);
  const double tau1 = std::max(alloc.tau1, 0.0);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = std::max(tau1 * rates::quadratic_form(alloc.Q, chan.hap_channel(i)), 0.0);
    r[i] = rates::perspective_rate(std::max(alloc.tau2[i], 0.0), coef.rho[i] * z);
  }
  return summarize(std::move(r));
}

SolveReport solve_independent(const ChannelRealization& chan, const PhyParams& phy,
                              const SolverSettings& settings) {
  settings.validate();
  SolveReport rep;
  if (detail::reject_input(chan, phy, SchemeId::independent_eb, rep)) return rep;

  const int n = static_cast<int>(chan.size());
  const int m = phy.antennas;
  const double power = phy.tx_power_watts;
  const RateCoefficients coef = rate_coefficients(chan, phy);

  IndependentAllocation& a = rep.independent;
  if (std::any_of(coef.rho.begin(), coef.rho.end(), [](double r) { return r == 0.0; })) {
    a.tau1 = 1.0 - phy.ce_overhead;
    a.tau2.assign(n, 0.0);
    a.Q = Eigen::MatrixXcd::Identity(m, m) * (power / m);
    rep.rates = evaluate_independent(a, chan, phy);
    rep.message = "a zero channel gain forces a zero max-min rate";
    return rep;
  }

  // Variables: tau1 | tau2_0..N-1 | S | W / P
  const int i_tau1 = 0;
  const int i_s = n + 1;
  const barrier::HermitianBlock block{n + 2, m};

  barrier::Program prog;
  prog.num_vars = n + 2 + block.size();
  prog.objective = i_s;
  prog.psd = block;
  for (int i = 0; i < n; ++i)
    prog.rates.push_back({"rate_" + std::to_string(i),
                          {{1 + i, block.quadratic_form(chan.hap_channel(i), coef.rho[i] * power)}},
                          i_s});
  barrier::LinearConstraint time{"time_budget", {}};
  time.form.constant = 1.0 - phy.ce_overhead;
  for (int k = 0; k <= n; ++k) time.form.add(k, -1.0);
  prog.linear.push_back(time);
  for (int k = 0; k <= n; ++k) {
    barrier::LinearConstraint pos{"nonneg_" + std::to_string(k), {}};
    pos.form.add(k, 1.0);
    prog.linear.push_back(pos);
  }
  barrier::LinearConstraint trace{"trace", block.trace(-1.0)};
  trace.form.add(i_tau1, 1.0);
  prog.linear.push_back(trace);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(prog.num_vars);
  const double slot = (1.0 - phy.ce_overhead) / (n + 2);
  for (int k = 0; k <= n; ++k) x[k] = slot;
  block.store(Eigen::MatrixXcd::Identity(m, m) * (0.5 * slot / m), x);
  double start_rate = std::numeric_limits<double>::infinity();
  const auto values = barrier::constraint_values(prog, x);
  for (std::size_t r = 0; r < prog.rates.size(); ++r)
    start_rate = std::min(start_rate, values[r].second);
  x[i_s] = 0.5 * start_rate;
  const double span = 1.0 - phy.ce_overhead;
  double bound = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    bound = std::min(bound,
                     rates::perspective_rate(span, coef.rho[i] * power * chan.hap_gain(i) * span));
  prog.objective_scale = bound;

  const barrier::Result res = barrier::solve(prog, x, settings);
  const Eigen::VectorXd& xs = res.x;

  const Eigen::MatrixXcd W = power * block.matrix(xs);
  a.tau1 = snap(xs[i_tau1]);
  a.tau2.resize(n);
  for (int i = 0; i < n; ++i) a.tau2[i] = snap(xs[1 + i]);
  if (a.tau1 > 0.0) {
    a.Q = W / a.tau1;
    a.Q = (0.5 * (a.Q + a.Q.adjoint())).eval();
  } else {
    a.Q = Eigen::MatrixXcd::Zero(m, m);
  }

  ConvexVars& cv = rep.convex;
  cv.tau1 = xs[i_tau1];
  cv.W = W;
  cv.z.resize(n);
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) {
    cv.z[i] = rates::quadratic_form(W, chan.hap_channel(i));
    r[i] = rates::perspective_rate(std::max(xs[1 + i], 0.0), coef.rho[i] * std::max(cv.z[i], 0.0));
  }
  cv.sbar = xs[i_s];

  rep.status = detail::to_status(res.status);
  rep.sbar_star = cv.sbar;
  rep.newton_iterations = res.newton_iterations;
  rep.outer_iterations = res.outer_iterations;
  rep.gap_bound = res.gap_bound;
  rep.stationarity = res.stationarity;
  rep.rates = summarize(std::move(r));
  return rep;
}

SolveReport solve_scheme(SchemeId scheme, const ChannelRealization& chan, const PhyParams& phy,
                         const SolverSettings& settings) {
  switch (scheme) {
    case SchemeId::proposed_eb_cooperation: return solve_p3(chan, phy, settings);
    case SchemeId::cooperation_no_eb: return solve_no_eb(chan, phy, settings);
    case SchemeId::independent_eb: return solve_independent(chan, phy, settings);
  }
  throw Error(ErrorCode::invalid_parameter, "unknown scheme");
}

}  // namespace wpcn
