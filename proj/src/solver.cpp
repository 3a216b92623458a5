#include "wpcn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cooperative.hpp"
#include "wpcn/error.hpp"

namespace wpcn {

namespace {

constexpr double kSnap = 1e-12;

double snap(double v) { return v > kSnap ? v : 0.0; }

Allocation idle_allocation(std::size_t n, const PhyParams& phy) {
  Allocation a;
  a.tau1 = 1.0 - phy.ce_overhead;
  a.tau2.assign(n - 1, 0.0);
  a.tau3.assign(n, 0.0);
  a.p3.assign(n, 0.0);
  a.Q = Eigen::MatrixXcd::Identity(phy.antennas, phy.antennas) *
        (phy.tx_power_watts / phy.antennas);
  return a;
}

double min_eigenvalue(const Eigen::MatrixXcd& A) {
  if (A.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

std::string_view to_string(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iterations: return "max-iterations";
    case SolveStatus::infeasible_input: return "infeasible-input";
  }
  return "unknown";
}

std::string_view to_string(SchemeId s) noexcept {
  switch (s) {
    case SchemeId::proposed_eb_cooperation: return "proposed-eb-cooperation";
    case SchemeId::cooperation_no_eb: return "cooperation-no-eb";
    case SchemeId::independent_eb: return "independent-eb";
  }
  return "unknown";
}

SchemeId parse_scheme(std::string_view name) {
  for (SchemeId s : {SchemeId::proposed_eb_cooperation, SchemeId::cooperation_no_eb,
                     SchemeId::independent_eb})
    if (to_string(s) == name) return s;
  throw Error(ErrorCode::invalid_parameter, "unknown scheme '" + std::string(name) + "'");
}

double KktResiduals::residual(std::string_view name) const {
  for (const auto& [n, v] : primal)
    if (n == name) return v;
  throw Error(ErrorCode::invalid_parameter, "no residual named '" + std::string(name) + "'");
}

namespace detail {

SolveStatus to_status(barrier::Status s) noexcept {
  return s == barrier::Status::converged ? SolveStatus::optimal : SolveStatus::max_iterations;
}

bool reject_input(const ChannelRealization& chan, const PhyParams& phy, SchemeId scheme,
                  SolveReport& report) {
  report = SolveReport{};
  report.scheme = scheme;
  report.phy = phy;
  auto reject = [&](const char* msg) {
    report.status = SolveStatus::infeasible_input;
    report.sbar_star = 0.0;
    report.rates.rates.assign(chan.size(), 0.0);
    report.message = msg;
    return true;
  };
  if (!(phy.ce_overhead < 1.0)) return reject("channel-estimation overhead leaves no time");
  phy.validate();
  if (chan.antennas() != phy.antennas)
    throw Error(ErrorCode::invalid_parameter, "channel antenna count does not match phy.antennas");
  const auto gains = chan.hap_gains();
  if (std::all_of(gains.begin(), gains.end(), [](double h) { return h == 0.0; }))
    return reject("all HAP channels are zero");
  return false;
}

SolveReport solve_cooperative(const ChannelRealization& chan, const PhyParams& phy,
                              const SolverSettings& settings, bool beamforming) {
  settings.validate();
  SolveReport rep;
  if (reject_input(chan, phy, beamforming ? SchemeId::proposed_eb_cooperation
                                          : SchemeId::cooperation_no_eb,
                   rep))
    return rep;

  const int n = static_cast<int>(chan.size());
  const int m = phy.antennas;
  const double power = phy.tx_power_watts;
  const RateCoefficients coef = rate_coefficients(chan, phy);

  bool dead = coef.rho[0] == 0.0;
  for (int j = 1; j < n; ++j) dead = dead || coef.rho[j] == 0.0 || coef.rho_bar[j - 1] == 0.0;
  if (dead) {
    rep.allocation = idle_allocation(chan.size(), phy);
    rep.convex = rates::to_convex(rep.allocation, chan, phy);
    rep.rates = rates::evaluate(rep.allocation, chan, phy);
    rep.message = "a zero channel gain forces a zero max-min rate";
    return rep;
  }

  // Variables: tau1 | tau2_1..N-1 | tau3_0..N-1 | rho0 theta_0..N-1 | S | W / P
  const int i_tau1 = 0;
  const auto i_tau2 = [](int j) { return j; };
  const auto i_tau3 = [n](int i) { return n + i; };
  const auto i_theta = [n](int i) { return 2 * n + i; };
  const int i_s = 3 * n;
  const barrier::HermitianBlock block{3 * n + 1, m};

  barrier::Program prog;
  prog.num_vars = 3 * n + 1 + (beamforming ? block.size() : 0);
  prog.objective = i_s;

  // c * z_i as a linear form.
  auto energy = [&](int i, double c) {
    if (beamforming) return block.quadratic_form(chan.hap_channel(i), c * power);
    barrier::LinearForm f;
    f.add(i_tau1, c * power * chan.hap_gain(i) / m);
    return f;
  };
  auto relay_term = [&](int i) {
    barrier::PerspectiveTerm t{i_tau3(i), {}};
    t.energy.add(i_theta(i), 1.0);
    return t;
  };

  prog.rates.push_back({"rate_R0", {relay_term(0)}, i_s});
  for (int j = 1; j < n; ++j) {
    const std::string tag = std::to_string(j);
    prog.rates.push_back(
        {"rate_relay_" + tag, {{i_tau2(j), energy(j, coef.rho[j])}, relay_term(j)}, i_s});
    prog.rates.push_back({"rate_intra_" + tag, {{i_tau2(j), energy(j, coef.rho_bar[j - 1])}}, i_s});
  }

  barrier::LinearConstraint time{"time_budget", {}};
  time.form.constant = 1.0 - phy.ce_overhead;
  for (int k = 0; k < 2 * n; ++k) time.form.add(k, -1.0);
  prog.linear.push_back(time);
  for (int k = 0; k < 3 * n; ++k) {
    barrier::LinearConstraint pos{"nonneg_" + std::to_string(k), {}};
    pos.form.add(k, 1.0);
    prog.linear.push_back(pos);
  }
  barrier::LinearConstraint causality{"energy_causality", energy(0, coef.rho[0])};
  for (int i = 0; i < n; ++i) causality.form.add(i_theta(i), -1.0);
  prog.linear.push_back(causality);
  if (beamforming) {
    barrier::LinearConstraint trace{"trace", block.trace(-1.0)};
    trace.form.add(i_tau1, 1.0);
    prog.linear.push_back(trace);
    prog.psd = block;
  }

  // Strictly feasible start.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(prog.num_vars);
  const double slot = (1.0 - phy.ce_overhead) / (2 * n + 1);
  for (int k = 0; k < 2 * n; ++k) x[k] = slot;
  if (beamforming)
    block.store(Eigen::MatrixXcd::Identity(m, m) * (0.5 * slot / m), x);
  const double harvested = causality.form(x);
  for (int i = 0; i < n; ++i) x[i_theta(i)] = harvested / (2 * n);
  double start_rate = std::numeric_limits<double>::infinity();
  const auto values = barrier::constraint_values(prog, x);
  for (std::size_t r = 0; r < prog.rates.size(); ++r)
    start_rate = std::min(start_rate, values[r].second);
  x[i_s] = 0.5 * start_rate;
  // Each WD's rate is at most its link's rate with all time and power spent on it.
  const double span = 1.0 - phy.ce_overhead;
  double bound = rates::perspective_rate(span, coef.rho[0] * power * chan.hap_gain(0) * span);
  for (int j = 1; j < n; ++j)
    bound = std::min(bound, rates::perspective_rate(span, coef.rho_bar[j - 1] * power *
                                                              chan.hap_gain(j) * span));
  prog.objective_scale = bound;

  const barrier::Result res = barrier::solve(prog, x, settings);
  const Eigen::VectorXd& xs = res.x;

  ConvexVars& cv = rep.convex;
  cv.tau1 = xs[i_tau1];
  cv.tau2.resize(n - 1);
  for (int j = 1; j < n; ++j) cv.tau2[j - 1] = xs[i_tau2(j)];
  cv.tau3.resize(n);
  cv.theta.resize(n);
  for (int i = 0; i < n; ++i) {
    cv.tau3[i] = xs[i_tau3(i)];
    cv.theta[i] = xs[i_theta(i)] / coef.rho[0];
  }
  cv.W = beamforming ? Eigen::MatrixXcd(power * block.matrix(xs))
                     : Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(m, m) * (cv.tau1 * power / m));
  cv.z.resize(n);
  for (int i = 0; i < n; ++i) cv.z[i] = rates::quadratic_form(cv.W, chan.hap_channel(i));
  cv.sbar = xs[i_s];

  rep.status = to_status(res.status);
  rep.sbar_star = cv.sbar;
  rep.newton_iterations = res.newton_iterations;
  rep.outer_iterations = res.outer_iterations;
  rep.gap_bound = res.gap_bound;
  rep.stationarity = res.stationarity;
  rep.rates = rates::evaluate_convex(cv, chan, phy);
  rep.allocation = recover_primal(rep);
  return rep;
}

}  // namespace detail

SolveReport solve_p3(const ChannelRealization& chan, const PhyParams& phy,
                     const SolverSettings& settings) {
  return detail::solve_cooperative(chan, phy, settings, true);
}

Allocation recover_primal(const SolveReport& report) {
  if (report.scheme == SchemeId::independent_eb)
    throw Error(ErrorCode::invalid_parameter,
                "recover_primal: independent reports carry their allocation directly");
  if (report.status == SolveStatus::infeasible_input)
    throw Error(ErrorCode::invalid_parameter, "recover_primal: report has no solution");
  const ConvexVars& cv = report.convex;
  if (cv.tau1 <= kSnap && report.sbar_star != 0.0)
    throw Error(ErrorCode::degenerate_solution,
                "recover_primal: tau1 vanished with a nonzero objective");

  Allocation a;
  a.tau1 = snap(cv.tau1);
  a.tau2.reserve(cv.tau2.size());
  for (double t : cv.tau2) a.tau2.push_back(snap(t));
  const std::size_t n = cv.tau3.size();
  a.tau3.resize(n);
  a.p3.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.tau3[i] = snap(cv.tau3[i]);
    a.p3[i] = a.tau3[i] > 0.0 ? report.phy.harvest_efficiency * std::max(cv.theta[i], 0.0) / a.tau3[i]
                              : 0.0;
  }
  if (a.tau1 > 0.0) {
    a.Q = cv.W / a.tau1;
    a.Q = (0.5 * (a.Q + a.Q.adjoint())).eval();
  } else {
    a.Q = Eigen::MatrixXcd::Zero(cv.W.rows(), cv.W.cols());
  }
  return a;
}

KktResiduals kkt_residuals(const SolveReport& report, const ChannelRealization& chan,
                           const PhyParams& phy) {
  KktResiduals k;
  k.stationarity = report.stationarity;
  auto& p = k.primal;
  const std::size_t n = chan.size();
  const double s = report.sbar_star;
  const RateCoefficients coef = rate_coefficients(chan, phy);

  if (report.scheme == SchemeId::independent_eb) {
    const IndependentAllocation& a = report.independent;
    p.emplace_back("time_budget", phy.ce_overhead + a.tau1 +
                                      std::accumulate(a.tau2.begin(), a.tau2.end(), 0.0) - 1.0);
    p.emplace_back("trace", a.Q.trace().real() - phy.tx_power_watts);
    p.emplace_back("psd", -min_eigenvalue(a.Q));
    p.emplace_back("nonneg_tau1", -a.tau1);
    for (std::size_t i = 0; i < a.tau2.size(); ++i) {
      p.emplace_back("nonneg_tau2_" + std::to_string(i), -a.tau2[i]);
      const double z = std::max(a.tau1 * rates::quadratic_form(a.Q, chan.hap_channel(i)), 0.0);
      p.emplace_back("rate_" + std::to_string(i),
                     s - rates::perspective_rate(std::max(a.tau2[i], 0.0), coef.rho[i] * z));
    }
  } else {
    const ConvexVars& c = report.convex;
    p.emplace_back("time_budget",
                   phy.ce_overhead + c.tau1 + std::accumulate(c.tau2.begin(), c.tau2.end(), 0.0) +
                       std::accumulate(c.tau3.begin(), c.tau3.end(), 0.0) - 1.0);
    p.emplace_back("trace", c.W.trace().real() - c.tau1 * phy.tx_power_watts);
    p.emplace_back("psd", -min_eigenvalue(c.W));
    p.emplace_back("energy_causality",
                   std::accumulate(c.theta.begin(), c.theta.end(), 0.0) - c.z[0]);
    for (std::size_t i = 0; i < n; ++i)
      p.emplace_back("z_" + std::to_string(i),
                     std::abs(c.z[i] - rates::quadratic_form(c.W, chan.hap_channel(i))));
    p.emplace_back("nonneg_tau1", -c.tau1);
    for (std::size_t j = 0; j < c.tau2.size(); ++j)
      p.emplace_back("nonneg_tau2_" + std::to_string(j + 1), -c.tau2[j]);
    for (std::size_t i = 0; i < n; ++i) {
      p.emplace_back("nonneg_tau3_" + std::to_string(i), -c.tau3[i]);
      p.emplace_back("nonneg_theta_" + std::to_string(i), -c.theta[i]);
    }
    const RateReport r = rates::evaluate_convex(c, chan, phy);
    p.emplace_back("rate_R0", s - r.rates[0]);
    for (std::size_t j = 1; j < n; ++j) {
      p.emplace_back("rate_intra_" + std::to_string(j), s - r.r2[j - 1]);
      p.emplace_back("rate_relay_" + std::to_string(j), s - (r.v2[j - 1] + r.v3[j - 1]));
    }
  }
  k.max_primal = -std::numeric_limits<double>::infinity();
  for (const auto& [name, v] : p) k.max_primal = std::max(k.max_primal, v);
  return k;
}

}  // namespace wpcn
