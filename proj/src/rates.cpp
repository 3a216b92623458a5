#include "wpcn/rates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "wpcn/error.hpp"

namespace wpcn {

RateCoefficients rate_coefficients(const ChannelRealization& chan, const PhyParams& phy) {
  const double scale = phy.harvest_efficiency / phy.noise_watts;
  RateCoefficients c;
  c.rho.reserve(chan.size());
  for (std::size_t i = 0; i < chan.size(); ++i) c.rho.push_back(scale * chan.hap_gain(i));
  c.rho_bar.reserve(chan.size() - 1);
  for (std::size_t j = 1; j < chan.size(); ++j) c.rho_bar.push_back(scale * chan.intra_gain(j));
  return c;
}

namespace rates {

namespace {

constexpr double kLn2 = std::numbers::ln2;

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0)) {
    std::ostringstream os;
    os << what << " must be >= 0 (got " << v << ")";
    throw Error(ErrorCode::domain_error, os.str());
  }
}

[[noreturn]] void infeasible(const std::string& constraint, double excess) {
  std::ostringstream os;
  os << "infeasible allocation: " << constraint << " violated by " << excess;
  throw Error(ErrorCode::infeasible_allocation, os.str());
}

double clamp0(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

double perspective_rate(double x, double w) {
  require_nonnegative(x, "perspective_rate: time");
  require_nonnegative(w, "perspective_rate: energy");
  if (x == 0.0) return 0.0;
  return x * std::log1p(w / x) / kLn2;
}

double log1p_excess(double r) {
  if (r < 1e-2) {
    // sum_{k>=2} (-1)^k (k-1)/k r^k
    double term = r * r;
    double sum = 0.0;
    for (int k = 2; k < 16; ++k) {
      const double c = static_cast<double>(k - 1) / static_cast<double>(k);
      sum += (k % 2 == 0 ? c : -c) * term;
      term *= r;
    }
    return sum;
  }
  return std::log1p(r) - r / (1.0 + r);
}

PerspectiveDerivatives perspective_derivatives(double x, double w) {
  if (!(x > 0.0)) throw Error(ErrorCode::domain_error, "perspective_derivatives: time must be > 0");
  require_nonnegative(w, "perspective_derivatives: energy");
  const double r = w / x;
  const double s = x + w;
  const double k = 1.0 / (kLn2 * s * s);
  PerspectiveDerivatives d;
  d.value = x * std::log1p(r) / kLn2;
  d.dx = log1p_excess(r) / kLn2;
  d.dw = 1.0 / ((1.0 + r) * kLn2);
  d.dxx = -k * w * r;
  d.dxw = k * w;
  d.dww = -k * x;
  return d;
}

double quadratic_form(const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& a) {
  return a.dot(Q * a).real();
}

double harvested_energy(double tau1, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& a,
                        double eta) {
  require_nonnegative(tau1, "harvested_energy: tau1");
  return eta * tau1 * clamp0(quadratic_form(Q, a));
}

double intra_rate(double tau2, double z, double rho_bar) {
  require_nonnegative(rho_bar, "intra_rate: coefficient");
  require_nonnegative(z, "intra_rate: z");
  return perspective_rate(tau2, rho_bar * z);
}

double intra_rate(double tau2, double tau1, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& a,
                  double g, const PhyParams& phy) {
  require_nonnegative(tau2, "intra_rate: tau2");
  if (tau2 == 0.0) return 0.0;
  const double power = harvested_energy(tau1, Q, a, phy.harvest_efficiency) / tau2;
  return tau2 * std::log1p(g * power / phy.noise_watts) / kLn2;
}

double overheard_rate(double tau2, double z, double rho) {
  require_nonnegative(rho, "overheard_rate: coefficient");
  require_nonnegative(z, "overheard_rate: z");
  return perspective_rate(tau2, rho * z);
}

double overheard_rate(double tau2, double tau1, const Eigen::MatrixXcd& Q,
                      const Eigen::VectorXcd& a, const PhyParams& phy) {
  require_nonnegative(tau2, "overheard_rate: tau2");
  require_nonnegative(tau1, "overheard_rate: tau1");
  if (tau2 == 0.0) return 0.0;
  const double snr = phy.harvest_efficiency * (tau1 / tau2) * a.squaredNorm() *
                     clamp0(quadratic_form(Q, a)) / phy.noise_watts;
  return tau2 * std::log1p(snr) / kLn2;
}

std::vector<double> relay_rates(const std::vector<double>& tau3, const std::vector<double>& theta,
                                double rho0) {
  if (tau3.size() != theta.size())
    throw Error(ErrorCode::invalid_parameter, "relay_rates: tau3 and theta sizes differ");
  require_nonnegative(rho0, "relay_rates: coefficient");
  std::vector<double> out(tau3.size());
  for (std::size_t i = 0; i < tau3.size(); ++i) {
    require_nonnegative(theta[i], "relay_rates: theta");
    out[i] = perspective_rate(tau3[i], rho0 * theta[i]);
  }
  return out;
}

std::vector<double> relay_rates_from_power(const std::vector<double>& tau3,
                                           const std::vector<double>& p3, double h0,
                                           const PhyParams& phy) {
  if (tau3.size() != p3.size())
    throw Error(ErrorCode::invalid_parameter, "relay_rates_from_power: tau3 and p3 sizes differ");
  std::vector<double> out(tau3.size());
  for (std::size_t i = 0; i < tau3.size(); ++i) {
    require_nonnegative(tau3[i], "relay_rates_from_power: tau3");
    require_nonnegative(p3[i], "relay_rates_from_power: p3");
    out[i] = tau3[i] * std::log1p(h0 * p3[i] / phy.noise_watts) / kLn2;
  }
  return out;
}

double cm_rate(double r2, double v2, double v3) {
  require_nonnegative(r2, "cm_rate: R2");
  require_nonnegative(v2, "cm_rate: V2");
  require_nonnegative(v3, "cm_rate: V3");
  return std::min(r2, v2 + v3);
}

namespace {

void check_shape(std::size_t n, int m, std::size_t tau2, std::size_t tau3, std::size_t third,
                 const Eigen::MatrixXcd& mat, const char* third_name) {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::invalid_parameter, msg); };
  if (tau2 + 1 != n) bad("allocation: tau2 must have N-1 entries");
  if (tau3 != n) bad("allocation: tau3 must have N entries");
  if (third != n) bad(std::string("allocation: ") + third_name + " must have N entries");
  if (mat.rows() != m || mat.cols() != m) bad("allocation: beamforming matrix must be M x M");
}

RateReport assemble(std::vector<double> r2, std::vector<double> v2, std::vector<double> relay) {
  RateReport rep;
  rep.rates.resize(relay.size());
  rep.rates[0] = relay[0];
  rep.v3.assign(relay.begin() + 1, relay.end());
  for (std::size_t j = 1; j < relay.size(); ++j)
    rep.rates[j] = cm_rate(r2[j - 1], v2[j - 1], relay[j]);
  rep.r2 = std::move(r2);
  rep.v2 = std::move(v2);
  rep.min_rate = *std::min_element(rep.rates.begin(), rep.rates.end());
  rep.sum_rate = 0.0;
  for (double r : rep.rates) rep.sum_rate += r;
  return rep;
}

}  // namespace

RateReport evaluate(const Allocation& alloc, const ChannelRealization& chan, const PhyParams& phy) {
  const std::size_t n = chan.size();
  const int m = chan.antennas();
  check_shape(n, m, alloc.tau2.size(), alloc.tau3.size(), alloc.p3.size(), alloc.Q, "p3");
  const double slack = kAllocationSlack;
  const double power = phy.tx_power_watts;

  auto nonneg = [&](double v, const std::string& what, double scale) {
    if (v < -slack * scale) infeasible(what + " >= 0", -v);
  };
  nonneg(alloc.tau1, "tau1", 1.0);
  double time = phy.ce_overhead + alloc.tau1;
  for (std::size_t j = 0; j < alloc.tau2.size(); ++j) {
    nonneg(alloc.tau2[j], "tau2[" + std::to_string(j + 1) + "]", 1.0);
    time += alloc.tau2[j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    nonneg(alloc.tau3[i], "tau3[" + std::to_string(i) + "]", 1.0);
    nonneg(alloc.p3[i], "p3[" + std::to_string(i) + "]", power);
    time += alloc.tau3[i];
  }
  if (time > 1.0 + slack) infeasible("time budget", time - 1.0);

  const double hermitian_err = (alloc.Q - alloc.Q.adjoint()).cwiseAbs().maxCoeff();
  if (hermitian_err > slack * power) infeasible("Q Hermitian", hermitian_err);
  const double trace = alloc.Q.trace().real();
  if (trace > power * (1.0 + slack)) infeasible("tr(Q) <= P", trace - power);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(alloc.Q, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < -slack * power) infeasible("Q positive semidefinite", -min_eig);

  double spent = 0.0;
  for (std::size_t i = 0; i < n; ++i) spent += clamp0(alloc.tau3[i]) * clamp0(alloc.p3[i]);
  const double harvested =
      harvested_energy(clamp0(alloc.tau1), alloc.Q, chan.hap_channel(0), phy.harvest_efficiency);
  if (spent > harvested + slack * std::max(harvested, spent))
    infeasible("CH energy causality", spent - harvested);

  const double tau1 = clamp0(alloc.tau1);
  std::vector<double> r2(n - 1), v2(n - 1);
  for (std::size_t j = 1; j < n; ++j) {
    const double t2 = clamp0(alloc.tau2[j - 1]);
    r2[j - 1] = intra_rate(t2, tau1, alloc.Q, chan.hap_channel(j), chan.intra_gain(j), phy);
    v2[j - 1] = overheard_rate(t2, tau1, alloc.Q, chan.hap_channel(j), phy);
  }
  std::vector<double> t3(n), p3(n);
  for (std::size_t i = 0; i < n; ++i) {
    t3[i] = clamp0(alloc.tau3[i]);
    p3[i] = clamp0(alloc.p3[i]);
  }
  return assemble(std::move(r2), std::move(v2),
                  relay_rates_from_power(t3, p3, chan.hap_gain(0), phy));
}

RateReport evaluate_convex(const ConvexVars& vars, const ChannelRealization& chan,
                           const PhyParams& phy) {
  const std::size_t n = chan.size();
  check_shape(n, chan.antennas(), vars.tau2.size(), vars.tau3.size(), vars.theta.size(), vars.W,
              "theta");
  if (vars.z.size() != n) throw Error(ErrorCode::invalid_parameter, "convex vars: z must have N entries");
  const RateCoefficients coef = rate_coefficients(chan, phy);
  std::vector<double> r2(n - 1), v2(n - 1);
  for (std::size_t j = 1; j < n; ++j) {
    const double t2 = clamp0(vars.tau2[j - 1]);
    const double z = clamp0(vars.z[j]);
    r2[j - 1] = intra_rate(t2, z, coef.rho_bar[j - 1]);
    v2[j - 1] = overheard_rate(t2, z, coef.rho[j]);
  }
  std::vector<double> t3(n), theta(n);
  for (std::size_t i = 0; i < n; ++i) {
    t3[i] = clamp0(vars.tau3[i]);
    theta[i] = clamp0(vars.theta[i]);
  }
  return assemble(std::move(r2), std::move(v2), relay_rates(t3, theta, coef.rho[0]));
}

ConvexVars to_convex(const Allocation& alloc, const ChannelRealization& chan, const PhyParams& phy) {
  const std::size_t n = chan.size();
  check_shape(n, chan.antennas(), alloc.tau2.size(), alloc.tau3.size(), alloc.p3.size(), alloc.Q,
              "p3");
  ConvexVars v;
  v.tau1 = alloc.tau1;
  v.tau2 = alloc.tau2;
  v.tau3 = alloc.tau3;
  v.W = alloc.tau1 * alloc.Q;
  v.z.resize(n);
  v.theta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    v.z[i] = quadratic_form(v.W, chan.hap_channel(i));
    v.theta[i] = alloc.tau3[i] * alloc.p3[i] / phy.harvest_efficiency;
  }
  v.sbar = evaluate_convex(v, chan, phy).min_rate;
  return v;
}

}  // namespace rates
}  // namespace wpcn
