#include "wpcn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>

#include <boost/math/tools/toms748_solve.hpp>

#include "wpcn/baselines.hpp"
#include "wpcn/error.hpp"

namespace wpcn {

namespace {

using oracle::GridPoint;
using oracle::Problem;

constexpr double kLn2 = std::numbers::ln2;
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxRecenter = 20;

// 1 - ln(1 + q) / q
double rate_deficit(double q) {
  if (q < 1e-3) {
    double term = q;
    double sum = 0.0;
    for (int k = 2; k < 12; ++k) {
      sum += (k % 2 == 0 ? term : -term) / k;
      term *= q;
    }
    return sum;
  }
  return 1.0 - std::log1p(q) / q;
}

// (1 + s) ln(1 + s) - s
double relay_excess(double s) {
  if (s < 1e-3) {
    double term = s * s;
    double sum = 0.0;
    for (int k = 2; k < 12; ++k) {
      sum += (k % 2 == 0 ? term : -term) / (k * (k - 1.0));
      term *= s;
    }
    return sum;
  }
  return (1.0 + s) * std::log1p(s) - s;
}

// ln(1 + q) - q / (1 + q)
double log_excess(double q) {
  if (q < 1e-3) {
    double term = q * q;
    double sum = 0.0;
    for (int k = 2; k < 12; ++k) {
      sum += (k % 2 == 0 ? term : -term) * (k - 1.0) / k;
      term *= q;
    }
    return sum;
  }
  return std::log1p(q) - q / (1.0 + q);
}

double prate(double tau, double w) { return tau > 0.0 ? tau * std::log1p(w / tau) / kLn2 : 0.0; }

// x > 0 with f(x) = target for increasing f, searched in log space on
// [exp(lo), exp(hi)]. Returns the bracket end when the root lies outside.
template <class F>
double invert_increasing(F f, double target, double guess, double lo = -700.0, double hi = 700.0) {
  auto g = [&](double y) { return f(std::exp(y)) - target; };
  double a = std::clamp(std::log(guess), lo, hi);
  double b = a;
  double fa = g(a);
  double fb = fa;
  if (fa == 0.0) return std::exp(a);
  if (fa < 0.0) {
    while (fb < 0.0) {
      if (b >= hi) return std::exp(hi);
      a = b;
      fa = fb;
      b = std::min(b + 2.0, hi);
      fb = g(b);
    }
  } else {
    while (fa > 0.0) {
      if (a <= lo) return std::exp(lo);
      b = a;
      fb = fa;
      a = std::max(a - 2.0, lo);
      fa = g(a);
    }
  }
  if (fa == 0.0) return std::exp(a);
  if (fb == 0.0) return std::exp(b);
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(g, a, b, fa, fb,
                                                   boost::math::tools::eps_tolerance<double>(50),
                                                   iters);
  return std::exp(0.5 * (r.first + r.second));
}

// Slot length tau with tau log2(1 + w / tau) = S, or infinity.
double slot_for_rate(double S, double w) {
  if (S <= 0.0) return 0.0;
  if (S * kLn2 >= w) return kInf;
  const double e = (w - S * kLn2) / w;
  const double q = invert_increasing(rate_deficit, e, 2.0 * e / (1.0 - e + 1e-300));
  return w / q;
}

// Minimum time for the relay-side program at a given max-min target.
class CoopInner {
 public:
  CoopInner(double budget, std::vector<double> u, std::vector<double> w, double avail)
      : budget_(budget), u_(std::move(u)), w_(std::move(w)), avail_(avail) {}

  struct Plan {
    double s = 0.0;
    double time_per_bit = 0.0;
    std::vector<double> tau2;
    std::vector<double> deficit;
  };

  double upper() const {
    double hi = budget_;
    for (double u : u_) hi = std::min(hi, u);
    return hi / kLn2;
  }

  double time_needed(double S, Plan* plan = nullptr) const {
    const std::size_t m = u_.size();
    std::vector<double> t2min(m), tv(m);
    double floor_bits = S;
    for (std::size_t j = 0; j < m; ++j) {
      t2min[j] = slot_for_rate(S, u_[j]);
      if (!std::isfinite(t2min[j])) return kInf;
      tv[j] = slot_for_rate(S, w_[j]);
      if (!std::isfinite(tv[j])) floor_bits += S - w_[j] / kLn2;
    }
    // Even at vanishing relay power every bit costs ln 2 of budget.
    if (floor_bits * kLn2 >= budget_) return kInf;

    std::vector<double> tau(m), deficit(m);
    double kappa = 0.0, lambda = 0.0, tpb = 0.0, bits = 0.0;
    auto energy = [&](double s) {
      lambda = 1.0 / relay_excess(s);
      tpb = kLn2 / std::log1p(s);
      kappa = (1.0 + lambda * s) * tpb;
      const double target = kLn2 / kappa;
      bits = S;
      for (std::size_t j = 0; j < m; ++j) {
        const double q = invert_increasing(log_excess, target, std::sqrt(2.0 * target) + 1e-300);
        tau[j] = std::max(t2min[j], std::min(w_[j] / q, tv[j]));
        deficit[j] = std::max(0.0, S - prate(tau[j], w_[j]));
        bits += deficit[j];
      }
      return s * tpb * bits;
    };
    const double s = invert_increasing(energy, budget_, 1.0, -345.0, 345.0);
    energy(s);
    double need = kappa * bits - lambda * budget_;
    for (double t : tau) need += t;
    if (plan) {
      plan->s = s;
      plan->time_per_bit = tpb;
      plan->tau2 = tau;
      plan->deficit = deficit;
    }
    return need;
  }

  double avail() const { return avail_; }
  double budget() const { return budget_; }

 private:
  double budget_;
  std::vector<double> u_;
  std::vector<double> w_;
  double avail_;
};

class IndependentInner {
 public:
  IndependentInner(std::vector<double> w, double avail) : w_(std::move(w)), avail_(avail) {}

  double upper() const { return *std::min_element(w_.begin(), w_.end()) / kLn2; }

  double time_needed(double S, std::vector<double>* slots = nullptr) const {
    double total = 0.0;
    if (slots) slots->resize(w_.size());
    for (std::size_t i = 0; i < w_.size(); ++i) {
      const double t = slot_for_rate(S, w_[i]);
      if (!std::isfinite(t)) return kInf;
      if (slots) (*slots)[i] = t;
      total += t;
    }
    return total;
  }

  double avail() const { return avail_; }

 private:
  std::vector<double> w_;
  double avail_;
};

// Largest S with time_needed(S) <= avail; negative when below threshold.
template <class Inner>
double max_rate(const Inner& inner, double threshold) {
  const double hi0 = inner.upper();
  if (!(hi0 > 0.0)) return threshold > 0.0 ? -1.0 : 0.0;
  auto feasible = [&](double S) { return inner.time_needed(S) <= inner.avail(); };
  double lo = 0.0;
  double hi = hi0;
  if (threshold > 0.0) {
    if (threshold >= hi || !feasible(threshold)) return -1.0;
    lo = threshold;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

Eigen::MatrixXcd covariance(const GridPoint& p, int m, double power) {
  if (m == 1) return Eigen::MatrixXcd::Constant(1, 1, power);
  if (p.isotropic) return Eigen::MatrixXcd::Identity(m, m) * (power / m);
  Eigen::VectorXcd v(2);
  const double half = 0.5 * kPi * p.polar;
  v(0) = std::cos(half);
  v(1) = std::polar(std::sin(half), 2.0 * kPi * p.azimuth);
  return power * v * v.adjoint();
}

class Evaluator {
 public:
  Evaluator(Problem problem, const ChannelRealization& chan, const PhyParams& phy)
      : problem_(problem), chan_(chan), phy_(phy), coef_(rate_coefficients(chan, phy)) {}

  double tau1(const GridPoint& p) const { return p.tau1_fraction * (1.0 - phy_.ce_overhead); }

  std::vector<double> z(const GridPoint& p, const Eigen::MatrixXcd& Q) const {
    std::vector<double> out(chan_.size());
    for (std::size_t i = 0; i < chan_.size(); ++i)
      out[i] = tau1(p) * std::max(rates::quadratic_form(Q, chan_.hap_channel(i)), 0.0);
    return out;
  }

  CoopInner coop(const GridPoint& p, const Eigen::MatrixXcd& Q) const {
    const auto zz = z(p, Q);
    std::vector<double> u, w;
    for (std::size_t j = 1; j < chan_.size(); ++j) {
      u.push_back(coef_.rho_bar[j - 1] * zz[j]);
      w.push_back(coef_.rho[j] * zz[j]);
    }
    return CoopInner(coef_.rho[0] * zz[0], std::move(u), std::move(w),
                     (1.0 - phy_.ce_overhead) - tau1(p));
  }

  IndependentInner independent(const GridPoint& p, const Eigen::MatrixXcd& Q) const {
    const auto zz = z(p, Q);
    std::vector<double> w(zz.size());
    for (std::size_t i = 0; i < zz.size(); ++i) w[i] = coef_.rho[i] * zz[i];
    return IndependentInner(std::move(w), (1.0 - phy_.ce_overhead) - tau1(p));
  }

  double value(const GridPoint& p, double threshold) const {
    const Eigen::MatrixXcd Q = covariance(p, phy_.antennas, phy_.tx_power_watts);
    if (problem_ == Problem::cooperative) return max_rate(coop(p, Q), threshold);
    return max_rate(independent(p, Q), threshold);
  }

  const RateCoefficients& coef() const { return coef_; }

 private:
  Problem problem_;
  const ChannelRealization& chan_;
  const PhyParams& phy_;
  RateCoefficients coef_;
};

bool degenerate(Problem problem, const RateCoefficients& c) {
  auto zero = [](double v) { return v == 0.0; };
  if (std::any_of(c.rho.begin(), c.rho.end(), zero)) return true;
  return problem == Problem::cooperative && std::any_of(c.rho_bar.begin(), c.rho_bar.end(), zero);
}

// Index of the largest value strictly above `floor`, lowest index on ties.
std::ptrdiff_t best_index(const std::vector<double>& vals, double floor) {
  std::ptrdiff_t best = -1;
  double top = floor;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (vals[i] > top) {
      top = vals[i];
      best = static_cast<std::ptrdiff_t>(i);
    }
  }
  return best;
}

Allocation certify_coop(const Evaluator& ev, const GridPoint& p, double S,
                        const ChannelRealization& chan, const PhyParams& phy) {
  const std::size_t n = chan.size();
  const Eigen::MatrixXcd Q = covariance(p, phy.antennas, phy.tx_power_watts);
  Allocation a;
  a.tau1 = ev.tau1(p);
  a.Q = Q;
  a.tau2.assign(n - 1, 0.0);
  a.tau3.assign(n, 0.0);
  a.p3.assign(n, 0.0);
  if (!(S > 0.0)) return a;

  const CoopInner inner = ev.coop(p, Q);
  CoopInner::Plan plan;
  inner.time_needed(S, &plan);
  std::vector<double> bits(n);
  bits[0] = S;
  for (std::size_t j = 1; j < n; ++j) bits[j] = plan.deficit[j - 1];
  double total = 0.0, theta_total = 0.0;
  std::vector<double> theta(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.tau3[i] = bits[i] * plan.time_per_bit;
    theta[i] = plan.s * a.tau3[i];
    total += a.tau3[i];
    theta_total += theta[i];
  }
  for (std::size_t j = 1; j < n; ++j) {
    a.tau2[j - 1] = plan.tau2[j - 1];
    total += a.tau2[j - 1];
  }
  const double margin = 1.0 - 1e-12;
  const double time_scale = margin * std::min(1.0, inner.avail() / total);
  const double energy_scale = margin * std::min(1.0, inner.budget() / theta_total);
  const double rho0 = ev.coef().rho[0];
  for (std::size_t i = 0; i < n; ++i) {
    a.tau3[i] *= time_scale;
    if (a.tau3[i] > 0.0)
      a.p3[i] = phy.harvest_efficiency * theta[i] * energy_scale / rho0 / a.tau3[i];
  }
  for (double& t : a.tau2) t *= time_scale;
  return a;
}

IndependentAllocation certify_independent(const Evaluator& ev, const GridPoint& p, double S,
                                          const ChannelRealization& chan, const PhyParams& phy) {
  IndependentAllocation a;
  a.tau1 = ev.tau1(p);
  a.Q = covariance(p, phy.antennas, phy.tx_power_watts);
  a.tau2.assign(chan.size(), 0.0);
  if (!(S > 0.0)) return a;
  const IndependentInner inner = ev.independent(p, a.Q);
  std::vector<double> slots;
  const double total = inner.time_needed(S, &slots);
  const double scale = (1.0 - 1e-12) * std::min(1.0, inner.avail() / total);
  for (std::size_t i = 0; i < slots.size(); ++i) a.tau2[i] = slots[i] * scale;
  return a;
}

std::vector<double> run(Problem problem, const ChannelRealization& chan, const PhyParams& phy,
                        const std::vector<GridPoint>& pts, double threshold, bool parallel) {
  return parallel ? oracle::evaluate_parallel(problem, chan, phy, pts, threshold)
                  : oracle::evaluate_serial(problem, chan, phy, pts, threshold);
}

OracleResult search(Problem problem, const ChannelRealization& chan, const PhyParams& phy,
                    const OracleSettings& settings) {
  phy.validate();
  if (chan.size() > 3 || chan.antennas() > 2)
    throw Error(ErrorCode::instance_too_large, "oracle supports N <= 3 and M <= 2 only");
  if (chan.antennas() != phy.antennas)
    throw Error(ErrorCode::invalid_parameter, "channel antenna count does not match phy.antennas");
  if (!(settings.resolution > 0.0 && settings.resolution <= 0.5))
    throw Error(ErrorCode::invalid_parameter, "oracle resolution must lie in (0, 0.5]");
  if (settings.refine_rounds < 0 || settings.refine_window < 1)
    throw Error(ErrorCode::invalid_parameter, "oracle refinement settings out of range");

  const int k = std::max(2, static_cast<int>(std::lround(1.0 / settings.resolution)));
  const double step0 = 1.0 / k;
  OracleResult res;
  res.final_resolution = step0 * std::pow(10.0, -settings.refine_rounds);

  const Evaluator ev(problem, chan, phy);
  auto finish = [&](const GridPoint& p, double S) {
    if (problem == Problem::cooperative) {
      res.allocation = certify_coop(ev, p, S, chan, phy);
      res.s = rates::evaluate(res.allocation, chan, phy).min_rate;
    } else {
      res.independent = certify_independent(ev, p, S, chan, phy);
      res.s = evaluate_independent(res.independent, chan, phy).min_rate;
    }
    return res;
  };

  if (degenerate(problem, ev.coef())) {
    GridPoint idle;
    idle.tau1_fraction = 1.0;
    idle.isotropic = true;
    return finish(idle, 0.0);
  }

  // Isotropic (or single-antenna) points first; their best value prunes the rest.
  const auto grid = oracle::coarse_grid(phy.antennas, settings.resolution);
  std::vector<GridPoint> first, rest;
  for (const auto& p : grid) (p.isotropic || phy.antennas == 1 ? first : rest).push_back(p);

  auto vals = run(problem, chan, phy, first, 0.0, settings.parallel);
  res.evaluations += first.size();
  std::ptrdiff_t idx = best_index(vals, -kInf);
  GridPoint best = first[static_cast<std::size_t>(idx)];
  double best_val = vals[static_cast<std::size_t>(idx)];
  if (!rest.empty()) {
    vals = run(problem, chan, phy, rest, best_val, settings.parallel);
    res.evaluations += rest.size();
    idx = best_index(vals, best_val);
    if (idx >= 0) {
      best = rest[static_cast<std::size_t>(idx)];
      best_val = vals[static_cast<std::size_t>(idx)];
    }
  }

  const bool beam_dims = phy.antennas == 2 && !best.isotropic;
  const int w = settings.refine_window;
  double h = step0;
  for (int round = 0; round < settings.refine_rounds; ++round) {
    h /= 10.0;
    for (int rep = 0; rep < kMaxRecenter; ++rep) {
      std::vector<GridPoint> pts;
      std::vector<bool> edge;
      const int bw = beam_dims ? w : 0;
      for (int i = -w; i <= w; ++i) {
        const double f = best.tau1_fraction + i * h;
        if (f < 0.5 * h || f > 1.0 - 0.5 * h) continue;
        for (int j = -bw; j <= bw; ++j) {
          const double polar = best.polar + j * h;
          if (polar < -1e-15 || polar > 1.0 + 1e-15) continue;
          for (int l = -bw; l <= bw; ++l) {
            if (i == 0 && j == 0 && l == 0) continue;
            GridPoint p = best;
            p.tau1_fraction = f;
            p.polar = std::clamp(polar, 0.0, 1.0);
            p.azimuth = best.azimuth + l * h;
            p.azimuth -= std::floor(p.azimuth);
            pts.push_back(p);
            edge.push_back(std::abs(i) == w || (bw > 0 && (std::abs(j) == bw || std::abs(l) == bw)));
          }
        }
      }
      vals = run(problem, chan, phy, pts, best_val, settings.parallel);
      res.evaluations += pts.size();
      idx = best_index(vals, best_val);
      if (idx < 0) break;
      best = pts[static_cast<std::size_t>(idx)];
      best_val = vals[static_cast<std::size_t>(idx)];
      if (!edge[static_cast<std::size_t>(idx)]) break;
    }
  }
  return finish(best, best_val);
}

Eigen::Vector2d perspective_gradient(double x, double y) {
  return {(std::log1p(y / x) - y / (x + y)) / kLn2, x / ((x + y) * kLn2)};
}

}  // namespace

OracleResult grid_maxmin_coop(const ChannelRealization& chan, const PhyParams& phy,
                              const OracleSettings& settings) {
  return search(Problem::cooperative, chan, phy, settings);
}

OracleResult grid_maxmin_independent(const ChannelRealization& chan, const PhyParams& phy,
                                     const OracleSettings& settings) {
  return search(Problem::independent, chan, phy, settings);
}

Eigen::Matrix2d perspective_hessian(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0))
    throw Error(ErrorCode::domain_error, "perspective_hessian: x and y must be > 0");
  Eigen::Matrix2d H;
  H << -y * y / x, y, y, -x;
  return H / (kLn2 * (x + y) * (x + y));
}

HessianCheck check_perspective_hessian(double x, double y) {
  HessianCheck c;
  c.hessian = perspective_hessian(x, y);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(c.hessian, Eigen::EigenvaluesOnly);
  c.max_eigenvalue = es.eigenvalues().maxCoeff();
  c.concave = c.max_eigenvalue <= 1e-9;

  const double hx = 1e-4 * x;
  const double hy = 1e-4 * y;
  Eigen::Matrix2d fd;
  fd.col(0) = (perspective_gradient(x + hx, y) - perspective_gradient(x - hx, y)) / (2.0 * hx);
  fd.col(1) = (perspective_gradient(x, y + hy) - perspective_gradient(x, y - hy)) / (2.0 * hy);
  c.fd_error = (fd - c.hessian).cwiseAbs().maxCoeff() / c.hessian.cwiseAbs().maxCoeff();
  c.matches_fd = c.fd_error <= 1e-4;
  return c;
}

bool hessian_psd_check(double x, double y) { return check_perspective_hessian(x, y).passed(); }

namespace oracle {

std::vector<GridPoint> coarse_grid(int antennas, double resolution) {
  const int k = std::max(2, static_cast<int>(std::lround(1.0 / resolution)));
  std::vector<GridPoint> pts;
  for (int i = 1; i < k; ++i) {
    const double f = static_cast<double>(i) / k;
    if (antennas == 1) {
      pts.push_back({f, 0.0, 0.0, false});
      continue;
    }
    pts.push_back({f, 0.0, 0.0, true});
    for (int j = 0; j <= k; ++j)
      for (int l = 0; l < k; ++l)
        pts.push_back({f, static_cast<double>(j) / k, static_cast<double>(l) / k, false});
  }
  return pts;
}

std::vector<double> evaluate_serial(Problem problem, const ChannelRealization& chan,
                                    const PhyParams& phy, std::span<const GridPoint> points,
                                    double threshold) {
  const Evaluator ev(problem, chan, phy);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = ev.value(points[i], threshold);
  return out;
}

std::vector<double> evaluate_parallel(Problem problem, const ChannelRealization& chan,
                                      const PhyParams& phy, std::span<const GridPoint> points,
                                      double threshold) {
  const Evaluator ev(problem, chan, phy);
  std::vector<double> out(points.size());
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = ev.value(points[static_cast<std::size_t>(i)], threshold);
  return out;
}

}  // namespace oracle
}  // namespace wpcn
