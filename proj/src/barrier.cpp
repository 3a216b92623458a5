#include "wpcn/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wpcn/error.hpp"
#include "wpcn/rates.hpp"

namespace wpcn {

void SolverSettings::validate() const {
  auto bad = [](const char* msg) { throw Error(ErrorCode::invalid_parameter, msg); };
  if (!(objective_tolerance > 0.0)) bad("objective_tolerance must be > 0");
  if (max_newton_iterations < 1) bad("max_newton_iterations must be >= 1");
  if (!(barrier_growth > 1.0)) bad("barrier_growth must be > 1");
  if (!(initial_barrier > 0.0)) bad("initial_barrier must be > 0");
  if (!(feasibility_slack > 0.0)) bad("feasibility_slack must be > 0");
  if (!(backtrack_shrink > 0.0 && backtrack_shrink < 1.0)) bad("backtrack_shrink must lie in (0, 1)");
  if (!(sufficient_decrease > 0.0 && sufficient_decrease < 0.5))
    bad("sufficient_decrease must lie in (0, 0.5)");
  if (!(centering_tolerance > 0.0)) bad("centering_tolerance must be > 0");
}

namespace barrier {

namespace {

constexpr int kMaxOuterIterations = 100;
constexpr int kMaxBacktracks = 200;

struct Entry {
  int row;
  int col;
  double val;
};

// Entries of d(embedding)/d(param p) for every parameter of the block.
std::vector<std::vector<Entry>> embedding_basis(const HermitianBlock& b) {
  const int m = b.dim;
  std::vector<std::vector<Entry>> out;
  out.reserve(static_cast<std::size_t>(b.size()));
  for (int k = 0; k < m; ++k) out.push_back({{k, k, 1.0}, {m + k, m + k, 1.0}});
  for (int k = 0; k < m; ++k) {
    for (int l = k + 1; l < m; ++l) {
      out.push_back({{k, l, 1.0}, {l, k, 1.0}, {m + k, m + l, 1.0}, {m + l, m + k, 1.0}});
      out.push_back({{k, m + l, -1.0}, {m + l, k, -1.0}, {l, m + k, 1.0}, {m + k, l, 1.0}});
    }
  }
  return out;
}

// Sparse gradient of a constraint with duplicate indices merged.
using SparseVec = std::vector<std::pair<int, double>>;

void compress(SparseVec& v) {
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseVec out;
  for (const auto& [i, c] : v) {
    if (!out.empty() && out.back().first == i)
      out.back().second += c;
    else
      out.emplace_back(i, c);
  }
  v.swap(out);
}

// Value of a rate constraint; false when outside the domain.
bool rate_value(const RateConstraint& rc, const Eigen::VectorXd& x, double& g) {
  double sum = 0.0;
  for (const auto& term : rc.terms) {
    const double tau = x[term.time];
    const double w = term.energy(x);
    if (!(tau > 0.0) || !(w >= 0.0)) return false;
    sum += rates::perspective_rate(tau, w);
  }
  g = sum - x[rc.epigraph];
  return g > 0.0;
}

bool psd_factor(const HermitianBlock& b, const Eigen::VectorXd& x, Eigen::LLT<Eigen::MatrixXd>& llt) {
  llt.compute(b.embedding(x));
  if (llt.info() != Eigen::Success) return false;
  const auto diag = llt.matrixLLT().diagonal();
  return (diag.array() > 0.0).all() && diag.allFinite();
}

// Barrier terms only, without the objective.
bool barrier_part(const Program& prog, const Eigen::VectorXd& x, double& value) {
  double v = 0.0;
  for (const auto& lc : prog.linear) {
    const double g = lc.form(x);
    if (!(g > 0.0)) return false;
    v -= std::log(g);
  }
  if (prog.psd) {
    Eigen::LLT<Eigen::MatrixXd> llt;
    if (!psd_factor(*prog.psd, x, llt)) return false;
    // -log det W = -(1/2) log det embedding = -sum log L_ii.
    v -= llt.matrixLLT().diagonal().array().log().sum();
  }
  for (const auto& rc : prog.rates) {
    double g = 0.0;
    if (!rate_value(rc, x, g)) return false;
    v -= std::log(g);
  }
  value = v;
  return std::isfinite(v);
}

bool barrier_value(const Program& prog, const Eigen::VectorXd& x, double t, double& value) {
  if (!barrier_part(prog, x, value)) return false;
  value -= t * x[prog.objective] / prog.objective_scale;
  return true;
}

bool newton_direction(const Eigen::MatrixXd& H, const Eigen::VectorXd& grad, Eigen::VectorXd& dx) {
  const Eigen::VectorXd d =
      H.diagonal().cwiseAbs().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd Hs = d.asDiagonal() * H * d.asDiagonal();
  const Eigen::VectorXd rhs = -(d.asDiagonal() * grad);
  Eigen::VectorXd y;
  Eigen::LLT<Eigen::MatrixXd> llt(Hs);
  if (llt.info() == Eigen::Success) {
    y = llt.solve(rhs);
  } else {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Hs);
    if (ldlt.info() != Eigen::Success) return false;
    y = ldlt.solve(rhs);
  }
  dx = d.asDiagonal() * y;
  return dx.allFinite();
}

}  // namespace

double LinearForm::operator()(const Eigen::VectorXd& x) const {
  double v = constant;
  for (const auto& [i, c] : terms) v += c * x[i];
  return v;
}

LinearForm& LinearForm::add(int index, double coef) {
  terms.emplace_back(index, coef);
  return *this;
}

Eigen::MatrixXcd HermitianBlock::matrix(const Eigen::VectorXd& x) const {
  Eigen::MatrixXcd W(dim, dim);
  for (int k = 0; k < dim; ++k) W(k, k) = x[offset + k];
  int idx = offset + dim;
  for (int k = 0; k < dim; ++k) {
    for (int l = k + 1; l < dim; ++l, idx += 2) {
      W(k, l) = {x[idx], x[idx + 1]};
      W(l, k) = std::conj(W(k, l));
    }
  }
  return W;
}

void HermitianBlock::store(const Eigen::MatrixXcd& W, Eigen::VectorXd& x) const {
  for (int k = 0; k < dim; ++k) x[offset + k] = W(k, k).real();
  int idx = offset + dim;
  for (int k = 0; k < dim; ++k) {
    for (int l = k + 1; l < dim; ++l, idx += 2) {
      const std::complex<double> w = 0.5 * (W(k, l) + std::conj(W(l, k)));
      x[idx] = w.real();
      x[idx + 1] = w.imag();
    }
  }
}

LinearForm HermitianBlock::quadratic_form(const Eigen::VectorXcd& a, double scale) const {
  LinearForm f;
  for (int k = 0; k < dim; ++k) f.add(offset + k, scale * std::norm(a(k)));
  int idx = offset + dim;
  for (int k = 0; k < dim; ++k) {
    for (int l = k + 1; l < dim; ++l, idx += 2) {
      const std::complex<double> c = std::conj(a(k)) * a(l);
      f.add(idx, 2.0 * scale * c.real());
      f.add(idx + 1, -2.0 * scale * c.imag());
    }
  }
  return f;
}

LinearForm HermitianBlock::trace(double scale) const {
  LinearForm f;
  for (int k = 0; k < dim; ++k) f.add(offset + k, scale);
  return f;
}

Eigen::MatrixXd HermitianBlock::embedding(const Eigen::VectorXd& x) const {
  const Eigen::MatrixXcd W = matrix(x);
  Eigen::MatrixXd E(2 * dim, 2 * dim);
  E.topLeftCorner(dim, dim) = W.real();
  E.bottomRightCorner(dim, dim) = W.real();
  E.topRightCorner(dim, dim) = -W.imag();
  E.bottomLeftCorner(dim, dim) = W.imag();
  return E;
}

int Program::barrier_parameter() const {
  return static_cast<int>(rates.size() + linear.size()) + (psd ? psd->dim : 0);
}

bool strictly_feasible(const Program& prog, const Eigen::VectorXd& x) {
  double v = 0.0;
  return x.size() == prog.num_vars && barrier_value(prog, x, 0.0, v);
}

std::vector<std::pair<std::string, double>> constraint_values(const Program& prog,
                                                              const Eigen::VectorXd& x) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& rc : prog.rates) {
    double sum = 0.0;
    for (const auto& term : rc.terms)
      sum += rates::perspective_rate(std::max(x[term.time], 0.0), std::max(term.energy(x), 0.0));
    out.emplace_back(rc.name, sum - x[rc.epigraph]);
  }
  for (const auto& lc : prog.linear) out.emplace_back(lc.name, lc.form(x));
  if (prog.psd) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(prog.psd->matrix(x), Eigen::EigenvaluesOnly);
    out.emplace_back("psd", es.eigenvalues().minCoeff());
  }
  return out;
}

bool barrier_derivatives(const Program& prog, const Eigen::VectorXd& x, double t, double& value,
                         Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
  if (!barrier_value(prog, x, t, value)) return false;
  const int n = prog.num_vars;
  grad.setZero(n);
  hess.setZero(n, n);
  grad[prog.objective] -= t / prog.objective_scale;

  auto add_outer = [&](const SparseVec& a, double g) {
    const double g2 = g * g;
    for (const auto& [i, ci] : a) {
      grad[i] -= ci / g;
      for (const auto& [j, cj] : a) hess(i, j) += ci * cj / g2;
    }
  };

  for (const auto& lc : prog.linear) {
    SparseVec a = lc.form.terms;
    compress(a);
    add_outer(a, lc.form(x));
  }

  if (prog.psd) {
    const HermitianBlock& b = *prog.psd;
    Eigen::LLT<Eigen::MatrixXd> llt;
    if (!psd_factor(b, x, llt)) return false;
    const Eigen::MatrixXd X = llt.solve(Eigen::MatrixXd::Identity(2 * b.dim, 2 * b.dim));
    const auto basis = embedding_basis(b);
    const int np = b.size();
    for (int p = 0; p < np; ++p) {
      double tr = 0.0;
      for (const Entry& e : basis[p]) tr += e.val * X(e.col, e.row);
      grad[b.offset + p] -= 0.5 * tr;
      for (int q = p; q < np; ++q) {
        double h = 0.0;
        for (const Entry& e : basis[p])
          for (const Entry& f : basis[q]) h += e.val * f.val * X(e.col, f.row) * X(f.col, e.row);
        hess(b.offset + p, b.offset + q) += 0.5 * h;
        if (q != p) hess(b.offset + q, b.offset + p) += 0.5 * h;
      }
    }
  }

  for (const auto& rc : prog.rates) {
    double g = 0.0;
    if (!rate_value(rc, x, g)) return false;
    SparseVec a;
    a.emplace_back(rc.epigraph, -1.0);
    for (const auto& term : rc.terms) {
      const auto d = rates::perspective_derivatives(x[term.time], term.energy(x));
      a.emplace_back(term.time, d.dx);
      for (const auto& [k, c] : term.energy.terms) a.emplace_back(k, d.dw * c);
      // -(1/g) times the term's Hessian.
      const int i = term.time;
      hess(i, i) -= d.dxx / g;
      for (const auto& [k, c] : term.energy.terms) {
        hess(i, k) -= d.dxw * c / g;
        hess(k, i) -= d.dxw * c / g;
        for (const auto& [l, e] : term.energy.terms) hess(k, l) -= d.dww * c * e / g;
      }
    }
    compress(a);
    add_outer(a, g);
  }
  return true;
}

Result solve(const Program& prog, Eigen::VectorXd x, const SolverSettings& settings) {
  settings.validate();
  if (prog.num_vars <= 0 || prog.objective < 0 || prog.objective >= prog.num_vars)
    throw Error(ErrorCode::invalid_parameter, "barrier program has no valid objective variable");
  if (!(prog.objective_scale > 0.0))
    throw Error(ErrorCode::invalid_parameter, "barrier objective_scale must be > 0");
  if (!strictly_feasible(prog, x))
    throw Error(ErrorCode::infeasible_allocation, "barrier start point is not strictly feasible");

  const double m = prog.barrier_parameter();
  Result res;
  double t = settings.initial_barrier;
  double value = 0.0;
  Eigen::VectorXd grad, dx, trial;
  Eigen::MatrixXd hess;

  for (int outer = 0; outer < kMaxOuterIterations; ++outer) {
    bool centered = false;
    for (int it = 0; it < settings.max_newton_iterations; ++it) {
      if (!barrier_derivatives(prog, x, t, value, grad, hess)) break;
      if (!newton_direction(hess, grad, dx)) {
        centered = true;
        break;
      }
      const double slope = grad.dot(dx);
      res.stationarity = std::max(-slope, 0.0) / 2.0;
      if (!(slope < 0.0) || res.stationarity <= settings.centering_tolerance) {
        centered = true;
        break;
      }
      ++res.newton_iterations;
      // The objective part of F grows like t, so changes are compared term
      // by term rather than through F itself.
      double base = 0.0;
      barrier_part(prog, x, base);
      const double obj_slope = -t * dx[prog.objective] / prog.objective_scale;
      double step = 1.0;
      double change = 0.0;
      int backtracks = 0;
      for (;;) {
        trial = x + step * dx;
        double b = 0.0;
        if (barrier_part(prog, trial, b)) {
          change = step * obj_slope + (b - base);
          if (change <= settings.sufficient_decrease * step * slope) break;
        }
        step *= settings.backtrack_shrink;
        if (++backtracks > kMaxBacktracks) break;
      }
      if (backtracks > kMaxBacktracks || !(change < 0.0)) {
        // No representable progress left at this weight.
        centered = true;
        break;
      }
      x = trial;
    }
    ++res.outer_iterations;
    res.barrier_weight = t;
    res.gap_bound = m / t * prog.objective_scale;
    if (!centered) {
      res.status = Status::max_iterations;
      break;
    }
    if (m / t < settings.objective_tolerance) {
      res.status = Status::converged;
      break;
    }
    t *= settings.barrier_growth;
    if (outer + 1 == kMaxOuterIterations) res.status = Status::max_iterations;
  }
  res.x = std::move(x);
  return res;
}

}  // namespace barrier
}  // namespace wpcn
