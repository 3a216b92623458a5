#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace wpcn {

/// Tuning knobs of the path-following barrier method.
struct SolverSettings {
  /// Stop once (barrier parameter) / t falls below this, in units of the
  /// program's objective scale.
  double objective_tolerance = 1e-7;
  /// Newton-step cap for each centering run.
  int max_newton_iterations = 200;
  double barrier_growth = 10.0;
  double initial_barrier = 1.0;
  double feasibility_slack = 1e-8;
  double backtrack_shrink = 0.5;
  double sufficient_decrease = 0.01;
  /// Centering stops when the squared Newton decrement / 2 is below this.
  double centering_tolerance = 1e-10;

  void validate() const;
};

namespace barrier {

/// constant + sum coef * x[index]
struct LinearForm {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  double operator()(const Eigen::VectorXd& x) const;
  LinearForm& add(int index, double coef);
};

/// x[time] log2(1 + energy(x) / x[time])
struct PerspectiveTerm {
  int time = -1;
  LinearForm energy;
};

/// sum of terms - x[epigraph] >= 0
struct RateConstraint {
  std::string name;
  std::vector<PerspectiveTerm> terms;
  int epigraph = -1;
};

/// form(x) >= 0
struct LinearConstraint {
  std::string name;
  LinearForm form;
};

/// An M x M Hermitian matrix stored in M^2 consecutive variables starting at
/// `offset`: the M diagonal entries, then (Re, Im) of each upper-triangular
/// entry (k, l), k < l, in row-major order.
struct HermitianBlock {
  int offset = 0;
  int dim = 0;

  int size() const noexcept { return dim * dim; }
  Eigen::MatrixXcd matrix(const Eigen::VectorXd& x) const;
  void store(const Eigen::MatrixXcd& W, Eigen::VectorXd& x) const;
  /// Coefficients of a^H W a as a linear form in the block's variables.
  LinearForm quadratic_form(const Eigen::VectorXcd& a, double scale = 1.0) const;
  /// tr(W) as a linear form.
  LinearForm trace(double scale = 1.0) const;
  /// 2M x 2M real symmetric embedding [[Re W, -Im W], [Im W, Re W]].
  Eigen::MatrixXd embedding(const Eigen::VectorXd& x) const;
};

/// maximize x[objective] subject to the listed constraints and W(x) > 0.
struct Program {
  int num_vars = 0;
  int objective = -1;
  /// Typical magnitude of the objective; gaps are measured in this unit.
  double objective_scale = 1.0;
  std::vector<RateConstraint> rates;
  std::vector<LinearConstraint> linear;
  std::optional<HermitianBlock> psd;

  /// Self-concordance parameter: one per scalar constraint, M for the PSD block.
  int barrier_parameter() const;
};

enum class Status { converged, max_iterations };

struct Result {
  Status status = Status::converged;
  Eigen::VectorXd x;
  int newton_iterations = 0;
  int outer_iterations = 0;
  double gap_bound = 0.0;
  double barrier_weight = 0.0;
  /// Squared Newton decrement / 2 at the last centering step.
  double stationarity = 0.0;
};

/// True when x lies in the interior of every constraint.
bool strictly_feasible(const Program& prog, const Eigen::VectorXd& x);

/// Value of each constraint at x (rate constraints first, then linear, then
/// the smallest eigenvalue of the PSD block when present).
std::vector<std::pair<std::string, double>> constraint_values(const Program& prog,
                                                              const Eigen::VectorXd& x);

/// Barrier objective, gradient and Hessian at weight t. Returns false when x
/// is outside the barrier's domain.
bool barrier_derivatives(const Program& prog, const Eigen::VectorXd& x, double t, double& value,
                         Eigen::VectorXd& grad, Eigen::MatrixXd& hess);

/// Path-following barrier method from a strictly feasible start.
Result solve(const Program& prog, Eigen::VectorXd x0, const SolverSettings& settings);

}  // namespace barrier
}  // namespace wpcn
