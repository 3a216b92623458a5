#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wpcn/baselines.hpp"
#include "wpcn/network.hpp"

namespace wpcn {

enum class SweepVar { r, d, N };

std::string_view to_string(SweepVar v) noexcept;
SweepVar parse_sweep_var(std::string_view name);

/// One Monte Carlo study. Every trial places the WDs once and reuses that
/// placement and its channels for every scheme and CH strategy.
struct ExperimentConfig {
  PhyParams phy;
  SweepVar sweep_var = SweepVar::r;
  std::vector<double> sweep_values{3.0};
  /// Co-parameters held fixed while the sweep variable moves.
  int num_wds = 15;
  double distance = 6.0;
  double radius = 3.0;
  std::vector<SchemeId> schemes{SchemeId::proposed_eb_cooperation, SchemeId::cooperation_no_eb,
                                SchemeId::independent_eb};
  std::vector<ChStrategy> strategies{ChStrategy::closest_to_center};
  int placements = 20;
  /// Draws per placement for the random CH strategy.
  int ch_repeats = 5;
  std::uint64_t seed = 1;
  std::string output;
  SolverSettings solver;

  /// Throws Error(config_error) naming the offending field.
  void validate() const;
};

/// JSON keys: phy{...}, sweep{variable, values}, num_wds, distance, radius,
/// schemes, strategies, placements, ch_repeats, seed, output. Every key is
/// optional; unknown keys are an error.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Strategy label of the independent scheme, which has no cluster head.
inline constexpr std::string_view kNoStrategy = "none";

/// Outcome of one scheme on one trial (and one CH draw for the random strategy).
struct TrialResult {
  std::size_t point = 0;  // index into sweep_values
  std::size_t trial = 0;
  std::size_t repeat = 0;
  SchemeId scheme = SchemeId::proposed_eb_cooperation;
  std::string strategy;
  bool ok = false;
  double maxmin = 0.0;
  double sum = 0.0;
};

struct ResultRow {
  SweepVar sweep_var = SweepVar::r;
  double sweep_value = 0.0;
  SchemeId scheme = SchemeId::proposed_eb_cooperation;
  std::string strategy;
  double mean_maxmin = 0.0;
  double mean_sum = 0.0;
  double stderr_maxmin = 0.0;
  double stderr_sum = 0.0;
  std::size_t n_trials = 0;
  std::size_t n_failures = 0;
};

struct RunOptions {
  bool parallel = true;
  /// 0 keeps the OpenMP default.
  int threads = 0;
};

/// Every (point, trial) work item of the config, in a fixed order.
std::vector<TrialResult> run_trials(const ExperimentConfig& config, const RunOptions& options = {});

/// Rows in config order: sweep value, then scheme, then strategy. Inputs are
/// sorted first, so the result does not depend on the order of `trials`.
std::vector<ResultRow> aggregate(const ExperimentConfig& config, std::vector<TrialResult> trials);

std::vector<ResultRow> run_experiment(const ExperimentConfig& config,
                                      const RunOptions& options = {});

inline constexpr std::string_view kCsvHeader =
    "sweep_var,sweep_value,scheme,strategy,mean_maxmin,mean_sum,stderr_maxmin,stderr_sum,"
    "n_trials,n_failures";

std::string format_csv(const std::vector<ResultRow>& table);
/// Throws Error(io_error) with the path on failure.
void emit_csv(const std::vector<ResultRow>& table, const std::filesystem::path& path);

/// Geometry and channels of one trial, shared by every scheme.
struct TrialInstance {
  std::vector<Point> positions;
  PhyParams phy;
};

/// WD placement of trial `trial` at the given geometry.
TrialInstance place_trial(const ExperimentConfig& config, std::uint64_t trial, int num_wds,
                          double distance, double radius);
/// Channels for the placement with the given CH.
ChannelRealization trial_channels(const ExperimentConfig& config, std::uint64_t trial,
                                  const TrialInstance& inst, std::size_t ch_index);

/// A small instance for oracle comparison. N cycles over {2, 3}, M over
/// {1, 2} and the noise floor over three decades so both the low-SNR and
/// high-SNR regimes are covered.
struct DeskInstance {
  PhyParams phy;
  ChannelRealization chan;
};
DeskInstance desk_instance(std::uint64_t seed);

struct VerifyOptions {
  int oracle_instances = 12;
  int hessian_points = 1000;
  std::uint64_t seed = 1;
  bool quiet = false;
};

struct VerifyReport {
  int oracle_checked = 0;
  int oracle_failed = 0;
  double worst_relative_gap = 0.0;
  int hessian_checked = 0;
  int hessian_failed = 0;

  bool passed() const noexcept { return oracle_failed == 0 && hessian_failed == 0; }
};

/// Solver against the grid oracle on desk instances, then the perspective
/// Hessian check on random points. Progress lines go to `log`.
VerifyReport run_verify(const VerifyOptions& options, std::ostream& log);

}  // namespace wpcn
