#include "wpcn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>
#include <omp.h>

#include "wpcn/error.hpp"
#include "wpcn/oracle.hpp"

namespace wpcn {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorCode::config_error, "config: " + msg);
}

// Reads j[key] into out when present, checking its JSON type.
class Fields {
 public:
  Fields(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) config_error(where("") + "must be an object");
  }

  void number(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) config_error(where(key) + "must be a number");
      out = v->get<double>();
    }
  }

  void integer(const char* key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) config_error(where(key) + "must be an integer");
      const auto value = v->get<long long>();
      if (value < -1'000'000'000LL || value > 1'000'000'000LL)
        config_error(where(key) + "is out of range");
      out = static_cast<int>(value);
    }
  }

  void seed(const char* key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) config_error(where(key) + "must be a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void string(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) config_error(where(key) + "must be a string");
      out = v->get<std::string>();
    }
  }

  const json* object(const char* key) {
    const json* v = take(key);
    if (v && !v->is_object()) config_error(where(key) + "must be an object");
    return v;
  }

  const json* array(const char* key) {
    const json* v = take(key);
    if (v && !v->is_array()) config_error(where(key) + "must be an array");
    return v;
  }

  std::string path(std::string_view key) const {
    if (prefix_.empty()) return std::string(key);
    return key.empty() ? prefix_ : prefix_ + "." + std::string(key);
  }

  std::string where(std::string_view key) const {
    if (key.empty() && prefix_.empty()) return "document ";
    return "field '" + path(key) + "' ";
  }

  // Rejects keys nobody asked for.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
        config_error("unknown field '" + path(it.key()) + "'");
  }

 private:
  const json* take(const char* key) {
    seen_.emplace_back(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& j_;
  std::string prefix_;
  std::vector<std::string> seen_;
};

template <class T, class Parse>
std::vector<T> parse_names(const json& arr, const std::string& field, Parse parse) {
  std::vector<T> out;
  for (const json& v : arr) {
    if (!v.is_string()) config_error("field '" + field + "' must hold strings");
    try {
      out.push_back(parse(v.get<std::string>()));
    } catch (const Error& e) {
      config_error("field '" + field + "': " + e.what());
    }
  }
  return out;
}

template <class T>
bool has_duplicates(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  return std::adjacent_find(v.begin(), v.end()) != v.end();
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct Geometry {
  int num_wds;
  double distance;
  double radius;
};

Geometry geometry_at(const ExperimentConfig& c, double value) {
  Geometry g{c.num_wds, c.distance, c.radius};
  switch (c.sweep_var) {
    case SweepVar::r: g.radius = value; break;
    case SweepVar::d: g.distance = value; break;
    case SweepVar::N: g.num_wds = static_cast<int>(value); break;
  }
  return g;
}

TrialResult run_one(const ExperimentConfig& c, SchemeId scheme, const ChannelRealization& chan,
                    TrialResult r) {
  r.scheme = scheme;
  try {
    const SolveReport rep = solve_scheme(scheme, chan, c.phy, c.solver);
    r.ok = rep.status == SolveStatus::optimal;
    r.maxmin = rep.rates.min_rate;
    r.sum = rep.rates.sum_rate;
  } catch (const Error&) {
    r.ok = false;
  }
  return r;
}

// All results of one (sweep point, trial) work item. A placement that
// cannot be built counts as a failure for every scheme of the trial.
std::vector<TrialResult> run_item(const ExperimentConfig& c, std::size_t point,
                                  std::size_t trial) {
  const Geometry g = geometry_at(c, c.sweep_values[point]);
  std::optional<TrialInstance> inst;
  try {
    inst = place_trial(c, trial, g.num_wds, g.distance, g.radius);
  } catch (const Error&) {
  }

  const std::uint64_t seed = trial_seed(c.seed, trial);
  std::vector<TrialResult> out;
  const auto run = [&](SchemeId s, std::string_view label, std::size_t repeat, auto pick_ch) {
    TrialResult r;
    r.point = point;
    r.trial = trial;
    r.repeat = repeat;
    r.scheme = s;
    r.strategy = label;
    if (inst) r = run_one(c, s, trial_channels(c, trial, *inst, pick_ch()), r);
    out.push_back(std::move(r));
  };
  for (SchemeId s : c.schemes) {
    if (s == SchemeId::independent_eb) {
      run(s, kNoStrategy, 0, [] { return std::size_t{0}; });
      continue;
    }
    for (ChStrategy st : c.strategies) {
      const int reps = st == ChStrategy::random ? c.ch_repeats : 1;
      for (int k = 0; k < reps; ++k) {
        run(s, to_string(st), static_cast<std::size_t>(k), [&] {
          Rng rng(seed, streams::cluster_head + static_cast<std::uint64_t>(k));
          return select_ch(inst->positions, st, rng);
        });
      }
    }
  }
  return out;
}

struct Moments {
  double mean = 0.0;
  double stderr_ = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  double sum = 0.0;
  for (double x : v) sum += x;
  m.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.stderr_ = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return m;
}

}  // namespace

std::string_view to_string(SweepVar v) noexcept {
  switch (v) {
    case SweepVar::r: return "r";
    case SweepVar::d: return "d";
    case SweepVar::N: return "N";
  }
  return "?";
}

SweepVar parse_sweep_var(std::string_view name) {
  if (name == "r") return SweepVar::r;
  if (name == "d") return SweepVar::d;
  if (name == "N") return SweepVar::N;
  throw Error(ErrorCode::invalid_parameter,
              "unknown sweep variable '" + std::string(name) + "' (expected r, d or N)");
}

void ExperimentConfig::validate() const {
  try {
    phy.validate();
  } catch (const Error& e) {
    config_error(std::string("field 'phy': ") + e.what());
  }
  if (sweep_values.empty()) config_error("field 'sweep.values' must be nonempty");
  for (double v : sweep_values) {
    if (!std::isfinite(v)) config_error("field 'sweep.values' must be finite");
    switch (sweep_var) {
      case SweepVar::r:
        if (!(v > 0.0)) config_error("field 'sweep.values' must be > 0 for r");
        break;
      case SweepVar::d:
        if (!(v >= 0.0)) config_error("field 'sweep.values' must be >= 0 for d");
        break;
      case SweepVar::N:
        if (v != std::floor(v) || v < 2.0 || v > 1000.0)
          config_error("field 'sweep.values' must be integers in [2, 1000] for N");
        break;
    }
  }
  if (num_wds < 2 || num_wds > 1000) config_error("field 'num_wds' must lie in [2, 1000]");
  if (!(distance >= 0.0) || !std::isfinite(distance)) config_error("field 'distance' must be >= 0");
  if (!(radius > 0.0) || !std::isfinite(radius)) config_error("field 'radius' must be > 0");
  if (schemes.empty()) config_error("field 'schemes' must be nonempty");
  if (has_duplicates(schemes)) config_error("field 'schemes' has duplicates");
  if (strategies.empty()) config_error("field 'strategies' must be nonempty");
  if (has_duplicates(strategies)) config_error("field 'strategies' has duplicates");
  if (placements < 1) config_error("field 'placements' must be >= 1");
  if (ch_repeats < 1) config_error("field 'ch_repeats' must be >= 1");
  try {
    solver.validate();
  } catch (const Error& e) {
    config_error(std::string("solver settings: ") + e.what());
  }
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Fields top(j, "");
  if (const json* p = top.object("phy")) {
    Fields f(*p, "phy");
    f.number("tx_power_watts", c.phy.tx_power_watts);
    f.number("harvest_efficiency", c.phy.harvest_efficiency);
    f.number("noise_watts", c.phy.noise_watts);
    f.integer("antennas", c.phy.antennas);
    f.number("antenna_gain", c.phy.antenna_gain);
    f.number("pathloss_exponent", c.phy.pathloss_exponent);
    f.number("carrier_hz", c.phy.carrier_hz);
    f.number("ce_overhead", c.phy.ce_overhead);
    f.finish();
  }
  if (const json* s = top.object("sweep")) {
    Fields f(*s, "sweep");
    std::string var(to_string(c.sweep_var));
    f.string("variable", var);
    try {
      c.sweep_var = parse_sweep_var(var);
    } catch (const Error& e) {
      config_error(std::string("field 'sweep.variable': ") + e.what());
    }
    if (const json* vals = f.array("values")) {
      c.sweep_values.clear();
      for (const json& v : *vals) {
        if (!v.is_number()) config_error("field 'sweep.values' must hold numbers");
        c.sweep_values.push_back(v.get<double>());
      }
    }
    f.finish();
  }
  top.integer("num_wds", c.num_wds);
  top.number("distance", c.distance);
  top.number("radius", c.radius);
  if (const json* a = top.array("schemes"))
    c.schemes = parse_names<SchemeId>(*a, "schemes", parse_scheme);
  if (const json* a = top.array("strategies"))
    c.strategies = parse_names<ChStrategy>(*a, "strategies", parse_ch_strategy);
  top.integer("placements", c.placements);
  top.integer("ch_repeats", c.ch_repeats);
  top.seed("seed", c.seed);
  top.string("output", c.output);
  top.finish();
  c.validate();
  return c;
}

ExperimentConfig parse_config_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

TrialInstance place_trial(const ExperimentConfig& config, std::uint64_t trial, int num_wds,
                          double distance, double radius) {
  Rng rng(trial_seed(config.seed, trial), streams::placement);
  TrialInstance inst;
  inst.phy = config.phy;
  inst.positions = place_wds(static_cast<std::size_t>(num_wds), distance, radius, rng);
  return inst;
}

ChannelRealization trial_channels(const ExperimentConfig& config, std::uint64_t trial,
                                  const TrialInstance& inst, std::size_t ch_index) {
  const NetworkInstance net(Point{}, inst.positions, ch_index, inst.phy);
  Rng rng(trial_seed(config.seed, trial), streams::channels);
  return draw_channels(net, rng);
}

std::vector<TrialResult> run_trials(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const std::size_t points = config.sweep_values.size();
  const std::size_t trials = static_cast<std::size_t>(config.placements);
  const std::size_t items = points * trials;
  std::vector<std::vector<TrialResult>> slots(items);

  if (options.parallel) {
    const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::size_t k = 0; k < items; ++k) slots[k] = run_item(config, k / trials, k % trials);
  } else {
    for (std::size_t k = 0; k < items; ++k) slots[k] = run_item(config, k / trials, k % trials);
  }

  std::vector<TrialResult> out;
  for (auto& s : slots) std::move(s.begin(), s.end(), std::back_inserter(out));
  return out;
}

std::vector<ResultRow> aggregate(const ExperimentConfig& config, std::vector<TrialResult> trials) {
  using Key = std::tuple<std::size_t, SchemeId, std::string>;
  const auto order = [](const TrialResult& a, const TrialResult& b) {
    return std::tie(a.point, a.scheme, a.strategy, a.trial, a.repeat) <
           std::tie(b.point, b.scheme, b.strategy, b.trial, b.repeat);
  };
  std::sort(trials.begin(), trials.end(), order);

  std::map<Key, std::vector<const TrialResult*>> groups;
  for (const TrialResult& t : trials) groups[{t.point, t.scheme, t.strategy}].push_back(&t);

  std::vector<ResultRow> rows;
  for (std::size_t p = 0; p < config.sweep_values.size(); ++p) {
    for (SchemeId s : config.schemes) {
      std::vector<std::string> labels;
      if (s == SchemeId::independent_eb) {
        labels.emplace_back(kNoStrategy);
      } else {
        for (ChStrategy st : config.strategies) labels.emplace_back(to_string(st));
      }
      for (const std::string& label : labels) {
        ResultRow row;
        row.sweep_var = config.sweep_var;
        row.sweep_value = config.sweep_values[p];
        row.scheme = s;
        row.strategy = label;
        std::vector<double> maxmin;
        std::vector<double> sum;
        if (const auto it = groups.find({p, s, label}); it != groups.end()) {
          for (const TrialResult* t : it->second) {
            ++row.n_trials;
            if (!t->ok) {
              ++row.n_failures;
              continue;
            }
            maxmin.push_back(t->maxmin);
            sum.push_back(t->sum);
          }
        }
        const Moments mm = moments(maxmin);
        const Moments ms = moments(sum);
        row.mean_maxmin = mm.mean;
        row.stderr_maxmin = mm.stderr_;
        row.mean_sum = ms.mean;
        row.stderr_sum = ms.stderr_;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  return aggregate(config, run_trials(config, options));
}

std::string format_csv(const std::vector<ResultRow>& table) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const ResultRow& r : table) {
    out += to_string(r.sweep_var);
    out += ',' + format_double(r.sweep_value);
    out += ',' + std::string(to_string(r.scheme));
    out += ',' + r.strategy;
    out += ',' + format_double(r.mean_maxmin);
    out += ',' + format_double(r.mean_sum);
    out += ',' + format_double(r.stderr_maxmin);
    out += ',' + format_double(r.stderr_sum);
    out += ',' + std::to_string(r.n_trials);
    out += ',' + std::to_string(r.n_failures);
    out += '\n';
  }
  return out;
}

void emit_csv(const std::vector<ResultRow>& table, const std::filesystem::path& path) {
  if (table.empty()) throw Error(ErrorCode::invalid_parameter, "emit_csv: table is empty");
  const std::string text = format_csv(table);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw Error(ErrorCode::io_error, "write to '" + path.string() + "' failed");
}

DeskInstance desk_instance(std::uint64_t seed) {
  static constexpr double kNoise[] = {1e-10, 1e-12, 1e-14};
  PhyParams phy;
  phy.antennas = 1 + static_cast<int>((seed / 2) % 2);
  phy.noise_watts = kNoise[seed % 3];
  const std::size_t n = 2 + seed % 2;
  Rng shape(seed, 0);
  const double d = 2.0 + 6.0 * shape.uniform();
  const double r = 0.5 + 2.5 * shape.uniform();
  Rng place(seed, streams::placement);
  const NetworkInstance net(Point{}, place_wds(n, d, r, place), 0, phy);
  Rng rng(seed, streams::channels);
  return {phy, draw_channels(net, rng)};
}

VerifyReport run_verify(const VerifyOptions& options, std::ostream& log) {
  VerifyReport rep;
  for (int k = 0; k < options.oracle_instances; ++k) {
    const std::uint64_t seed = options.seed + static_cast<std::uint64_t>(k);
    const DeskInstance inst = desk_instance(seed);
    const auto check = [&](const char* label, double solver, const OracleResult& orc) {
      const double gap = std::abs(solver - orc.s);
      const double tol = std::max(1e-3 * orc.s, orc.final_resolution);
      const bool ok = gap <= tol;
      ++rep.oracle_checked;
      if (!ok) ++rep.oracle_failed;
      if (orc.s > 0.0) rep.worst_relative_gap = std::max(rep.worst_relative_gap, gap / orc.s);
      if (!options.quiet || !ok) {
        log << (ok ? "ok   " : "FAIL ") << label << " seed=" << seed << " N=" << inst.chan.size()
            << " M=" << inst.phy.antennas << " solver=" << format_double(solver)
            << " oracle=" << format_double(orc.s) << '\n';
      }
    };
    check("cooperative", solve_p3(inst.chan, inst.phy).sbar_star,
          grid_maxmin_coop(inst.chan, inst.phy));
    check("independent", solve_independent(inst.chan, inst.phy).sbar_star,
          grid_maxmin_independent(inst.chan, inst.phy));
  }

  Rng rng(options.seed, 0);
  for (int k = 0; k < options.hessian_points; ++k) {
    const double x = 10.0 * (1.0 - rng.uniform());
    const double y = 10.0 * (1.0 - rng.uniform());
    const HessianCheck h = check_perspective_hessian(x, y);
    ++rep.hessian_checked;
    if (!h.passed()) {
      ++rep.hessian_failed;
      log << "FAIL hessian x=" << format_double(x) << " y=" << format_double(y)
          << " max_eig=" << format_double(h.max_eigenvalue)
          << " fd_error=" << format_double(h.fd_error) << '\n';
    }
  }
  if (!options.quiet)
    log << "hessian: " << rep.hessian_checked - rep.hessian_failed << '/' << rep.hessian_checked
        << " points pass\n";
  return rep;
}

}  // namespace wpcn
