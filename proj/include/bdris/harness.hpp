#pragma once

// Monte Carlo trials and parameter sweeps over the estimation pipeline.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "bdris/channel.hpp"
#include "bdris/common.hpp"
#include "bdris/estimator.hpp"
#include "bdris/model.hpp"
#include "bdris/trp_select.hpp"

namespace bdris {

struct RunConfig {
  BdRisConfig bdris;
  SceneGeometry scene;
  ChannelModel channel;
  std::optional<Vec3> user_position;  // fixed user instead of uniform draws
  int pool_size = 0;                  // 0 -> 20 * trp_count
  int trp_count = 500;
  double noise_power_dbm = -std::numeric_limits<double>::infinity();  // -inf: noiseless
  SelectionScheme selection = SelectionScheme::greedy;
  TrainConfig train;
  int monte_carlo_trials = 20;
  std::uint64_t master_seed = 1;
  int workers = 0;  // 0 -> hardware concurrency

  int effective_pool_size() const { return pool_size > 0 ? pool_size : 20 * trp_count; }

  double noise_power_w() const {
    return std::isinf(noise_power_dbm) && noise_power_dbm < 0 ? 0.0 : dbm_to_watts(noise_power_dbm);
  }

  void validate() const {
    bdris.validate();
    scene.validate(bdris);
    train.validate();
    detail::require(channel.tx_power_w > 0.0, "tx power must be positive");
    detail::require(trp_count >= 2, "trp_count must be at least 2");
    detail::require(effective_pool_size() >= trp_count, "pool_size must be at least trp_count");
    detail::require(!std::isnan(noise_power_dbm) && noise_power_dbm < std::numeric_limits<double>::infinity(),
                    "noise_power_dbm must be finite or -inf");
    detail::require(monte_carlo_trials >= 1, "monte_carlo_trials must be at least 1");
  }

  /// Full-size deployment: 4x4 UPA, N0 = 4, L = 100.
  static RunConfig full_scale() {
    RunConfig cfg;
    cfg.scene.upa_dims = {4, 4};
    cfg.bdris = BdRisConfig::from_group_size(16, 4);
    cfg.trp_count = 8000;
    cfg.noise_power_dbm = -90.0;
    cfg.monte_carlo_trials = 100;
    return cfg;
  }

  /// Desk-scale: 2x2 UPA, N0 = 2, L = 20.
  static RunConfig desk_scale() { return RunConfig{}; }
};

struct ResultRow {
  int trial = 0;
  int group_size = 0;
  int trp_count = 0;
  double noise_power_dbm = 0.0;
  SelectionScheme selection_scheme = SelectionScheme::greedy;
  double nmse = 0.0;
  double wall_time_seconds = 0.0;

  bool operator==(const ResultRow&) const = default;
};

/// ||estimate - truth||_F^2 / ||truth||_F^2.
inline double nmse(const AutocorrelationMatrix& estimate, const AutocorrelationMatrix& truth) {
  detail::require(estimate.entries.rows() == truth.entries.rows() &&
                      estimate.entries.cols() == truth.entries.cols(),
                  "nmse: dimension mismatch");
  const double denom = truth.entries.squaredNorm();
  detail::require(denom > 0.0, "nmse: truth matrix is zero");
  return (estimate.entries - truth.entries).squaredNorm() / denom;
}

/// Independent sub-streams of one trial.
enum class Stream : std::uint64_t { channel = 1, pool = 2, noise = 3, training = 4, selection = 5 };

inline std::uint64_t stream_seed(std::uint64_t trial_seed, Stream s) {
  return combine_seed(trial_seed, static_cast<std::uint64_t>(s));
}

/// Trial seeds depend only on (master seed, trial index) so every axis value
/// and selection scheme sees the same channel realizations.
inline std::uint64_t trial_seed(std::uint64_t master_seed, int trial_index) {
  return combine_seed(master_seed, static_cast<std::uint64_t>(trial_index));
}

/// Everything a trial produces, for callers that need more than the row.
struct TrialOutcome {
  ResultRow row;
  CascadedChannel channel;
  AutocorrelationMatrix truth;
  AutocorrelationMatrix estimate;
  TrainResult training;
};

inline std::vector<PowerMeasurement> measure_all(const CascadedChannel& h, const TrpSet& set,
                                                 double noise_power, Rng& rng) {
  std::vector<PowerMeasurement> out;
  out.reserve(set.selected.size());
  for (int i = 0; i < set.size(); ++i) out.push_back(measure_power(h, set.selected[i], noise_power, rng, i));
  return out;
}

/// draw channels -> build pool -> select -> measure -> train -> recover -> NMSE.
/// A supplied TRP set replaces pool construction and selection.
inline TrialOutcome run_trial_detailed(const RunConfig& cfg, std::uint64_t seed,
                                       const TrpSet* fixed_trps = nullptr) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  Rng channel_rng(stream_seed(seed, Stream::channel));
  const ChannelRealization ch =
      draw_channels(cfg.scene, cfg.bdris, cfg.channel, channel_rng, cfg.user_position);

  TrialOutcome out;
  out.channel = cascade(ch, cfg.bdris);
  out.truth = true_autocorrelation(out.channel);

  TrpSet trps;
  if (fixed_trps) {
    detail::require(fixed_trps->size() == cfg.trp_count, "TRP set size does not match trp_count");
    detail::require(fixed_trps->n_elements == cfg.bdris.n_elements &&
                        fixed_trps->group_size == cfg.bdris.group_size(),
                    "TRP set geometry does not match configuration");
    trps = *fixed_trps;
  } else {
    Rng pool_rng(stream_seed(seed, Stream::pool));
    const CandidatePool pool = build_pool(cfg.bdris, cfg.effective_pool_size(), pool_rng);
    Rng select_rng(stream_seed(seed, Stream::selection));
    trps = select_trps(pool, cfg.trp_count, cfg.selection, select_rng);
  }

  Rng noise_rng(stream_seed(seed, Stream::noise));
  const auto measurements = measure_all(out.channel, trps, cfg.noise_power_w(), noise_rng);

  TrainConfig tc = cfg.train;
  tc.seed = stream_seed(seed, Stream::training);
  out.training = train(trps, measurements, tc);
  out.estimate = recover_autocorrelation(out.training.best_weights,
                                         out.training.normalization_factor);

  out.row.group_size = cfg.bdris.group_size();
  out.row.trp_count = cfg.trp_count;
  out.row.noise_power_dbm = cfg.noise_power_dbm;
  out.row.selection_scheme = cfg.selection;
  out.row.nmse = nmse(out.estimate, out.truth);
  out.row.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

inline ResultRow run_trial(const RunConfig& cfg, std::uint64_t seed) {
  return run_trial_detailed(cfg, seed).row;
}

enum class SweepAxis { trp_count, noise_power, group_size };

inline std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::trp_count: return "trp_count";
    case SweepAxis::noise_power: return "noise_power";
    case SweepAxis::group_size: return "group_size";
  }
  return "?";
}

inline SweepAxis parse_sweep_axis(const std::string& s) {
  if (s == "trp_count") return SweepAxis::trp_count;
  if (s == "noise_power") return SweepAxis::noise_power;
  if (s == "group_size") return SweepAxis::group_size;
  throw InvalidInput("unknown sweep axis '" + s + "' (expected trp_count|noise_power|group_size)");
}

/// Copy of `base` with the axis set to `value`. Throws on values invalid for the axis.
inline RunConfig apply_axis(const RunConfig& base, SweepAxis axis, double value) {
  RunConfig cfg = base;
  auto as_int = [&](const char* what) {
    detail::require(std::isfinite(value) && value == std::floor(value) && value >= 1,
                    std::string(what) + " values must be positive integers");
    return static_cast<int>(value);
  };
  switch (axis) {
    case SweepAxis::trp_count:
      cfg.trp_count = as_int("trp_count");
      break;
    case SweepAxis::noise_power:
      detail::require(!std::isnan(value) && value < std::numeric_limits<double>::infinity(),
                      "noise_power values must be finite dBm or -inf");
      cfg.noise_power_dbm = value;
      break;
    case SweepAxis::group_size:
      cfg.bdris = BdRisConfig::from_group_size(base.bdris.n_elements, as_int("group_size"),
                                               base.bdris.reference_impedance);
      break;
  }
  cfg.validate();
  return cfg;
}

/// L trials per (axis value, scheme). Rows are ordered by axis value, then
/// trial index, then scheme, independent of worker scheduling.
inline std::vector<ResultRow> sweep(const RunConfig& base, SweepAxis axis,
                                    const std::vector<double>& values,
                                    std::vector<SelectionScheme> schemes = {}) {
  detail::require(!values.empty(), "sweep: no axis values");
  if (schemes.empty()) schemes.push_back(base.selection);

  struct Task {
    RunConfig cfg;
    int trial;
  };
  std::vector<Task> tasks;
  for (double v : values) {
    const RunConfig at = apply_axis(base, axis, v);
    for (int l = 0; l < base.monte_carlo_trials; ++l)
      for (auto s : schemes) {
        RunConfig c = at;
        c.selection = s;
        tasks.push_back({c, l});
      }
  }

  std::vector<ResultRow> rows(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        rows[i] = run_trial(tasks[i].cfg, trial_seed(base.master_seed, tasks[i].trial));
        rows[i].trial = tasks[i].trial;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned n_workers = base.workers > 0 ? static_cast<unsigned>(base.workers)
                                        : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(tasks.size()));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

// ---- CSV ---------------------------------------------------------------

inline constexpr const char* kResultHeader =
    "trial,group_size,trp_count,noise_power_dbm,selection_scheme,nmse,wall_time_seconds";

inline void write_results(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultHeader << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) {
    out << r.trial << ',' << r.group_size << ',' << r.trp_count << ',' << r.noise_power_dbm << ','
        << to_string(r.selection_scheme) << ',' << r.nmse << ',' << r.wall_time_seconds << '\n';
  }
}

inline void emit_results(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_results(out, rows);
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline std::vector<ResultRow> parse_results(std::istream& in, const std::string& origin = "<stream>") {
  std::string line;
  if (!std::getline(in, line) || line != kResultHeader)
    throw IoError(origin + ": missing or unexpected results header");
  std::vector<ResultRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 7) throw IoError(origin + ":" + std::to_string(line_no) + ": expected 7 fields");
    try {
      ResultRow r;
      r.trial = std::stoi(f[0]);
      r.group_size = std::stoi(f[1]);
      r.trp_count = std::stoi(f[2]);
      r.noise_power_dbm = std::stod(f[3]);
      r.selection_scheme = parse_selection_scheme(f[4]);
      r.nmse = std::stod(f[5]);
      r.wall_time_seconds = std::stod(f[6]);
      rows.push_back(r);
    } catch (const std::exception& e) {
      throw IoError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

inline std::vector<ResultRow> read_results(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return parse_results(in, path);
}

// ---- aggregation -------------------------------------------------------

struct SummaryRow {
  int group_size = 0;
  int trp_count = 0;
  double noise_power_dbm = 0.0;
  SelectionScheme selection_scheme = SelectionScheme::greedy;
  int trials = 0;
  double mean_nmse = 0.0;
  double std_nmse = 0.0;  // sample standard deviation; 0 for one trial
};

/// Mean and spread of per-trial NMSE for each configuration, in first-seen order.
inline std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<int, int, double, int>;
  std::map<Key, std::size_t> index;
  std::vector<SummaryRow> out;
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) {
    const Key k{r.group_size, r.trp_count, r.noise_power_dbm, static_cast<int>(r.selection_scheme)};
    auto [it, fresh] = index.emplace(k, out.size());
    if (fresh) {
      out.push_back({r.group_size, r.trp_count, r.noise_power_dbm, r.selection_scheme, 0, 0.0, 0.0});
      values.emplace_back();
    }
    values[it->second].push_back(r.nmse);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& v = values[i];
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    out[i].trials = static_cast<int>(v.size());
    out[i].mean_nmse = mean;
    out[i].std_nmse = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return out;
}

}  // namespace bdris
